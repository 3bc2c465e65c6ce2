"""
Dense complex linear algebra and angular-momentum operators.

Basis conventions used throughout the package:

* single angular momentum: ``|j, m>`` with ``m`` ascending (``-j ... j``)
* spin-1/2 factor: ``(|->, |+>)``, i.e. ascending ``m`` as well
* joint orbital x spin space: Kronecker order, orbital index slowest

Ladder operators follow the Condon-Shortley phase convention, so that
``exp(-i theta J_y)`` is a real matrix.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import InvalidInputError, NumericalConsistencyError

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10


def max_abs(a) -> float:
    """Max-entry norm."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


def is_hermitian(a, tol=HERMITIAN_TOL) -> bool:
    return max_abs(a - dagger(a)) <= tol


def is_unitary(a, tol=UNITARY_TOL) -> bool:
    a = np.asarray(a)
    return max_abs(dagger(a) @ a - np.eye(a.shape[-1])) <= tol


def as_half_integer(j) -> Fraction:
    """Validate ``j`` as a nonnegative half-integer and return it exactly."""
    try:
        frac = Fraction(j).limit_denominator(4)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"not a number: {j!r}") from exc
    if abs(float(frac) - float(j)) > 1e-12 or (2 * frac).denominator != 1:
        raise InvalidInputError(f"{j!r} is not a half-integer")
    if frac < 0:
        raise InvalidInputError(f"angular momentum must be nonnegative, got {j!r}")
    return frac


@dataclass(frozen=True)
class SpinOperators:
    """Cartesian angular-momentum components ``(x, y, z)``.

    ``j`` is ``None`` for reducible (coupled) representations such as the
    total angular momentum of the orbital x spin space.
    """

    j: Optional[float]
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    @property
    def dim(self) -> int:
        return self.z.shape[0]

    def components(self):
        return self.x, self.y, self.z

    def casimir(self):
        return self.x @ self.x + self.y @ self.y + self.z @ self.z


def spin_operators(j) -> SpinOperators:
    """Angular-momentum matrices for quantum number ``j``.

    Raises InvalidInputError unless ``2j`` is a nonnegative integer.
    """
    jf = as_half_integer(j)
    jv = float(jf)
    dim = int(2 * jf) + 1
    m = -jv + np.arange(dim)
    # <m+1| J+ |m> = sqrt(j(j+1) - m(m+1)), placed one row below the diagonal
    up = np.sqrt(jv * (jv + 1) - m[:-1] * (m[:-1] + 1))
    jp = np.diag(up, k=-1).astype(complex)
    jm = jp.conj().T
    x = 0.5 * (jp + jm)
    y = -0.5j * (jp - jm)
    z = np.diag(m).astype(complex)
    return SpinOperators(jv, x, y, z)


def tensor_embed(a, b, dims=None):
    """Kronecker product ``a (x) b`` with the first factor slowest.

    ``dims`` optionally declares the expected ``(dim_a, dim_b)``.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise InvalidInputError("tensor_embed expects square matrices")
    if dims is not None and (a.shape[0], b.shape[0]) != tuple(dims):
        raise InvalidInputError(
            f"factor dimensions {(a.shape[0], b.shape[0])} do not match declared {tuple(dims)}"
        )
    return np.kron(a, b)


def joint_operators(l) -> SpinOperators:
    """Total angular momentum ``J = L (x) 1 + 1 (x) S`` for orbital ``l`` and spin 1/2."""
    lops = spin_operators(l)
    sops = spin_operators(Fraction(1, 2))
    il = np.eye(lops.dim)
    i2 = np.eye(2)
    comps = [tensor_embed(a, i2) + tensor_embed(il, b)
             for a, b in zip(lops.components(), sops.components())]
    return SpinOperators(None, *comps)


def _exp_diag(diag_values, angle):
    """``exp(-i angle Z)`` for diagonal ``Z``; ``angle`` may be an array."""
    angle = np.asarray(angle, dtype=float)
    phases = np.exp(-1j * angle[..., None] * diag_values)
    return phases


def rotation_operator(ops: SpinOperators, theta, phi):
    """``exp(-i phi Z) exp(-i theta Y) exp(i phi Z)``.

    ``theta`` and ``phi`` may be equal-shaped arrays; the result then carries
    their shape in front of the matrix axes.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    theta, phi = np.broadcast_arrays(theta, phi)
    zdiag = np.real(np.diag(ops.z))
    lam, vec = np.linalg.eigh(ops.y)
    ey = (vec * np.exp(-1j * theta[..., None] * lam)[..., None, :]) @ dagger(vec)
    left = _exp_diag(zdiag, phi)
    return left[..., :, None] * ey * np.conj(left)[..., None, :]


def alt_rotation_operator(ops: SpinOperators, theta, phi):
    """Rotation for the south-pole section: ``U(theta, phi) exp(-2i phi Z)``."""
    u = rotation_operator(ops, theta, phi)
    zdiag = np.real(np.diag(ops.z))
    extra = _exp_diag(zdiag, 2.0 * np.asarray(phi, dtype=float))
    return u * extra[..., None, :]


def matrix_exponential_antihermitian(g, check=True):
    """Exact unitary ``exp(g)`` for anti-Hermitian ``g`` (stacks allowed).

    Uses the eigendecomposition of the Hermitian matrix ``i g``.
    """
    g = np.asarray(g, dtype=complex)
    h = 1j * g
    if check and max_abs(h - dagger(h)) > UNITARY_TOL * max(1.0, max_abs(g)):
        raise InvalidInputError("matrix is not anti-Hermitian")
    h = 0.5 * (h + dagger(h))
    if h.shape[-1] == 1:
        return np.exp(-1j * h)
    if h.shape[-1] == 2:
        return _expm_2x2_hermitian(h)
    lam, vec = np.linalg.eigh(h)
    return (vec * np.exp(-1j * lam)[..., None, :]) @ dagger(vec)


def _expm_2x2_hermitian(h):
    """``exp(-i h)`` for Hermitian 2x2 ``h`` from its analytic eigendecomposition."""
    a, d, b = h[..., 0, 0].real, h[..., 1, 1].real, h[..., 0, 1]
    mean = 0.5 * (a + d)
    half = 0.5 * (a - d)
    r = np.sqrt(half * half + np.abs(b) ** 2)
    c = np.cos(r)
    sinc = np.sinc(r / np.pi)
    phase = np.exp(-1j * mean)
    out = np.empty(h.shape, dtype=complex)
    out[..., 0, 0] = phase * (c - 1j * sinc * half)
    out[..., 1, 1] = phase * (c + 1j * sinc * half)
    out[..., 0, 1] = phase * (-1j * sinc * b)
    out[..., 1, 0] = phase * (-1j * sinc * np.conj(b))
    return out


def ordered_product(mats):
    """``mats[n-1] @ ... @ mats[1] @ mats[0]`` (later factors on the left).

    Evaluated by pairwise reduction so only ``log2(n)`` batched products run.
    """
    mats = np.asarray(mats)
    if mats.shape[0] == 0:
        raise InvalidInputError("empty product")
    while mats.shape[0] > 1:
        n = mats.shape[0]
        paired = mats[1:n - n % 2:2] @ mats[0:n - n % 2:2]
        if n % 2:
            paired = np.concatenate([paired, mats[-1:]], axis=0)
        mats = paired
    return mats[0]


def psd_eigh(rho, neg_tol=1e-12):
    """Eigendecomposition of a Hermitian PSD matrix with tiny negatives clamped."""
    rho = np.asarray(rho, dtype=complex)
    if not is_hermitian(rho, tol=1e-10):
        raise InvalidInputError("density matrix is not Hermitian")
    lam, vec = np.linalg.eigh(0.5 * (rho + dagger(rho)))
    if lam.min() < -neg_tol:
        raise NumericalConsistencyError(
            f"significantly negative eigenvalue {lam.min():.3e}; not a valid state")
    return np.clip(lam, 0.0, None), vec


def sqrt_psd(rho):
    """Principal square root of a Hermitian positive semidefinite matrix."""
    lam, vec = psd_eigh(rho)
    out = (vec * np.sqrt(lam)) @ dagger(vec)
    return 0.5 * (out + dagger(out))


def support_projector(rho, eps=1e-10):
    lam, vec = psd_eigh(rho)
    q = vec[:, lam > eps]
    return q @ dagger(q)


def partial_trace(rho, keep, dims=None):
    """Reduced state of an orbital x spin operator.

    ``keep`` is ``"L"`` or ``"S"``; ``dims`` defaults to ``(d // 2, 2)``.
    """
    rho = np.asarray(rho)
    d = rho.shape[0]
    if dims is None:
        if d % 2:
            raise InvalidInputError(f"dimension {d} does not factor as (2l+1) x 2")
        dims = (d // 2, 2)
    da, db = dims
    if da * db != d:
        raise InvalidInputError(f"dimension {d} does not factor as {da} x {db}")
    r = rho.reshape(da, db, da, db)
    if keep == "L":
        return np.einsum("ajbj->ab", r)
    if keep == "S":
        return np.einsum("iaib->ab", r)
    raise InvalidInputError(f"keep must be 'L' or 'S', got {keep!r}")


def wrap_phase(x):
    """Map angles to the principal branch ``(-pi, pi]``."""
    y = np.mod(np.asarray(x, dtype=float) + np.pi, 2 * np.pi) - np.pi
    y = np.where(y <= -np.pi, y + 2 * np.pi, y)
    return float(y) if np.ndim(y) == 0 else y


def phase_distance(a, b) -> float:
    """Circular distance between two angles."""
    return abs(wrap_phase(a - b))
