"""
Uhlmann parallel transport along paths on the field sphere.

Two independent routes to the holonomy are provided:

* ``holonomy``: integrates the transport generator obtained from the
  Sylvester equation ``G rho_z + rho_z G = R`` in the co-rotating frame,
  where ``R`` is built from the spin operators of the subsystem;
* ``holonomy_via_potential``: path-ordered exponential of the explicit
  2x2 gauge potentials of the orbital and spin subsystems.

Both use the one-point (midpoint) Magnus stepper ``V <- exp(G_mid) V``,
which keeps ``V V^dagger`` equal to the support projector at every step.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import atom
from .errors import (DegenerateSpectrumError, IntegratorError, InvalidInputError,
                     NumericalConsistencyError)
from .linalg import (SpinOperators, alt_rotation_operator, dagger, matrix_exponential_antihermitian,
                     max_abs, ordered_product, psd_eigh, rotation_operator, spin_operators,
                     sqrt_psd, wrap_phase)
from .paths import PathSpec, SampledPath, sample

RANK_EPS = 1e-10
NODAL_EPS = 1e-9
ISOMETRY_TOL = 1e-8
SECTIONS = ("north", "south", "auto")
SUBSYSTEMS = ("L", "S", "J")


# -- generator -------------------------------------------------------------

def transport_rhs(rho_z, ops: SpinOperators, theta, phi, dtheta, dphi, section="north"):
    """Right-hand side of the co-rotating transport equation.

    north: ``-2i sqrt(rho) [dphi (1-cos t) Z + dphi sin t (X cos p + Y sin p)
    - dtheta (-X sin p + Y cos p)] sqrt(rho)``; the south section uses the
    patch excluding the north pole, with the sign pattern flipped accordingly.
    """
    sq = sqrt_psd(rho_z)
    x, y, z = ops.components()
    st, ct = math.sin(theta), math.cos(theta)
    sp, cp = math.sin(phi), math.cos(phi)
    if section == "north":
        inner = dphi * (1 - ct) * z + dphi * st * (x * cp + y * sp) - dtheta * (-x * sp + y * cp)
        return -2j * sq @ inner @ sq
    if section == "south":
        inner = dphi * (1 + ct) * z - dphi * st * (x * cp - y * sp) + dtheta * (x * sp + y * cp)
        return 2j * sq @ inner @ sq
    raise InvalidInputError(f"section must be north or south, got {section!r}")


def sylvester_on_support(rho, rhs, eps=RANK_EPS):
    """Solve ``G rho + rho G = rhs`` with ``G`` supported on ``supp(rho)``.

    In the eigenbasis of ``rho``: ``G_ij = rhs_ij / (p_i + p_j)`` for
    ``p_i + p_j > eps`` and zero otherwise.
    """
    lam, vec = psd_eigh(rho)
    r = dagger(vec) @ np.asarray(rhs, dtype=complex) @ vec
    denom = lam[:, None] + lam[None, :]
    keep = denom > eps
    scale = max(1.0, max_abs(r))
    if max_abs(np.where(keep, 0.0, r)) > 1e-10 * scale:
        raise NumericalConsistencyError("right-hand side has weight outside the support of rho")
    g = np.where(keep, r / np.where(keep, denom, 1.0), 0.0)
    return vec @ g @ dagger(vec)


def _rotation(ops, theta, phi, section):
    if section == "north":
        return rotation_operator(ops, theta, phi)
    return alt_rotation_operator(ops, theta, phi)


@dataclass
class _Generators:
    """Support basis ``q`` and the Sylvester images of ``-2i sqrt(rho) X_a sqrt(rho)``."""

    q: np.ndarray
    kx: np.ndarray
    ky: np.ndarray
    kz: np.ndarray

    @classmethod
    def build(cls, rho_z, ops):
        lam, vec = psd_eigh(rho_z)
        q = vec[:, lam > RANK_EPS]
        sq = sqrt_psd(rho_z)
        ks = []
        for a in ops.components():
            k = sylvester_on_support(rho_z, -2j * sq @ a @ sq)
            ks.append(dagger(q) @ k @ q)
        return cls(q, *ks)

    def steps(self, theta, phi, dtheta, dphi, section):
        """Stack of reduced generators ``G_k`` (already multiplied by the step)."""
        st, ct = np.sin(theta), np.cos(theta)
        sp, cp = np.sin(phi), np.cos(phi)
        if section == "north":
            cz = dphi * (1 - ct)
            cx = dphi * st * cp + dtheta * sp
            cy = dphi * st * sp - dtheta * cp
        else:
            cz = -dphi * (1 + ct)
            cx = dphi * st * cp - dtheta * sp
            cy = -dphi * st * sp - dtheta * cp
        return (cx[:, None, None] * self.kx + cy[:, None, None] * self.ky
                + cz[:, None, None] * self.kz)


# -- problems and results --------------------------------------------------

@dataclass
class TransportProblem:
    """Everything needed to transport one reference state along one path.

    ``path`` may be a ``PathSpec`` (sampled adaptively, starting from
    ``steps`` nodes per segment and doubling until successive holonomies
    differ by less than ``tol``) or a fixed ``SampledPath``.
    ``v0`` is the initial partial isometry in the co-rotating frame;
    ``None`` selects the support projector of ``rho_z``.
    """

    rho_z: np.ndarray
    ops: SpinOperators
    path: Union[PathSpec, SampledPath]
    section: str = "north"
    v0: Optional[np.ndarray] = None
    subsystem: str = "?"
    steps: int = 2000
    tol: float = 1e-8
    max_doublings: int = 5
    reparam: Optional[object] = None

    def __post_init__(self):
        self.rho_z = np.asarray(self.rho_z, dtype=complex)
        if self.section not in SECTIONS:
            raise InvalidInputError(f"section must be one of {SECTIONS}, got {self.section!r}")
        lam, vec = psd_eigh(self.rho_z)
        if abs(lam.sum() - 1.0) > 1e-10:
            raise InvalidInputError("reference state must have unit trace")
        if max_abs(self.rho_z @ self.ops.z - self.ops.z @ self.rho_z) > 1e-10:
            raise InvalidInputError("reference state must commute with the z component")
        q = vec[:, lam > RANK_EPS]
        proj = q @ dagger(q)
        if self.v0 is None:
            self.v0 = proj
        self.v0 = np.asarray(self.v0, dtype=complex)
        if max_abs(self.v0 @ dagger(self.v0) - proj) > 1e-10:
            raise InvalidInputError("v0 v0^dagger must equal the support projector of rho_z")

    @property
    def support_projector(self):
        lam, vec = psd_eigh(self.rho_z)
        q = vec[:, lam > RANK_EPS]
        return q @ dagger(q)

    def state_at(self, theta, phi):
        u = rotation_operator(self.ops, theta, phi)
        return u @ self.rho_z @ dagger(u)


def _phase_of(value, eps=NODAL_EPS):
    return None if abs(value) < eps else wrap_phase(np.angle(value))


def isometry_residual(u):
    """Max deviation of ``u^dagger u`` and ``u u^dagger`` from Hermitian idempotents."""
    res = 0.0
    for p in (dagger(u) @ u, u @ dagger(u)):
        res = max(res, max_abs(p @ p - p), max_abs(p - dagger(p)))
    return res


@dataclass
class HolonomyResult:
    """A holonomy matrix with its trace and derived phases.

    ``phase_gamma`` is ``arg Tr`` (``None`` on nodal points).  Construction
    fails if the matrix is not a partial isometry to ``ISOMETRY_TOL``.
    """

    matrix: np.ndarray
    subsystem: str
    method: str
    steps: int = 0
    phase_beta: Optional[float] = None
    trace: complex = field(init=False)
    phase_gamma: Optional[float] = field(init=False)
    residual: float = field(init=False)

    def __post_init__(self):
        self.trace = complex(np.trace(self.matrix))
        self.phase_gamma = _phase_of(self.trace)
        self.residual = isometry_residual(self.matrix)
        if self.residual > ISOMETRY_TOL:
            raise NumericalConsistencyError(
                f"holonomy is not a partial isometry (residual {self.residual:.2e})")


# -- ODE pipeline ------------------------------------------------------------

def _step_sections(theta_mid, section):
    if section == "auto":
        return np.where(theta_mid <= math.pi / 2, "north", "south")
    return np.full(theta_mid.shape, section)


def _transport_sampled(problem: TransportProblem, path: SampledPath):
    """Lab-frame ``(V~_final, V~_0)`` for one fixed sampling."""
    ops = problem.ops
    gens = _Generators.build(problem.rho_z, ops)
    q = gens.q
    th, ph = path.theta, path.phi
    v_tilde = rotation_operator(ops, th[0], ph[0]) @ problem.v0
    v_start = v_tilde.copy()
    for start, stop in path.segment_slices():
        if stop == start:
            continue
        idx = np.arange(start, stop)
        mid_t, mid_p = path.mid_theta[idx], path.mid_phi[idx]
        dth = th[idx + 1] - th[idx]
        dph = ph[idx + 1] - ph[idx]
        secs = _step_sections(mid_t, problem.section)
        # split the segment into runs of constant section
        cuts = [0, *(np.flatnonzero(secs[1:] != secs[:-1]) + 1).tolist(), len(idx)]
        for a, b in zip(cuts[:-1], cuts[1:]):
            sec = str(secs[a])
            g = gens.steps(mid_t[a:b], mid_p[a:b], dth[a:b], dph[a:b], sec)
            expo = matrix_exponential_antihermitian(g, check=False)
            t_run = ordered_product(expo)
            i0, i1 = idx[a], idx[b - 1] + 1
            r0 = _rotation(ops, th[i0], ph[i0], sec)
            r1 = _rotation(ops, th[i1], ph[i1], sec)
            v_tilde = r1 @ q @ t_run @ dagger(q) @ dagger(r0) @ v_tilde
    return v_tilde, v_start


def _adaptive(compute, spec, steps, tol, max_doublings, reparam=None):
    """Step doubling on ``compute(sampled) -> (holonomy_matrix, payload)``."""
    n = steps
    prev_h, _ = compute(sample(spec, n, reparam))
    history = []
    for _ in range(max_doublings):
        n *= 2
        h, payload = compute(sample(spec, n, reparam))
        change = max_abs(h - prev_h)
        history.append((n, change))
        if change < tol:
            return h, payload, n
        prev_h = h
    last = f"last change {history[-1][1]:.3e} at {history[-1][0]} steps/segment" if history else "no refinement"
    raise IntegratorError(
        f"holonomy did not converge to {tol:g} after {max_doublings} doublings ({last})", history)


def transport(problem: TransportProblem):
    """Parallel transport; returns lab-frame ``(v_final, v0)``.

    The holonomy is ``v_final @ v0^dagger``.
    """
    out, _ = _transport_with_steps(problem)
    return out


def _transport_with_steps(problem):
    if isinstance(problem.path, SampledPath):
        vf, v0 = _transport_sampled(problem, problem.path)
        return (vf, v0), problem.path.boundaries[1] - problem.path.boundaries[0]

    def compute(sampled):
        vf, v0 = _transport_sampled(problem, sampled)
        return vf @ dagger(v0), (vf, v0)

    if problem.path.degenerate:
        sampled = sample(problem.path, 2, problem.reparam)
        return _transport_sampled(problem, sampled), 2
    _, payload, n = _adaptive(compute, problem.path, problem.steps, problem.tol,
                              problem.max_doublings, problem.reparam)
    return payload, n


def holonomy(problem: TransportProblem) -> HolonomyResult:
    """``U_uhl = V~_1 V~_0^dagger`` by the Sylvester-generator ODE."""
    (vf, v0), n = _transport_with_steps(problem)
    return HolonomyResult(vf @ dagger(v0), problem.subsystem, "ode", steps=n)


def transport_trajectory(problem: TransportProblem, path: SampledPath):
    """Lab-frame ``V~`` at every node (sequential, north section only)."""
    ops = problem.ops
    gens = _Generators.build(problem.rho_z, ops)
    q = gens.q
    th, ph = path.theta, path.phi
    frames = rotation_operator(ops, th, ph)
    out = [frames[0] @ problem.v0]
    v = problem.v0
    for start, stop in path.segment_slices():
        if start > 0:
            v = dagger(frames[start]) @ out[-1]
            out.append(out[-1])
        idx = np.arange(start, stop)
        g = gens.steps(path.mid_theta[idx], path.mid_phi[idx],
                       th[idx + 1] - th[idx], ph[idx + 1] - ph[idx], "north")
        expo = matrix_exponential_antihermitian(g, check=False)
        for k, e in zip(idx, expo):
            v = q @ e @ dagger(q) @ v
            out.append(frames[k + 1] @ v)
    return np.array(out)


def parallel_transport_residual(problem: TransportProblem, path: SampledPath):
    """Accumulated anti-Hermitian part of ``W_k^dagger W_{k+1}`` along the path.

    Vanishes (to discretisation order) exactly when the amplitudes
    ``W = sqrt(rho) V~`` obey the parallel-transport condition.
    """
    vs = transport_trajectory(problem, path)
    total = 0.0
    prev = None
    for v, t, p in zip(vs, path.theta, path.phi):
        w = sqrt_psd(problem.state_at(t, p)) @ v
        if prev is not None:
            m = dagger(prev) @ w
            total += float(np.linalg.norm(m - dagger(m)))
        prev = w
    return total


# -- gauge-potential pipeline ----------------------------------------------

def _hermitian_offdiag(a, d):
    return a + np.stack([np.stack([np.zeros_like(d), d], -1),
                         np.stack([np.conj(d), np.zeros_like(d)], -1)], -2)


def vector_potential_L(l, mu, g, theta, phi, include_u1=True, offdiag_shift=0.0):
    """Orbital gauge potential ``(a_theta, a_phi)`` in the basis ``{|mu-1/2>, |mu+1/2>}``.

    ``a_theta`` and ``a_phi`` multiply ``dtheta`` and ``dphi``.
    ``offdiag_shift`` perturbs the ``a_theta`` off-diagonal (fault injection).
    """
    wc = atom.w_factor(l, mu) * atom.concurrence(l, mu, g)
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    e = np.exp(1j * phi)
    zero = np.zeros_like(e)
    a_theta = 0.5 * wc * np.stack([np.stack([zero, -1j * e], -1),
                                   np.stack([1j * np.conj(e), zero], -1)], -2)
    if offdiag_shift:
        a_theta = _hermitian_offdiag(a_theta, np.full_like(e, offdiag_shift))
    ct, st = np.cos(theta), np.sin(theta)
    a_phi = 0.5 * np.stack([np.stack([-1 + ct + zero, wc * st * e], -1),
                            np.stack([wc * st * np.conj(e), 1 - ct + zero], -1)], -2)
    if include_u1:
        a_phi = a_phi + (mu * (1 - ct))[..., None, None] * np.eye(2)
    return a_theta, a_phi


def vector_potential_S(l, mu, g, theta, phi, offdiag_shift=0.0):
    """Spin gauge potential ``(a_theta, a_phi)`` in the basis ``{|+>, |->}``; traceless."""
    c = atom.concurrence(l, mu, g)
    atom.w_factor(l, mu)  # rejects extremal blocks
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    e = np.exp(1j * phi)
    zero = np.zeros_like(e)
    a_theta = 0.5 * c * np.stack([np.stack([zero, 1j * np.conj(e)], -1),
                                  np.stack([-1j * e, zero], -1)], -2)
    if offdiag_shift:
        a_theta = _hermitian_offdiag(a_theta, np.full_like(e, offdiag_shift))
    ct, st = np.cos(theta), np.sin(theta)
    a_phi = 0.5 * np.stack([np.stack([1 - ct + zero, c * st * np.conj(e)], -1),
                            np.stack([c * st * e, -1 + ct + zero], -1)], -2)
    return a_theta, a_phi


def _segment_step_products(potential, path: SampledPath):
    """Ordered products ``P exp(-i int A)`` for each segment separately."""
    out = []
    for start, stop in path.segment_slices():
        if stop == start:
            out.append(np.eye(2, dtype=complex))
            continue
        idx = np.arange(start, stop)
        a_t, a_p = potential(path.mid_theta[idx], path.mid_phi[idx])
        dth = (path.theta[idx + 1] - path.theta[idx])[:, None, None]
        dph = (path.phi[idx + 1] - path.phi[idx])[:, None, None]
        expo = matrix_exponential_antihermitian(-1j * (a_t * dth + a_p * dph), check=False)
        out.append(ordered_product(expo))
    return out


def path_ordered_exponential(potential, path: SampledPath):
    """``P exp(-i int A)`` with later steps multiplying on the left.

    ``potential(theta, phi) -> (a_theta, a_phi)`` must accept arrays.
    """
    return ordered_product(np.array(_segment_step_products(potential, path)))


def block_embedding(subsystem, l, mu):
    """Columns: the full-space basis vectors of the 2x2 potential basis."""
    if subsystem == "L":
        d = 2 * l + 1
        e = np.zeros((d, 2), dtype=complex)
        e[int(round(mu - 0.5 + l)), 0] = 1.0
        e[int(round(mu + 0.5 + l)), 1] = 1.0
        return e
    if subsystem == "S":
        # potential basis (|+>, |->) against the ascending spin basis (|->, |+>)
        return np.array([[0, 1], [1, 0]], dtype=complex)
    raise InvalidInputError(f"gauge potentials exist for L and S only, got {subsystem!r}")


def potential_function(subsystem, l, mu, g, offdiag_shift=0.0, include_u1=True):
    if subsystem == "L":
        return lambda t, p: vector_potential_L(l, mu, g, t, p, include_u1, offdiag_shift)
    if subsystem == "S":
        return lambda t, p: vector_potential_S(l, mu, g, t, p, offdiag_shift)
    raise InvalidInputError(f"gauge potentials exist for L and S only, got {subsystem!r}")


def _potential_sampled(ops, emb, potential, path: SampledPath):
    prods = _segment_step_products(potential, path)
    th, ph = path.theta, path.phi
    v = rotation_operator(ops, th[0], ph[0]) @ emb @ dagger(emb)
    v0 = v.copy()
    for (start, stop), t_seg in zip(path.segment_slices(), prods):
        r0 = rotation_operator(ops, th[start], ph[start])
        r1 = rotation_operator(ops, th[stop], ph[stop])
        v = r1 @ emb @ t_seg @ dagger(emb) @ dagger(r0) @ v
    return v @ dagger(v0)


def holonomy_via_potential(subsystem, l, mu, g, path, steps=2000, tol=1e-8,
                           max_doublings=5, potential=None) -> HolonomyResult:
    """Holonomy ``U(end) P exp(-i int A) U^dagger(start)`` embedded in the subsystem space."""
    if subsystem not in ("L", "S"):
        raise InvalidInputError("the potential route covers the L and S subsystems")
    mu = atom.check_mu(l, mu)
    atom.w_factor(l, mu)
    ops = spin_operators(l if subsystem == "L" else 0.5)
    emb = block_embedding(subsystem, l, mu)
    potential = potential or potential_function(subsystem, l, mu, g)

    def compute(sampled):
        h = _potential_sampled(ops, emb, potential, sampled)
        return h, h

    if isinstance(path, SampledPath):
        h, n = compute(path)[0], path.boundaries[1] - path.boundaries[0]
    elif path.degenerate:
        h, n = compute(sample(path, 2))[0], 2
    else:
        h, _, n = _adaptive(compute, path, steps, tol, max_doublings)
    return HolonomyResult(h, subsystem, "potential", steps=n)


# -- phases ------------------------------------------------------------------

def wilson_phase(h: HolonomyResult):
    """``arg Tr U`` in ``(-pi, pi]``; ``None`` when ``|Tr U| < 1e-9``."""
    return _phase_of(np.trace(h.matrix))


def amplitude_phase(rho_start, rho_end, v0, v_final):
    """``arg Tr(W~_0^dagger W~_1)`` with ``W~ = sqrt(rho) V~`` (lab frame)."""
    value = np.trace(dagger(v0) @ sqrt_psd(rho_start) @ sqrt_psd(rho_end) @ v_final)
    return _phase_of(value)


def amplitude_phase_from_holonomy(rho_start, rho_end, u):
    """Same as ``amplitude_phase`` using ``Tr(V0^+ A V1) = Tr(A V1 V0^+)``."""
    return _phase_of(np.trace(sqrt_psd(rho_start) @ sqrt_psd(rho_end) @ u))


def pure_geometric_phase(vectors):
    """Geometric phase of a discretised vector path.

    ``arg <psi_0|psi_N> - sum_k arg <psi_k|psi_k+1>``; ``None`` if the end
    points are orthogonal.
    """
    v = np.asarray(vectors, dtype=complex)
    overlaps = np.einsum("ki,ki->k", v[:-1].conj(), v[1:])
    if np.any(np.abs(overlaps) < NODAL_EPS):
        raise InvalidInputError("consecutive vectors are orthogonal; refine the sampling")
    total = np.vdot(v[0], v[-1])
    if abs(total) < NODAL_EPS:
        return None
    return wrap_phase(np.angle(total) - np.sum(np.angle(overlaps)))


def _eigen_path_phases(rho_z, ops, path: SampledPath):
    lam, vec = psd_eigh(rho_z)
    keep = lam > RANK_EPS
    p, vecs = lam[keep], vec[:, keep]
    if len(p) > 1:
        gaps = np.abs(p[:, None] - p[None, :]) + np.eye(len(p))
        if gaps.min() < 1e-9:
            raise DegenerateSpectrumError(
                "reference state is degenerate on its support; the mixed-state phase "
                "depends on the chosen eigenbasis")
    frames = rotation_operator(ops, path.theta, path.phi)
    betas = []
    for k in range(len(p)):
        betas.append(pure_geometric_phase(frames @ vecs[:, k]))
    return p, betas


def mixed_state_geometric_phase(rho_z, ops, loop, n_per_segment=2000, tol=1e-9, max_doublings=5):
    """``arg sum_k p_k exp(i beta_k)`` over eigenvectors of ``rho_z`` carried around ``loop``.

    ``loop`` is a closed ``PathSpec`` (refined by step doubling until the
    phase changes by less than ``tol``) or a fixed ``SampledPath``.
    """

    def evaluate(sampled):
        p, betas = _eigen_path_phases(rho_z, ops, sampled)
        if any(b is None for b in betas):
            return None
        return complex(np.sum(p * np.exp(1j * np.array(betas))))

    if isinstance(loop, SampledPath):
        if not loop.closed:
            raise InvalidInputError("mixed-state geometric phase needs a closed loop")
        value = evaluate(loop)
        return None if value is None else _phase_of(value)
    if not loop.closed:
        raise InvalidInputError("mixed-state geometric phase needs a closed loop")
    n = n_per_segment
    prev = evaluate(sample(loop, n))
    for _ in range(max_doublings):
        n *= 2
        cur = evaluate(sample(loop, n))
        if prev is None or cur is None:
            return None
        if abs(cur - prev) < tol:
            return _phase_of(cur)
        prev = cur
    raise IntegratorError(f"mixed-state phase did not converge to {tol:g}")
