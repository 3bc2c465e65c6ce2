"""
Closed-form holonomies and phases, used as ground truth for the numerics.

The 2x2 matrices returned by the figure-8 and orange-slice functions live in
the basis of the gauge potentials: ``{|mu-1/2>, |mu+1/2>}`` for the orbital
subsystem and ``{|+>, |->}`` for the spin.  ``embed_block`` places them into
the full subsystem space (both loops start at the north pole where the
rotation operator is the identity).

Undefined phases are ``None`` throughout and propagate through arithmetic.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import atom
from .errors import DegenerateSpectrumError, InvalidInputError
from .linalg import dagger, joint_operators, rotation_operator, spin_operators, wrap_phase
from .paths import PathSpec
from .transport import NODAL_EPS, block_embedding


@dataclass(frozen=True)
class Figure8Params:
    l: int
    mu: float
    g: float
    phi0: float
    phi1: float

    def __post_init__(self):
        atom.ModelParams(self.l, self.g)
        object.__setattr__(self, "mu", atom.check_mu(self.l, self.mu))
        atom.w_factor(self.l, self.mu)

    @property
    def concurrence(self):
        return atom.concurrence(self.l, self.mu, self.g)

    @property
    def chi_L(self):
        return atom.w_factor(self.l, self.mu) * self.concurrence * math.pi

    @property
    def chi_S(self):
        return self.concurrence * math.pi

    @property
    def delta_phi(self):
        return self.phi1 - self.phi0


@dataclass(frozen=True)
class AdditivityReport:
    gamma_J: Optional[float]
    gamma_L: Optional[float]
    gamma_S: Optional[float]
    delta_gamma: Optional[float]
    zeta: float
    xi_L: Optional[float] = None
    xi_S: Optional[float] = None


def phase_sum(*phases):
    """Sum modulo 2 pi; ``None`` if any term is undefined."""
    if any(p is None for p in phases):
        return None
    return wrap_phase(math.fsum(phases))


def classify_phase(value, eps=NODAL_EPS):
    """``0``, ``pi`` or ``None`` for a real trace-like scalar."""
    if value > eps:
        return 0.0
    if value < -eps:
        return math.pi
    return None


# -- J system and extremal blocks ------------------------------------------

def j_holonomy_closed_form(e: atom.EnergyEigenstate, path: PathSpec, integral=None):
    """``exp(-i mu int (1 - cos t) dphi) U_J(end) |psi><psi| U_J(start)^dagger``."""
    jops = joint_operators(e.l)
    (t0, p0), (t1, p1) = path.start, path.end
    if integral is None:
        integral = path.loop_integral()
    u0 = rotation_operator(jops, t0, p0)
    u1 = rotation_operator(jops, t1, p1)
    psi = e.vector
    return np.exp(-1j * e.mu * integral) * (u1 @ np.outer(psi, psi.conj()) @ dagger(u0))


def extremal_holonomies(l, sign, path: PathSpec, integral=None):
    """``(u_L, u_S, u_J)`` for the one-dimensional blocks ``mu = +-(l + 1/2)``.

    Each is a rotated rank-1 projector times ``exp(-+ i m int (1 - cos t) dphi)``
    with ``m = l, 1/2, l + 1/2``; they do not depend on ``g``.
    """
    if sign not in ("+", "-"):
        raise InvalidInputError(f"sign must be '+' or '-', got {sign!r}")
    if int(l) != l or l < 1:
        raise InvalidInputError(f"l must be a positive integer, got {l!r}")
    s = 1 if sign == "+" else -1
    if integral is None:
        integral = path.loop_integral()
    (t0, p0), (t1, p1) = path.start, path.end

    def block(j, m_index, m):
        ops = spin_operators(j)
        v = np.zeros(ops.dim, dtype=complex)
        v[m_index] = 1.0
        u0 = rotation_operator(ops, t0, p0)
        u1 = rotation_operator(ops, t1, p1)
        return np.exp(-1j * m * integral) * (u1 @ np.outer(v, v) @ dagger(u0))

    u_l = block(l, 2 * l if s > 0 else 0, s * l)
    u_s = block(0.5, 1 if s > 0 else 0, s * 0.5)
    return u_l, u_s, np.kron(u_l, u_s)


# -- figure-8 and orange-slice loops -------------------------------------------

def _ab(chi, phi0, phi1):
    c, s = math.cos(chi / 2), math.sin(chi / 2)
    a = np.exp(1j * (phi1 - phi0)) * c * c + s * s
    b = c * s * (np.exp(1j * phi0) - np.exp(1j * phi1))
    return complex(a), complex(b)


def ab_L(p: Figure8Params):
    return _ab(p.chi_L, p.phi0, p.phi1)


def ab_S(p: Figure8Params):
    return _ab(p.chi_S, p.phi0, p.phi1)


def orange_slice_L_holonomy(p: Figure8Params):
    a, b = ab_L(p)
    return np.exp(-2j * p.mu * p.delta_phi) * np.array([[a, b], [-b.conjugate(), a.conjugate()]])


def orange_slice_L_return(p: Figure8Params):
    """The second (reversed) slice of the figure-8 loop."""
    a, b = ab_L(p)
    return np.exp(2j * p.mu * p.delta_phi) * np.array([[a.conjugate(), b], [-b.conjugate(), a]])


def orange_slice_S_holonomy(p: Figure8Params):
    a, b = ab_S(p)
    return np.array([[a.conjugate(), -b.conjugate()], [b, a]])


def orange_slice_S_return(p: Figure8Params):
    a, b = ab_S(p)
    return np.array([[a, -b.conjugate()], [b, a.conjugate()]])


def figure8_L_holonomy(p: Figure8Params):
    a, b = ab_L(p)
    if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > 1e-12:
        raise InvalidInputError("|a|^2 + |b|^2 != 1")
    x = abs(a) ** 2 - abs(b) ** 2
    return np.array([[x, 2 * a.conjugate() * b], [-2 * a * b.conjugate(), x]])


def figure8_S_holonomy(p: Figure8Params):
    a, b = ab_S(p)
    if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > 1e-12:
        raise InvalidInputError("|a|^2 + |b|^2 != 1")
    x = abs(a) ** 2 - abs(b) ** 2
    return np.array([[x, -2 * a * b.conjugate()], [2 * a.conjugate() * b, x]])


def embed_block(subsystem, l, mu, m2):
    """Place a 2x2 potential-basis matrix into the full L or S space."""
    e = block_embedding(subsystem, l, mu)
    return e @ np.asarray(m2) @ dagger(e)


def xi(delta_phi, chi_L):
    """Trace of the figure-8 orbital holonomy."""
    return 2.0 * (math.cos(delta_phi) * math.sin(chi_L) ** 2 + math.cos(chi_L) ** 2)


def figure8_phases(p: Figure8Params):
    """``(gamma_L, gamma_S)`` classified from the traces."""
    return (classify_phase(xi(p.delta_phi, p.chi_L)),
            classify_phase(xi(p.delta_phi, p.chi_S)))


def rotation_decomposition(a, b):
    """``(eta, kappa)`` with ``a / b = tan(eta / 2) exp(-i kappa)``.

    ``eta`` lies in ``[0, pi]``, ``kappa`` in ``(-pi, pi]`` (zero when ``a = 0``).
    """
    a, b = complex(a), complex(b)
    if abs(b) < 1e-14:
        raise DegenerateSpectrumError("b = 0: the holonomy is a pure phase, no rotation axis")
    eta = 2.0 * math.atan2(abs(a), abs(b))
    kappa = 0.0 if abs(a) < 1e-14 else wrap_phase(-np.angle(a / b))
    return eta, kappa


def rotation_from_decomposition(eta, kappa):
    """Rebuild the figure-8 matrix as an explicit rotation in the two-level space.

    With ``sx = |2><1| + h.c.``, ``sy = -i|2><1| + h.c.`` (basis ``|1>, |2>``)
    the matrix is a rotation by ``2 pi - 2 eta`` about the in-plane axis at
    azimuth ``kappa + pi / 2``.
    """
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, 1j], [-1j, 0]], dtype=complex)
    angle = 2 * math.pi - 2 * eta
    az = kappa + math.pi / 2
    n = math.cos(az) * sx + math.sin(az) * sy
    return math.cos(angle / 2) * np.eye(2) - 1j * math.sin(angle / 2) * n


def zeta(delta_phi, chi_L, chi_S):
    """Product of the two SU(2) half-traces over an orange slice (compensated sums)."""
    c = math.cos(delta_phi)
    f_l = math.fsum([math.cos(chi_L / 2) ** 2 * c, math.sin(chi_L / 2) ** 2])
    f_s = math.fsum([math.cos(chi_S / 2) ** 2 * c, math.sin(chi_S / 2) ** 2])
    return f_l * f_s


def orange_slice_phases(l, mu, g, phi0, phi1) -> AdditivityReport:
    p = Figure8Params(l, mu, g, phi0, phi1)
    d = p.delta_phi
    c = math.cos(d)
    f_l = math.fsum([math.cos(p.chi_L / 2) ** 2 * c, math.sin(p.chi_L / 2) ** 2])
    f_s = math.fsum([math.cos(p.chi_S / 2) ** 2 * c, math.sin(p.chi_S / 2) ** 2])
    gamma_j = wrap_phase(-2 * p.mu * d)
    arg_l = classify_phase(f_l)
    gamma_l = phase_sum(gamma_j, arg_l) if arg_l is not None else None
    gamma_s = classify_phase(f_s)
    z = zeta(d, p.chi_L, p.chi_S)
    arg_z = classify_phase(z)
    delta = None if arg_z is None else wrap_phase(-arg_z)
    return AdditivityReport(gamma_j, gamma_l, gamma_s, delta, z, 2 * f_l, 2 * f_s)


# -- mixed-state geometric phases -------------------------------------------

def beta_closed_forms(l, mu, g, branch, omega):
    """``(beta_L, beta_S, beta_J)`` for a loop of solid angle ``omega``.

    Uses the continuous branch ``atan2(cos(alpha) sin(omega/2), cos(omega/2))``;
    ``beta_L``/``beta_S`` are ``None`` where the weighted sum vanishes.
    """
    mu = atom.check_mu(l, mu)
    if branch not in atom.BRANCHES:
        raise InvalidInputError(f"branch must be '+' or '-', got {branch!r}")
    beta_j = wrap_phase(-mu * omega)
    if atom.is_extremal(l, mu):
        s = 1 if mu > 0 else -1
        return wrap_phase(-s * l * omega), wrap_phase(-s * 0.5 * omega), beta_j
    ca = math.cos(atom.mixing_angle(l, mu, g))
    y, x = ca * math.sin(omega / 2), math.cos(omega / 2)
    if math.hypot(x, y) < NODAL_EPS:
        return None, None, beta_j
    sign = 1 if branch == "+" else -1
    t = math.atan2(y, x)
    return wrap_phase(-mu * omega + sign * t), wrap_phase(-sign * t), beta_j


def concurrence_window(l, mu, subsystem):
    """Open interval of concurrence outside which a pi Wilson phase is claimed impossible."""
    w = atom.w_factor(l, atom.check_mu(l, mu))
    if subsystem == "L":
        return 1.0 / (4 * w), 3.0 / (4 * w)
    if subsystem == "S":
        return 0.25, 0.75
    raise InvalidInputError(f"windows exist for L and S only, got {subsystem!r}")
