"""
Spin-orbit coupled hydrogen-like atom at the north pole of the field sphere.

The Hamiltonian ``H_n = g n.(L + 2S) + 2 L.S`` evaluated at ``n = z`` splits
into one- and two-dimensional blocks labelled by the ``J_z`` eigenvalue ``mu``.
Within a two-dimensional block spanned by ``e1 = |l, mu-1/2>|+>`` and
``e2 = |l, mu+1/2>|->`` the eigenvectors are::

    psi_+ =  cos(alpha/2) e1 + sin(alpha/2) e2
    psi_- = -sin(alpha/2) e1 + cos(alpha/2) e2

with ``alpha`` in ``[0, pi]``, so ``psi_+`` reduces to ``e1`` as the
entanglement vanishes.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .linalg import joint_operators, partial_trace, spin_operators, tensor_embed

BRANCHES = ("+", "-")


@dataclass(frozen=True)
class ModelParams:
    l: int
    g: float

    def __post_init__(self):
        if int(self.l) != self.l or self.l < 1:
            raise InvalidInputError(f"l must be a positive integer, got {self.l!r}")
        if not math.isfinite(self.g) or abs(self.g) <= 1e-12:
            raise InvalidInputError(f"g must be finite and nonzero, got {self.g!r}")


def check_mu(l, mu) -> float:
    """Validate ``mu`` as a half-odd-integer with ``|mu| <= l + 1/2``."""
    two_mu = 2 * mu
    if abs(two_mu - round(two_mu)) > 1e-12 or round(two_mu) % 2 == 0:
        raise InvalidInputError(f"mu must be a half-odd-integer, got {mu!r}")
    if abs(mu) > l + 0.5 + 1e-12:
        raise InvalidInputError(f"|mu| must not exceed l + 1/2 = {l + 0.5}, got {mu!r}")
    return round(two_mu) / 2.0


def mu_values(l):
    """All ``J_z`` block labels ``-l-1/2, ..., l+1/2``."""
    return [m + 0.5 for m in range(-l - 1, l + 1)]


def is_extremal(l, mu) -> bool:
    return abs(abs(mu) - (l + 0.5)) < 1e-12


def basis_index(l, m, spin_up):
    """Position of ``|l, m>|+/->`` in the joint basis."""
    return int(round(m + l)) * 2 + (1 if spin_up else 0)


def hamiltonian_z(p: ModelParams):
    lops = spin_operators(p.l)
    sops = spin_operators(0.5)
    il, i2 = np.eye(lops.dim), np.eye(2)
    zeeman = p.g * (tensor_embed(lops.z, i2) + 2 * tensor_embed(il, sops.z))
    ls = sum(tensor_embed(a, b) for a, b in zip(lops.components(), sops.components()))
    return zeeman + 2 * ls


def mixing_angle(l, mu, g) -> float:
    """``alpha`` in ``[0, pi]`` with ``cos(alpha) = (2 mu + g) / sqrt(g^2 + 4 g mu + (2l+1)^2)``."""
    disc = g * g + 4 * g * mu + (2 * l + 1) ** 2
    assert disc >= 0.0, "mixing-angle discriminant is negative"
    if disc == 0.0:
        raise InvalidInputError(f"mixing angle undefined at l={l}, mu={mu}, g={g}")
    c = (2 * mu + g) / math.sqrt(disc)
    return math.acos(min(1.0, max(-1.0, c)))


def concurrence(l, mu, g) -> float:
    if is_extremal(l, mu):
        return 0.0
    return abs(math.sin(mixing_angle(l, mu, g)))


def w_factor(l, mu) -> float:
    """``sqrt((l + 1/2)^2 - mu^2)``; only defined for non-extremal blocks."""
    if abs(mu) >= l + 0.5 - 1e-12:
        raise InvalidInputError(f"w is only defined for |mu| < l + 1/2 (got mu={mu}, l={l})")
    return math.sqrt((l + 0.5) ** 2 - mu * mu)


def block_energies(l, mu, g):
    """Analytic ``(E_+, E_-)`` of the two-dimensional ``mu`` block."""
    mean = g * mu - 0.5
    half_gap = 0.5 * math.sqrt(g * g + 4 * g * mu + (2 * l + 1) ** 2)
    return mean + half_gap, mean - half_gap


@dataclass(frozen=True)
class EnergyEigenstate:
    l: int
    mu: float
    branch: str
    vector: np.ndarray
    energy: float
    alpha: float
    concurrence: float
    extremal: bool

    @property
    def projector(self):
        return np.outer(self.vector, self.vector.conj())


def eigenstate(p: ModelParams, mu, branch) -> EnergyEigenstate:
    """The eigenvector of ``H_z`` labelled ``(mu, branch)``."""
    l, g = p.l, p.g
    mu = check_mu(l, mu)
    if branch not in BRANCHES:
        raise InvalidInputError(f"branch must be '+' or '-', got {branch!r}")
    dim = 2 * (2 * l + 1)
    vec = np.zeros(dim, dtype=complex)
    if is_extremal(l, mu):
        # the one-dimensional blocks carry the label matching the sign of mu
        if (mu > 0) != (branch == "+"):
            raise InvalidInputError(f"extremal block mu={mu} only has branch {'+' if mu > 0 else '-'}")
        up = mu > 0
        vec[basis_index(l, l if up else -l, up)] = 1.0
        energy = g * (l + 1) + l if up else -g * (l + 1) + l
        return EnergyEigenstate(l, mu, branch, vec, energy, 0.0, 0.0, True)
    alpha = mixing_angle(l, mu, g)
    c, s = math.cos(alpha / 2), math.sin(alpha / 2)
    i1 = basis_index(l, mu - 0.5, True)
    i2 = basis_index(l, mu + 0.5, False)
    e_plus, e_minus = block_energies(l, mu, g)
    if branch == "+":
        vec[i1], vec[i2], energy = c, s, e_plus
    else:
        vec[i1], vec[i2], energy = -s, c, e_minus
    return EnergyEigenstate(l, mu, branch, vec, energy, alpha, abs(math.sin(alpha)), False)


def eigenstates(p: ModelParams):
    """All ``2(2l+1)`` eigenstates, ordered by ``mu`` then branch ``+, -``."""
    out = []
    for mu in mu_values(p.l):
        if is_extremal(p.l, mu):
            out.append(eigenstate(p, mu, "+" if mu > 0 else "-"))
        else:
            out.extend(eigenstate(p, mu, b) for b in BRANCHES)
    return out


def marginal_state(e: EnergyEigenstate, keep):
    return partial_trace(e.projector, keep)


def reference_state(l, mu, g, branch, subsystem):
    """``(rho_z, ops)`` for subsystem ``"L"``, ``"S"`` or ``"J"``."""
    e = eigenstate(ModelParams(l, g), mu, branch)
    if subsystem == "J":
        return e.projector, joint_operators(l)
    if subsystem == "L":
        return marginal_state(e, "L"), spin_operators(l)
    if subsystem == "S":
        return marginal_state(e, "S"), spin_operators(0.5)
    raise InvalidInputError(f"subsystem must be L, S or J, got {subsystem!r}")


def classical_limit_scan(mu_rule, l_range, g):
    """``[(l, concurrence)]`` along ``mu = mu_rule(l)``."""
    return [(l, concurrence(l, check_mu(l, mu_rule(l)), g)) for l in l_range]
