"""
Invariant suites run by ``uhlmann validate``.

Each check returns ``(passed, detail)``.  The quick level keeps ``l <= 2``
and runs pipeline-vs-pipeline comparisons on one fixed 500-node-per-segment
sampling, where they must agree to roundoff; checks against closed forms
and the section comparison converge adaptively.  The full level uses
adaptive step doubling throughout, ``l <= 4`` and the sweep grids.
"""

import math
from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from . import atom, figures, oracles
from .linalg import dagger, joint_operators, max_abs, phase_distance, spin_operators
from .paths import figure_eight, orange_slice, random_geodesic_path, sample
from .transport import (TransportProblem, holonomy, holonomy_via_potential,
                        mixed_state_geometric_phase, potential_function)


@dataclass
class Context:
    level: str = "quick"
    seed: int = 0
    fault: float = 0.0  # off-diagonal shift injected into the potential route

    def __post_init__(self):
        self.rng = np.random.default_rng(self.seed)
        self.worst_residual = 0.0

    @property
    def lmax(self):
        return 2 if self.level == "quick" else 4

    def track(self, h):
        self.worst_residual = max(self.worst_residual, h.residual)
        return h

    def path(self, spec):
        return sample(spec, 500) if self.level == "quick" else spec


def _blocks(lmax):
    for l in range(1, lmax + 1):
        for mu in atom.mu_values(l):
            if not atom.is_extremal(l, mu):
                yield l, mu


def check_spin_algebra(ctx):
    worst = 0.0
    for two_j in range(1, 2 * ctx.lmax + 2):
        j = two_j / 2
        o = spin_operators(j)
        worst = max(worst,
                    max_abs(o.x @ o.y - o.y @ o.x - 1j * o.z),
                    max_abs(o.y @ o.z - o.z @ o.y - 1j * o.x),
                    max_abs(o.z @ o.x - o.x @ o.z - 1j * o.y),
                    max_abs(o.casimir() - j * (j + 1) * np.eye(o.dim)))
    return worst <= 1e-12, f"max residual {worst:.2e}"


def check_eigenstates(ctx):
    worst = 0.0
    for l in range(1, ctx.lmax + 1):
        for g in (3.0, 20.0):
            p = atom.ModelParams(l, g)
            h = atom.hamiltonian_z(p)
            for e in atom.eigenstates(p):
                worst = max(worst, max_abs(h @ e.vector - e.energy * e.vector))
    return worst <= 1e-10, f"max |H v - E v| {worst:.2e}"


def check_solid_angle(ctx):
    d = ctx.rng.uniform(0.1, 3.0)
    f8 = figure_eight(0.2, 0.2 + d).loop_integral()
    os_ = orange_slice(0.2, 0.2 + d).loop_integral()
    loop = random_geodesic_path(ctx.rng, 3, closed=True)
    rev = loop.loop_integral() + loop.reversed().loop_integral()
    err = max(abs(f8), abs(os_ - 2 * d), abs(rev))
    return err <= 1e-10, f"max deviation {err:.2e}"


def check_j_oracle(ctx):
    worst = 0.0
    for k in range(3):
        spec = random_geodesic_path(ctx.rng, 2 + k % 2 + (k == 2), closed=(k == 2))
        l = int(ctx.rng.integers(1, ctx.lmax + 1))
        mu = float(ctx.rng.choice(atom.mu_values(l)))
        br = "-" if atom.is_extremal(l, mu) and mu < 0 else "+"
        e = atom.eigenstate(atom.ModelParams(l, 3.0), mu, br)
        h = ctx.track(holonomy(TransportProblem(e.projector, joint_operators(l), spec)))
        worst = max(worst, max_abs(h.matrix - oracles.j_holonomy_closed_form(e, spec)))
    return worst <= 1e-7, f"max deviation {worst:.2e}"


def check_extremal_product(ctx):
    worst = 0.0
    spec = random_geodesic_path(ctx.rng, 3, closed=True)
    for l in range(1, min(ctx.lmax, 3) + 1):
        for sign in "+-":
            mu = (l + 0.5) if sign == "+" else -(l + 0.5)
            hs = {}
            for g in (1.0, 50.0):
                for sub in "LSJ":
                    rho, ops = atom.reference_state(l, mu, g, sign, sub)
                    hs[sub, g] = ctx.track(holonomy(TransportProblem(rho, ops, spec))).matrix
            worst = max(worst, max_abs(hs["J", 1.0] - np.kron(hs["L", 1.0], hs["S", 1.0])),
                        *(max_abs(hs[s, 1.0] - hs[s, 50.0]) for s in "LSJ"))
    return worst <= 1e-7, f"max deviation {worst:.2e}"


def check_method_equivalence(ctx):
    worst = 0.0
    d = 1.3
    opens = [random_geodesic_path(ctx.rng, 2) for _ in range(2)]
    for l, mu in _blocks(ctx.lmax):
        for spec in [figure_eight(0.0, d), orange_slice(0.4, 0.4 + d)] + opens:
            path = ctx.path(spec)
            for sub in "LS":
                rho, ops = atom.reference_state(l, mu, 13.0, "+", sub)
                a = ctx.track(holonomy(TransportProblem(rho, ops, path)))
                pot = potential_function(sub, l, mu, 13.0, offdiag_shift=ctx.fault)
                b = ctx.track(holonomy_via_potential(sub, l, mu, 13.0, path, potential=pot))
                worst = max(worst, max_abs(a.matrix - b.matrix))
    return worst <= 1e-6, f"max deviation {worst:.2e}"


def check_figure8_oracle(ctx):
    worst = 0.0
    for l, mu in _blocks(ctx.lmax):
        p = oracles.Figure8Params(l, mu, 13.0, 0.3, 0.3 + ctx.rng.uniform(0, 2 * math.pi))
        spec = figure_eight(p.phi0, p.phi1)
        for sub, f in (("L", oracles.figure8_L_holonomy), ("S", oracles.figure8_S_holonomy)):
            h = ctx.track(holonomy_via_potential(sub, l, mu, 13.0, ctx.path(spec)))
            worst = max(worst, max_abs(h.matrix - oracles.embed_block(sub, l, mu, f(p))))
    return worst <= 1e-7, f"max deviation {worst:.2e}"


def _random_v0(rng, rho):
    lam, vec = np.linalg.eigh(rho)
    q = vec[:, lam > 1e-10]
    r = q.shape[1]
    z = rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r))
    u, _ = np.linalg.qr(z)
    # v0 = q u w^dagger with w any isometry from C^r into the space
    w, _ = np.linalg.qr(rng.normal(size=(rho.shape[0], r)) + 1j * rng.normal(size=(rho.shape[0], r)))
    return q @ u @ dagger(w)


def check_gauge_invariance(ctx):
    spec = ctx.path(random_geodesic_path(ctx.rng, 2))
    rho, ops = atom.reference_state(2, 0.5, 3.0, "+", "L")
    ref = ctx.track(holonomy(TransportProblem(rho, ops, spec))).matrix
    worst = 0.0
    for _ in range(5):
        v0 = _random_v0(ctx.rng, rho)
        h = ctx.track(holonomy(TransportProblem(rho, ops, spec, v0=v0)))
        worst = max(worst, max_abs(h.matrix - ref))
    return worst <= 1e-8, f"max deviation {worst:.2e}"


def check_section_independence(ctx):
    # sections discretise differently, so this one always converges adaptively
    spec = random_geodesic_path(ctx.rng, 2)
    rho, ops = atom.reference_state(2, -1.5, 20.0, "-", "L")
    hs = [ctx.track(holonomy(TransportProblem(rho, ops, spec, section=s))).matrix
          for s in ("north", "south", "auto")]
    worst = max(max_abs(hs[0] - hs[1]), max_abs(hs[0] - hs[2]))
    return worst <= 1e-7, f"max deviation {worst:.2e}"


def check_beta_sum_rule(ctx):
    worst = 0.0
    for _ in range(3):
        loop = random_geodesic_path(ctx.rng, 3, closed=True)
        omega = loop.loop_integral()
        for l, mu in _blocks(min(ctx.lmax, 3)):
            g = 2.5  # keeps cos(alpha) != 0, where rho would be degenerate
            bl = mixed_state_geometric_phase(*atom.reference_state(l, mu, g, "+", "L"), loop)
            bs = mixed_state_geometric_phase(*atom.reference_state(l, mu, g, "+", "S"), loop)
            if bl is None or bs is None:
                continue
            worst = max(worst, phase_distance(bl + bs, -mu * omega))
    return worst <= 1e-6, f"max deviation {worst:.2e}"


def check_sweep_grids(ctx):
    """Closed-form sign classification against numerical traces on a coarse grid."""
    bad = 0
    total = 0
    d = figures.delta_grid(41)
    for spec in (figures.FIG2, figures.FIG3):
        for g in spec.gs:
            for x in d:
                num = figures.numerical_value(spec, g, x, steps=4)
                ora = figures.oracle_value(spec, g, x)
                total += 1
                if oracles.classify_phase(num.real) != oracles.classify_phase(ora):
                    bad += 1
    return bad == 0, f"{bad}/{total} mismatched cells"


def check_isometry(ctx):
    return ctx.worst_residual <= 1e-8, f"worst residual {ctx.worst_residual:.2e}"


QUICK: List[Callable] = [
    check_spin_algebra, check_eigenstates, check_solid_angle, check_j_oracle,
    check_extremal_product, check_method_equivalence, check_figure8_oracle,
    check_gauge_invariance, check_section_independence, check_beta_sum_rule,
]
FULL: List[Callable] = QUICK + [check_sweep_grids]


def run(level="quick", seed=0, fault=0.0):
    """``[(name, passed, detail)]``; the isometry check runs last over everything produced."""
    ctx = Context(level, seed, fault)
    out = []
    for check in (QUICK if level == "quick" else FULL):
        name = check.__name__[len("check_"):]
        try:
            ok, detail = check(ctx)
        except Exception as exc:  # a crash is a failed invariant, reported not raised
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))
    ok, detail = check_isometry(ctx)
    out.append(("isometry", ok, detail))
    return out
