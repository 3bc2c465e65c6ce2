"""Parameter sweeps over the opening angle of figure-8 and orange-slice loops."""

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import atom, oracles
from .errors import NumericalConsistencyError
from .paths import figure_eight, orange_slice
from .transport import TransportProblem, holonomy


@dataclass(frozen=True)
class SweepSpec:
    name: str
    quantity: str  # "xi" or "zeta"
    l: int
    mu: float
    gs: tuple


FIG2 = SweepSpec("fig2", "xi", 3, 1.5, (3.0, 13.0, 37.0, 50.0))
FIG3 = SweepSpec("fig3", "zeta", 2, 0.5, (3.0, 20.0, 50.0))
SWEEPS = {"fig2": FIG2, "fig3": FIG3}
N_POINTS = 401
SPOT_TOL = 1e-6


def delta_grid(n=N_POINTS):
    return np.linspace(0.0, 2 * math.pi, n)


def oracle_value(spec: SweepSpec, g, delta):
    p = oracles.Figure8Params(spec.l, spec.mu, g, 0.0, float(delta))
    if spec.quantity == "xi":
        return oracles.xi(delta, p.chi_L)
    return oracles.zeta(delta, p.chi_L, p.chi_S)


def sweep(spec: SweepSpec, n=N_POINTS):
    """``(delta, {g: values})`` from the closed forms."""
    d = delta_grid(n)
    return d, {g: np.array([oracle_value(spec, g, x) for x in d]) for g in spec.gs}


def numerical_value(spec: SweepSpec, g, delta, steps=2000):
    """The swept scalar from ODE holonomies alone.

    ``xi`` is the trace of the orbital figure-8 holonomy; ``zeta`` is
    ``Tr U_L Tr U_S / (4 Tr U_J)`` over the orange slice, which strips the
    common U(1) phase.
    """
    def trace(sub, path):
        rho, ops = atom.reference_state(spec.l, spec.mu, g, "+", sub)
        return holonomy(TransportProblem(rho, ops, path, subsystem=sub, steps=steps)).trace

    if spec.quantity == "xi":
        return trace("L", figure_eight(0.0, delta))
    path = orange_slice(0.0, delta)
    return trace("L", path) * trace("S", path) / (4 * trace("J", path))


def spot_check(spec: SweepSpec, n_spots=9, steps=2000):
    """Max deviation between oracle and numerics at ``n_spots`` grid points per g."""
    d = delta_grid()
    picks = np.linspace(0, len(d) - 1, n_spots).round().astype(int)
    worst = 0.0
    for g in spec.gs:
        for k in picks:
            num = numerical_value(spec, g, d[k], steps)
            worst = max(worst, abs(num - oracle_value(spec, g, d[k])))
    return worst


def check_or_raise(spec: SweepSpec, n_spots=9, steps=2000):
    worst = spot_check(spec, n_spots, steps)
    if not worst <= SPOT_TOL:
        raise NumericalConsistencyError(
            f"{spec.name}: numerical spot check deviates by {worst:.3e} (> {SPOT_TOL:g})")
    return worst


def fmt(x) -> str:
    """12 significant digits, or the literal ``undefined``."""
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return "undefined"
    return f"{x:.11e}"


def write_csv(filename, header, rows):
    with open(filename, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])


def sweep_rows(spec: SweepSpec, n=N_POINTS):
    d, cols = sweep(spec, n)
    header = ["delta_phi"] + [f"{spec.quantity}_g{g:g}" for g in spec.gs]
    rows = [[float(d[k])] + [float(cols[g][k]) for g in spec.gs] for k in range(len(d))]
    return header, rows
