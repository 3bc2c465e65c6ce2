import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from uhlmann import atom, oracles
from uhlmann.errors import DegenerateSpectrumError, InvalidInputError
from uhlmann.linalg import joint_operators, max_abs, phase_distance
from uhlmann.paths import PathSegment, PathSpec, figure_eight, orange_slice, random_geodesic_path
from uhlmann.transport import TransportProblem, holonomy, holonomy_via_potential

blocks = st.sampled_from([(l, mu) for l in range(1, 5) for mu in atom.mu_values(l)
                          if not atom.is_extremal(l, mu)])
gs = st.floats(0.3, 60.0)
deltas = st.floats(0.0, 2 * math.pi)


def test_frozen_values():
    assert oracles.xi(0.0, 1.234) == pytest.approx(2.0)
    assert oracles.xi(math.pi, 0.3) == pytest.approx(2 * math.cos(0.6))
    assert oracles.zeta(math.pi, math.pi, math.pi / 3) == pytest.approx(-0.5)
    assert oracles.zeta(0.0, 0.4, 2.2) == pytest.approx(1.0)
    lo, hi = oracles.concurrence_window(2, 0.5, "L")
    assert (lo, hi) == pytest.approx((1 / (4 * math.sqrt(6)), 3 / (4 * math.sqrt(6))))
    assert oracles.concurrence_window(2, 0.5, "S") == (0.25, 0.75)
    with pytest.raises(InvalidInputError):
        oracles.concurrence_window(2, 0.5, "J")


def test_beta_closed_form_example():
    # cos(alpha) = 4 / sqrt(40) at l=2, mu=1/2, g=3
    bl, bs, bj = oracles.beta_closed_forms(2, 0.5, 3.0, "+", math.pi / 2)
    assert bs == pytest.approx(-math.atan(4 / math.sqrt(40)))
    assert bl == pytest.approx(-math.pi / 4 + math.atan(4 / math.sqrt(40)))
    assert bj == pytest.approx(-math.pi / 4)
    # nodal point: g = -2 mu makes cos(alpha) vanish, and omega = pi
    assert oracles.beta_closed_forms(2, -1.5, 3.0, "+", math.pi)[:2] == (None, None)
    assert oracles.beta_closed_forms(1, -0.5, 2.5, "-", 0.0)[:2] == (0.0, 0.0)


@given(blocks, gs, st.sampled_from("+-"), st.floats(-12.0, 12.0))
def test_beta_sum_rule_closed_form(block, g, branch, omega):
    l, mu = block
    bl, bs, bj = oracles.beta_closed_forms(l, mu, g, branch, omega)
    if bl is None:
        return
    assert phase_distance(bl + bs, bj) <= 1e-12
    assert phase_distance(bj, -mu * omega) <= 1e-12


def test_extremal_equator_phases():
    equator = PathSpec((PathSegment.parallel(math.pi / 2, 0.0, 2 * math.pi),))
    u_l, u_s, u_j = oracles.extremal_holonomies(1, "+", equator)
    assert np.trace(u_l) == pytest.approx(1.0)
    assert np.trace(u_s) == pytest.approx(-1.0)
    assert np.trace(u_j) == pytest.approx(-1.0)
    with pytest.raises(InvalidInputError):
        oracles.extremal_holonomies(1, "0", equator)


@given(blocks, gs, deltas, st.floats(-math.pi, math.pi))
def test_figure8_matrices_are_real_trace_su2(block, g, d, phi0):
    p = oracles.Figure8Params(*block, g, phi0, phi0 + d)
    for f, chi in ((oracles.figure8_L_holonomy, p.chi_L), (oracles.figure8_S_holonomy, p.chi_S)):
        m = f(p)
        assert max_abs(m.conj().T @ m - np.eye(2)) <= 1e-12
        assert np.linalg.det(m) == pytest.approx(1.0, abs=1e-12)
        assert np.trace(m) == pytest.approx(oracles.xi(d, chi), abs=1e-12)


@given(blocks, gs, deltas)
def test_figure8_is_product_of_slices(block, g, d):
    p = oracles.Figure8Params(*block, g, 0.3, 0.3 + d)
    m = oracles.orange_slice_L_return(p) @ oracles.orange_slice_L_holonomy(p)
    assert max_abs(m - oracles.figure8_L_holonomy(p)) <= 1e-12
    m = oracles.orange_slice_S_return(p) @ oracles.orange_slice_S_holonomy(p)
    assert max_abs(m - oracles.figure8_S_holonomy(p)) <= 1e-12


@given(blocks, gs, st.floats(0.05, 2 * math.pi - 0.05))
def test_rotation_decomposition_round_trip(block, g, d):
    p = oracles.Figure8Params(*block, g, 0.0, d)
    a, b = oracles.ab_L(p)
    if abs(b) < 1e-6:
        return
    eta, kappa = oracles.rotation_decomposition(a, b)
    assert 0.0 <= eta <= math.pi
    assert max_abs(oracles.rotation_from_decomposition(eta, kappa) - oracles.figure8_L_holonomy(p)) <= 1e-9


def test_rotation_decomposition_degenerate():
    with pytest.raises(DegenerateSpectrumError):
        oracles.rotation_decomposition(1.0, 0.0)
    assert oracles.rotation_decomposition(0.0, 1.0) == (0.0, 0.0)


@given(blocks, gs, deltas)
def test_additivity_report_consistent(block, g, d):
    r = oracles.orange_slice_phases(*block, g, 0.1, 0.1 + d)
    if r.delta_gamma is None or r.gamma_L is None:
        return
    assert phase_distance(r.delta_gamma, r.gamma_J - r.gamma_L - r.gamma_S) <= 1e-9
    assert r.delta_gamma in (0.0, math.pi)


def test_phase_helpers():
    assert oracles.phase_sum(1.0, None) is None
    assert oracles.phase_sum(3.0, 3.0) == pytest.approx(6.0 - 2 * math.pi)
    assert oracles.classify_phase(0.5) == 0.0
    assert oracles.classify_phase(-0.5) == math.pi
    assert oracles.classify_phase(1e-12) is None


def test_j_closed_form_against_ode():
    rng = np.random.default_rng(7)
    spec = random_geodesic_path(rng, 2)
    e = atom.eigenstate(atom.ModelParams(2, 3.0), -0.5, "-")
    h = holonomy(TransportProblem(e.projector, joint_operators(2), spec))
    assert max_abs(h.matrix - oracles.j_holonomy_closed_form(e, spec)) <= 1e-7


@pytest.mark.parametrize("l,mu,g,d", [(3, 1.5, 3.0, 2.5), (2, 0.5, 20.0, 1.0), (1, -0.5, 0.7, 4.0)])
def test_closed_forms_against_potential_route(l, mu, g, d):
    p = oracles.Figure8Params(l, mu, g, 0.2, 0.2 + d)
    f8 = figure_eight(p.phi0, p.phi1)
    os_ = orange_slice(p.phi0, p.phi1)
    pairs = (("L", f8, oracles.figure8_L_holonomy), ("S", f8, oracles.figure8_S_holonomy),
             ("L", os_, oracles.orange_slice_L_holonomy), ("S", os_, oracles.orange_slice_S_holonomy))
    for sub, path, f in pairs:
        h = holonomy_via_potential(sub, l, mu, g, path, steps=50)
        assert max_abs(h.matrix - oracles.embed_block(sub, l, mu, f(p))) <= 1e-10
