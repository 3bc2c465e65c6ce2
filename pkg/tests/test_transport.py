import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from uhlmann import atom, oracles
from uhlmann.errors import (DegenerateSpectrumError, IntegratorError, InvalidInputError,
                            NumericalConsistencyError)
from uhlmann.linalg import dagger, joint_operators, max_abs, rotation_operator, spin_operators
from uhlmann.paths import (PathSegment, PathSpec, figure_eight, orange_slice, point_path,
                           random_geodesic_path, sample)
from uhlmann.transport import (HolonomyResult, TransportProblem, amplitude_phase,
                               amplitude_phase_from_holonomy, holonomy, holonomy_via_potential,
                               isometry_residual, mixed_state_geometric_phase,
                               parallel_transport_residual, path_ordered_exponential,
                               pure_geometric_phase, sylvester_on_support, transport,
                               transport_rhs, transport_trajectory, vector_potential_L,
                               vector_potential_S, wilson_phase)


def test_rhs_vanishes_without_motion():
    rho, ops = atom.reference_state(2, 0.5, 3.0, "+", "L")
    assert max_abs(transport_rhs(rho, ops, 0.7, 0.2, 0.0, 0.0)) == 0.0


@pytest.mark.parametrize("section", ["north", "south"])
def test_rhs_is_antihermitian(section):
    rho, ops = atom.reference_state(3, -1.5, 13.0, "-", "L")
    r = transport_rhs(rho, ops, 1.1, 0.4, 0.3, -0.7, section)
    assert max_abs(r + dagger(r)) <= 1e-12


def test_rhs_rejects_auto():
    rho, ops = atom.reference_state(1, 0.5, 3.0, "+", "S")
    with pytest.raises(InvalidInputError):
        transport_rhs(rho, ops, 1.0, 0.0, 0.1, 0.1, "auto")


def test_sylvester_maximally_mixed():
    rhs = np.array([[1, 2j], [-2j, 3]])
    g = sylvester_on_support(np.eye(2) / 2, rhs)
    assert max_abs(g - rhs) <= 1e-14


def test_sylvester_rank_deficient(rng):
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    rho = q @ np.diag([0.0, 0.0, 0.3, 0.7]) @ dagger(q)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    sq = q @ np.diag(np.sqrt([0.0, 0.0, 0.3, 0.7])) @ dagger(q)
    rhs = sq @ a @ sq
    g = sylvester_on_support(rho, rhs)
    assert max_abs(g @ rho + rho @ g - rhs) <= 1e-12
    p = q[:, 2:] @ dagger(q[:, 2:])
    assert max_abs(p @ g @ p - g) <= 1e-12
    with pytest.raises(NumericalConsistencyError):
        sylvester_on_support(rho, np.eye(4))


def test_problem_validation():
    rho, ops = atom.reference_state(1, 0.5, 3.0, "+", "L")
    path = orange_slice(0.0, 1.0)
    with pytest.raises(InvalidInputError):
        TransportProblem(2 * rho, ops, path)
    with pytest.raises(InvalidInputError):
        TransportProblem(rho, ops, path, section="east")
    with pytest.raises(InvalidInputError):
        TransportProblem(rho, ops, path, v0=np.eye(3))
    mixed = rotation_operator(ops, 0.5, 0.0) @ rho @ dagger(rotation_operator(ops, 0.5, 0.0))
    with pytest.raises(InvalidInputError):
        TransportProblem(mixed, ops, path)


def test_holonomy_result_rejects_non_isometry():
    with pytest.raises(NumericalConsistencyError):
        HolonomyResult(np.array([[2.0, 0], [0, 1]]), "L", "ode")
    h = HolonomyResult(np.diag([1j, 0.0]), "L", "ode")
    assert h.trace == 1j and h.phase_gamma == pytest.approx(math.pi / 2)
    assert wilson_phase(HolonomyResult(np.diag([1.0, -1.0]), "S", "ode")) is None


def test_point_path_gives_support_projector():
    rho, ops = atom.reference_state(2, 0.5, 3.0, "+", "L")
    h = holonomy(TransportProblem(rho, ops, point_path(0.8, 0.3)))
    u = rotation_operator(ops, 0.8, 0.3)
    p = u @ TransportProblem(rho, ops, point_path(0.8, 0.3)).support_projector @ dagger(u)
    assert max_abs(h.matrix - p) <= 1e-12


@pytest.mark.parametrize("mu,branch", [(1.5, "+"), (-0.5, "-"), (2.5, "+")])
def test_joint_orange_slice_phase(mu, branch):
    e = atom.eigenstate(atom.ModelParams(2, 3.0), mu, branch)
    h = holonomy(TransportProblem(e.projector, joint_operators(2),
                                  orange_slice(0.0, 1.1)))
    assert max_abs(h.matrix - np.exp(-2.2j * mu) * e.projector) <= 1e-9


def test_second_order_convergence():
    rho, ops = atom.reference_state(2, 0.5, 3.0, "+", "L")
    spec = PathSpec((PathSegment.from_points([(0.4, 0.0), (1.2, 0.7), (2.0, 0.3)]),))
    exact = holonomy(TransportProblem(rho, ops, sample(spec, 25600))).matrix
    errs = [max_abs(holonomy(TransportProblem(rho, ops, sample(spec, n))).matrix - exact)
            for n in (100, 200, 400)]
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.1)


def test_integrator_error_reports_history():
    rho, ops = atom.reference_state(2, 0.5, 3.0, "+", "L")
    spec = random_geodesic_path(np.random.default_rng(0), 2)
    with pytest.raises(IntegratorError) as exc:
        holonomy(TransportProblem(rho, ops, spec, steps=4, tol=1e-14, max_doublings=2))
    assert len(exc.value.history) == 2
    with pytest.raises(IntegratorError):
        holonomy(TransportProblem(rho, ops, spec, steps=4, max_doublings=0))


def test_trajectory_and_transport_condition():
    rho, ops = atom.reference_state(2, 0.5, 3.0, "+", "L")
    spec = orange_slice(0.2, 1.0)
    sp = sample(spec, 200)
    prob = TransportProblem(rho, ops, sp)
    vs = transport_trajectory(prob, sp)
    vf, v0 = transport(prob)
    assert max_abs(vs[-1] - vf) <= 1e-12 and max_abs(vs[0] - v0) <= 1e-14
    # V V^dagger tracks the support projector of the rotated state
    assert len(vs) == len(sp.theta)
    for k in (0, 150, 420, len(vs) - 1):
        u = rotation_operator(ops, sp.theta[k], sp.phi[k])
        assert max_abs(vs[k] @ dagger(vs[k]) - u @ prob.support_projector @ dagger(u)) <= 1e-10
    coarse = parallel_transport_residual(prob, sample(spec, 50))
    fine = parallel_transport_residual(prob, sample(spec, 200))
    assert fine < coarse / 3


def test_potential_shapes_and_values():
    a_t, a_p = vector_potential_L(2, 0.5, 3.0, math.pi / 2, 0.0, include_u1=False)
    wc = math.sqrt(6) * math.sqrt(0.6)
    assert abs(a_t[0, 1]) == pytest.approx(wc / 2)
    assert a_p[0, 1] == pytest.approx(wc / 2)
    s_t, s_p = vector_potential_S(2, 0.5, 3.0, np.array([0.3, 1.0]), np.array([0.1, 2.0]))
    assert s_t.shape == (2, 2, 2)
    assert np.allclose(np.trace(s_p, axis1=-2, axis2=-1), 0.0)
    assert max_abs(s_t - dagger(s_t)) <= 1e-15
    with pytest.raises(InvalidInputError):
        vector_potential_S(2, 2.5, 3.0, 0.3, 0.1)


def test_path_ordered_exponential_abelian():
    def pot(t, p):
        z = np.zeros(np.shape(t) + (2, 2), dtype=complex)
        return z, z + np.diag([1.0, -2.0])

    spec = PathSpec((PathSegment.parallel(1.0, 0.0, 0.5), PathSegment.parallel(1.0, 0.5, 1.5)))
    u = path_ordered_exponential(pot, sample(spec, 10))
    assert max_abs(u - np.diag(np.exp([-1.5j, 3j]))) <= 1e-13


@given(st.integers(0, 1000))
def test_pipelines_agree_at_fixed_sampling(seed):
    rng = np.random.default_rng(seed)
    spec = random_geodesic_path(rng, 2)
    l = int(rng.integers(1, 4))
    mu = float(rng.choice([m for m in atom.mu_values(l) if not atom.is_extremal(l, m)]))
    sub = str(rng.choice(["L", "S"]))
    g = float(rng.uniform(0.5, 40))
    sp = sample(spec, 60)
    rho, ops = atom.reference_state(l, mu, g, "+", sub)
    a = holonomy(TransportProblem(rho, ops, sp)).matrix
    b = holonomy_via_potential(sub, l, mu, g, sp).matrix
    assert max_abs(a - b) <= 1e-11


def test_potential_route_rejects():
    with pytest.raises(InvalidInputError):
        holonomy_via_potential("J", 2, 0.5, 3.0, orange_slice(0, 1))
    with pytest.raises(InvalidInputError):
        holonomy_via_potential("L", 2, 2.5, 3.0, orange_slice(0, 1))


def test_sections_and_gauge(rng):
    rho, ops = atom.reference_state(1, 0.5, 3.0, "+", "S")
    spec = random_geodesic_path(rng, 2)
    ref = holonomy(TransportProblem(rho, ops, spec)).matrix
    for sec in ("south", "auto"):
        assert max_abs(holonomy(TransportProblem(rho, ops, spec, section=sec)).matrix - ref) <= 1e-7
    v0 = np.diag([1j, -1.0])
    assert max_abs(holonomy(TransportProblem(rho, ops, spec, v0=v0)).matrix - ref) <= 1e-8


def test_amplitude_phase_routes_agree(rng):
    rho, ops = atom.reference_state(2, -0.5, 3.0, "+", "L")
    spec = random_geodesic_path(rng, 2)
    prob = TransportProblem(rho, ops, spec)
    vf, v0 = transport(prob)
    r0 = prob.state_at(*spec.start)
    r1 = prob.state_at(*spec.end)
    a = amplitude_phase(r0, r1, v0, vf)
    b = amplitude_phase_from_holonomy(r0, r1, vf @ dagger(v0))
    assert a == pytest.approx(b, abs=1e-12)


def test_pure_geometric_phase():
    ops = spin_operators(0.5)
    spec = PathSpec((PathSegment.parallel(1.0, 0.0, 2 * math.pi),))
    sp = sample(spec, 4000)
    psi = rotation_operator(ops, sp.theta, sp.phi)[:, :, 1]  # spin up
    expected = -0.5 * 2 * math.pi * (1 - math.cos(1.0))
    assert pure_geometric_phase(psi) == pytest.approx(expected, abs=1e-6)
    # a gauge change at every node leaves it unchanged
    gauge = np.exp(1j * np.linspace(0, 7, len(psi)))
    gauge[-1] = gauge[0]
    assert pure_geometric_phase(psi * gauge[:, None]) == pytest.approx(expected, abs=1e-6)
    assert pure_geometric_phase(np.array([[1, 0], [1, 1e-3], [0.0, 1.0]])) is None
    with pytest.raises(InvalidInputError):
        pure_geometric_phase(np.array([[1, 0], [0, 1.0]]))


def test_mixed_phase_figure8_and_degenerate():
    rho, ops = atom.reference_state(2, 0.5, 3.0, "+", "L")
    assert mixed_state_geometric_phase(rho, ops, figure_eight(0.1, 2.0), n_per_segment=200) == pytest.approx(0.0, abs=1e-9)
    rho, ops = atom.reference_state(2, -1.5, 3.0, "+", "S")
    with pytest.raises(DegenerateSpectrumError):
        mixed_state_geometric_phase(rho, ops, orange_slice(0.0, 1.0))
    with pytest.raises(InvalidInputError):
        mixed_state_geometric_phase(rho, ops, random_geodesic_path(np.random.default_rng(1), 2))


@pytest.mark.parametrize("omega", [0.4, 2.0, 5.5])
def test_mixed_phase_orange_slice_closed_form(omega):
    l, mu, g = 2, 0.5, 2.5
    loop = orange_slice(0.0, omega / 2)
    for sub, k in (("L", 0), ("S", 1)):
        got = mixed_state_geometric_phase(*atom.reference_state(l, mu, g, "+", sub), loop, n_per_segment=500)
        want = oracles.beta_closed_forms(l, mu, g, "+", omega)[k]
        assert abs(math.remainder(got - want, 2 * math.pi)) <= 1e-7


def test_isometry_residual_of_projector():
    assert isometry_residual(np.diag([1.0, 0.0, 1j])) == 0.0
    assert isometry_residual(np.diag([0.5, 1.0])) > 0.1
