import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from uhlmann.errors import InvalidInputError, NumericalConsistencyError
from uhlmann.linalg import (alt_rotation_operator, as_half_integer, dagger, is_unitary,
                            joint_operators, matrix_exponential_antihermitian, max_abs,
                            ordered_product, partial_trace, phase_distance, psd_eigh,
                            rotation_operator, spin_operators, sqrt_psd, support_projector,
                            tensor_embed, wrap_phase)

angles = st.floats(0.0, math.pi)
azimuths = st.floats(-2 * math.pi, 2 * math.pi)


def _random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (a + dagger(a))


@given(st.integers(0, 12))
def test_spin_algebra(two_j):
    o = spin_operators(two_j / 2)
    assert o.dim == two_j + 1
    assert max_abs(o.x @ o.y - o.y @ o.x - 1j * o.z) <= 1e-12
    assert max_abs(o.y @ o.z - o.z @ o.y - 1j * o.x) <= 1e-12
    assert max_abs(o.z @ o.x - o.x @ o.z - 1j * o.y) <= 1e-12
    j = two_j / 2
    assert max_abs(o.casimir() - j * (j + 1) * np.eye(o.dim)) <= 1e-12


def test_ascending_basis_and_raising_phase():
    o = spin_operators(1)
    assert np.allclose(np.diag(o.z).real, [-1, 0, 1])
    jp = o.x + 1j * o.y
    # positive real raising elements
    assert jp[1, 0] == pytest.approx(math.sqrt(2))
    assert jp[2, 1] == pytest.approx(math.sqrt(2))
    half = spin_operators(0.5)
    assert np.allclose(half.y, [[0, 0.5j], [-0.5j, 0]])


@pytest.mark.parametrize("bad", [0.3, -1, -0.5, "x", 1.25])
def test_half_integer_rejects(bad):
    with pytest.raises(InvalidInputError):
        as_half_integer(bad)


def test_half_integer_accepts():
    assert as_half_integer(1.5) * 2 == 3
    assert as_half_integer(0) == 0


def test_joint_operators_add():
    j = joint_operators(2)
    l, s = spin_operators(2), spin_operators(0.5)
    assert j.z.shape == (10, 10)
    assert max_abs(j.z - (np.kron(l.z, np.eye(2)) + np.kron(np.eye(5), s.z))) == 0.0
    assert max_abs(j.x @ j.y - j.y @ j.x - 1j * j.z) <= 1e-12


def test_tensor_embed_checks():
    with pytest.raises(InvalidInputError):
        tensor_embed(np.eye(2), np.ones((2, 3)))
    with pytest.raises(InvalidInputError):
        tensor_embed(np.eye(2), np.eye(3), dims=(3, 2))
    assert tensor_embed(np.eye(2), np.eye(3), dims=(2, 3)).shape == (6, 6)


@given(angles, azimuths, st.integers(1, 6))
def test_rotation_maps_z_to_direction(theta, phi, two_j):
    o = spin_operators(two_j / 2)
    u = rotation_operator(o, theta, phi)
    assert is_unitary(u)
    n = (math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta))
    target = n[0] * o.x + n[1] * o.y + n[2] * o.z
    assert max_abs(u @ o.z @ dagger(u) - target) <= 1e-11


def test_rotation_against_expm():
    o = spin_operators(1.5)
    th, ph = 0.7, 2.1
    ref = (scipy.linalg.expm(-1j * ph * o.z) @ scipy.linalg.expm(-1j * th * o.y)
           @ scipy.linalg.expm(1j * ph * o.z))
    assert max_abs(rotation_operator(o, th, ph) - ref) <= 1e-12
    alt = ref @ scipy.linalg.expm(-2j * ph * o.z)
    assert max_abs(alt_rotation_operator(o, th, ph) - alt) <= 1e-12


def test_rotation_broadcasts():
    o = spin_operators(1)
    th = np.linspace(0, 1, 5)
    ph = np.linspace(0, 2, 5)
    stack = rotation_operator(o, th, ph)
    assert stack.shape == (5, 3, 3)
    assert max_abs(stack[3] - rotation_operator(o, th[3], ph[3])) == 0.0


def test_rotation_identity_at_north_pole():
    o = spin_operators(2)
    assert max_abs(rotation_operator(o, 0.0, 1.234) - np.eye(5)) <= 1e-14


@given(st.sampled_from([1, 2, 3, 5]), st.integers(0, 10_000), st.floats(1e-6, 20.0))
def test_exponential_matches_scipy(d, seed, scale):
    rng = np.random.default_rng(seed)
    h = scale * _random_hermitian(rng, d)
    got = matrix_exponential_antihermitian(-1j * h)
    assert max_abs(got - scipy.linalg.expm(-1j * h)) <= 1e-10 * max(1.0, scale)


def test_exponential_stack_and_zero():
    g = np.zeros((4, 2, 2), dtype=complex)
    assert max_abs(matrix_exponential_antihermitian(g) - np.eye(2)) == 0.0
    with pytest.raises(InvalidInputError):
        matrix_exponential_antihermitian(np.ones((2, 2)))


@given(st.integers(1, 17), st.integers(0, 10_000))
def test_ordered_product_is_left_multiplying(n, seed):
    rng = np.random.default_rng(seed)
    mats = rng.normal(size=(n, 3, 3)) + 1j * rng.normal(size=(n, 3, 3))
    ref = np.eye(3)
    for m in mats:
        ref = m @ ref
    assert max_abs(ordered_product(mats) - ref) <= 1e-9 * max(1.0, max_abs(ref))


def test_ordered_product_empty():
    with pytest.raises(InvalidInputError):
        ordered_product(np.zeros((0, 2, 2)))


def test_psd_helpers(rng):
    a = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
    rho = a @ dagger(a)
    rho /= np.trace(rho).real
    r = sqrt_psd(rho)
    assert max_abs(r @ r - rho) <= 1e-12
    p = support_projector(rho)
    assert np.trace(p).real == pytest.approx(2.0)
    assert max_abs(p @ rho - rho) <= 1e-12
    with pytest.raises(NumericalConsistencyError):
        psd_eigh(np.diag([1.0, -0.1]))
    with pytest.raises(InvalidInputError):
        psd_eigh(np.array([[0, 1], [0, 0]]))


def test_partial_trace(rng):
    a = _random_hermitian(rng, 3)
    b = _random_hermitian(rng, 2)
    rho = np.kron(a, b)
    assert max_abs(partial_trace(rho, "L") - a * np.trace(b)) <= 1e-12
    assert max_abs(partial_trace(rho, "S") - b * np.trace(a)) <= 1e-12
    with pytest.raises(InvalidInputError):
        partial_trace(np.eye(3), "L")
    with pytest.raises(InvalidInputError):
        partial_trace(np.eye(4), "Q")


@given(st.floats(-1e3, 1e3))
def test_wrap_phase_range(x):
    y = wrap_phase(x)
    assert -math.pi < y <= math.pi
    assert abs(math.remainder(x - y, 2 * math.pi)) <= 1e-9


def test_wrap_phase_edges():
    assert wrap_phase(-math.pi) == pytest.approx(math.pi)
    assert wrap_phase(3 * math.pi) == pytest.approx(math.pi)
    assert phase_distance(math.pi - 1e-3, -math.pi + 1e-3) == pytest.approx(2e-3)
