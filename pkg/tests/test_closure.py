import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import BUILTIN_SCHEMES, scheme
import reference_systems as ref
from zenoguard.closure import (
    adjoint_generator,
    closure_residual,
    derive_rate_system,
    full_generator_matrix,
    p0_steady,
    prune_indices,
    steady_state,
)
from zenoguard.dynamics import integrate_master_equation
from zenoguard.models import custom_scheme
from zenoguard.operators import outer

rates = st.floats(0, 50)
positive = st.floats(0.1, 50)


def test_adjoint_generator_pauli_z_two_level():
    s = scheme("two_level", xi=1.0)
    sz = np.diag([1.0, -1.0]).astype(complex)
    # i[xi sx, sz] = 2 xi sy
    sy = -1j * (outer(2, 0, 1) - outer(2, 1, 0))
    assert np.allclose(adjoint_generator(s, sz), 2 * sy)


def test_adjoint_generator_of_identity_vanishes():
    for name, dissipative in BUILTIN_SCHEMES:
        s = scheme(name, 1.0, 2.0, 3.0 if dissipative else 0.0)
        assert np.allclose(adjoint_generator(s, np.eye(s.dim)), 0)


def test_adjoint_generator_dimension_mismatch():
    with pytest.raises(ValueError):
        adjoint_generator(scheme("two_level"), np.eye(3))


def test_reference_two_level_closed():
    rs = derive_rate_system(scheme("two_level", xi=1.7))
    labels, m, b = ref.two_level_closed(1.7)
    assert rs.labels == labels
    np.testing.assert_allclose(rs.m, m, atol=1e-12)
    np.testing.assert_allclose(rs.b, b, atol=1e-12)
    assert rs.p0_identity == pytest.approx(0.5)


@pytest.mark.parametrize(
    "name,build,args,omega,gamma",
    [
        ("three_level_chain", ref.three_level_closed, (0.7, 4.0), 4.0, 0.0),
        ("four_level_chain", ref.four_level_closed, (0.7, 4.0), 4.0, 0.0),
        ("two_level", ref.two_level_decay, (0.7, 2.5), 0.0, 2.5),
        ("three_level_chain", ref.three_level_decay, (0.7, 4.0, 2.5), 4.0, 2.5),
        ("four_level_chain", ref.four_level_decay, (0.7, 4.0, 2.5), 4.0, 2.5),
    ],
)
def test_reference_systems(name, build, args, omega, gamma):
    rs = derive_rate_system(scheme(name, 0.7, omega, gamma))
    labels, m, b = build(*args)
    assert rs.labels == labels
    np.testing.assert_allclose(rs.m, m, atol=1e-12)
    np.testing.assert_allclose(rs.b, b, atol=1e-12)


def test_three_level_decay_sigma8_row_from_master_equation():
    # d<s8>/dt at t=0 from the Lindblad equation for a few states
    xi, om, g = 1.0, 2.0, 3.0
    s = scheme("three_level_chain", xi, om, g)
    rs = derive_rate_system(s)
    s8 = np.diag([1, 1, -2]).astype(complex) / np.sqrt(3)
    for level in range(3):
        ts = integrate_master_equation(s, level, np.linspace(0, 1e-4, 3), rtol=1e-12, atol=1e-14, return_states=True)[1]
        deriv = np.trace(s8 @ (ts[1] - ts[0])).real / 5e-5
        expect = np.array([np.trace(outer(3, level, level) @ e).real for e in rs.basis.elements[list(rs.indices)]])
        assert deriv == pytest.approx(rs.m[4] @ expect + rs.b[4], abs=1e-3)
    assert rs.m[4, 4] == pytest.approx(-g)
    assert rs.b[4] == pytest.approx(g / np.sqrt(3))


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(BUILTIN_SCHEMES), rates, rates, rates)
def test_full_basis_closes(case, xi, omega, gamma):
    name, dissipative = case
    s = scheme(name, xi, omega, gamma if dissipative else 0.0)
    rs = derive_rate_system(s, prune=False)
    assert rs.size == s.dim**2 - 1
    assert closure_residual(s, rs) <= 1e-10 * max(1.0, xi, omega, gamma)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(BUILTIN_SCHEMES), positive, rates, rates)
def test_pruned_system_closes(case, xi, omega, gamma):
    name, dissipative = case
    s = scheme(name, xi, omega, gamma if dissipative else 0.0)
    rs = derive_rate_system(s)
    assert closure_residual(s, rs) <= 1e-10 * max(1.0, xi, omega, gamma)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["two_level", "three_level_chain", "four_level_chain"]), rates, rates)
def test_coherent_generator_is_antisymmetric(name, xi, omega):
    _, m, b = full_generator_matrix(scheme(name, xi, omega, 0.0))
    np.testing.assert_allclose(m, -m.T, atol=1e-12 * max(1.0, xi, omega))
    np.testing.assert_allclose(b, 0, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(rates, positive)
def test_two_level_symmetric_part_nonpositive(xi, gamma):
    _, m, _ = full_generator_matrix(scheme("two_level", xi, 0.0, gamma))
    assert np.linalg.eigvalsh((m + m.T) / 2).max() <= 1e-10 * max(1.0, xi, gamma)


@pytest.mark.parametrize("name", ["three_level_chain", "four_level_chain"])
def test_symmetric_part_not_definite_beyond_two_levels(name):
    # the sigma_3 <- sigma_8 feed from decay has no mirror entry, so the
    # Euclidean norm of the coherence vector can grow for d >= 3
    m = derive_rate_system(scheme(name, 0.0, 0.0, 1.0)).m
    top = np.linalg.eigvalsh((m + m.T) / 2).max()
    if name == "three_level_chain":
        assert top == pytest.approx((np.sqrt(4 / 3) - 1) / 2, abs=1e-12)
    assert top > 0.07


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["two_level", "three_level_chain", "four_level_chain"]), rates, rates, positive)
def test_dissipative_generator_is_stable(name, xi, omega, gamma):
    m = derive_rate_system(scheme(name, xi, omega, gamma)).m
    assert np.linalg.eigvals(m).real.max() <= 1e-8 * max(1.0, xi, omega, gamma)


def test_prune_fixed_point():
    m = np.zeros((4, 4))
    m[0, 2] = 1.0
    m[2, 3] = 1e-13
    assert prune_indices(m, [0]) == [0, 2]
    m[2, 3] = 1.0
    assert prune_indices(m, [0]) == [0, 2, 3]


def test_affine_map_outside_span():
    rs = derive_rate_system(scheme("three_level_chain", 1, 2))
    assert rs.affine_map(outer(3, 0, 1) + outer(3, 1, 0)) is None
    c0, c = rs.affine_map(outer(3, 0, 0))
    assert c0 == pytest.approx(1 / 3)


def test_two_level_steady_state():
    rs = derive_rate_system(scheme("two_level", 1.0, 0.0, 10.0))
    assert p0_steady(rs) == pytest.approx(104 / 108, abs=1e-12)


def test_steady_state_singular_without_decay():
    with pytest.raises(np.linalg.LinAlgError):
        steady_state(derive_rate_system(scheme("four_level_chain", 1.0, 2.0)))


def test_custom_scheme_closure():
    h = np.array([[0, 1, 0], [1, 0, 0.5], [0, 0.5, 0.3]], dtype=complex)
    c = np.sqrt(2.0) * outer(3, 0, 2)
    s = custom_scheme(h, [c], name="custom")
    rs = derive_rate_system(s)
    assert closure_residual(s, rs) < 1e-12
