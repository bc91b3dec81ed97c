import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import scheme
from zenoguard.analyzer import (
    bright_dark_frame,
    bright_dark_rewrite,
    dynamic_protection,
    effective_hamiltonian,
    fast_generator,
    find_dark_states,
)
from zenoguard.models import split_hamiltonian
from zenoguard.operators import outer

S2 = np.sqrt(2.0)


def test_three_level_has_no_dark_state():
    rep = find_dark_states(scheme("three_level_chain", 1.0, 10.0))
    assert rep.n_dark == 0
    assert rep.protected


def test_four_level_dark_state():
    rep = find_dark_states(scheme("four_level_chain", 1.0, 10.0))
    assert rep.n_dark == 1
    v = rep.kernel_vectors[0]
    expected = np.array([0, 1, 0, -1]) / S2
    assert abs(abs(np.vdot(expected, v)) - 1) < 1e-12
    assert abs(rep.couplings[0, 0]) == pytest.approx(1 / S2, abs=1e-12)
    assert not rep.protected


def test_dark_state_annihilated_by_fast_generator():
    s = scheme("four_level_chain", 1.0, 7.0)
    rep = find_dark_states(s)
    _, h_fast = split_hamiltonian(s)
    g = fast_generator(s, h_fast)
    assert np.max(np.abs(g @ rep.kernel_vectors[0])) < 1e-10


def test_four_level_with_decay_has_no_dark_state():
    rep = find_dark_states(scheme("four_level_chain", 1.0, 10.0, 10.0))
    assert rep.n_dark == 0
    assert rep.protected


def test_two_level_verdicts():
    assert not find_dark_states(scheme("two_level", 1.0)).protected
    assert find_dark_states(scheme("two_level", 1.0, 0.0, 5.0)).protected


def test_degenerate_kernel_is_rotated():
    # omega = 0: the whole outside space is dark, only |1> couples to |0>
    rep = find_dark_states(scheme("four_level_chain", 1.0, 0.0))
    assert rep.n_dark == 3
    assert abs(rep.couplings[0, 0]) == pytest.approx(1.0)
    np.testing.assert_allclose(rep.couplings[1:], 0, atol=1e-12)
    np.testing.assert_allclose(rep.kernel_vectors @ rep.kernel_vectors.conj().T, np.eye(3), atol=1e-12)


def test_inconsistent_split_rejected():
    s = scheme("four_level_chain", 1.0, 3.0)
    h_slow, h_fast = split_hamiltonian(s)
    with pytest.raises(ValueError):
        find_dark_states(s, (h_slow, 2 * h_fast))


def test_custom_split():
    s = scheme("four_level_chain", 1.0, 3.0)
    # with no slow part the dark state survives but nothing feeds it
    rep = find_dark_states(s, (np.zeros_like(s.h_int), s.h_int))
    assert rep.n_dark == 1
    assert rep.protected


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.1, 100), st.floats(0.01, 100), st.floats(0, 2 * np.pi))
def test_kernel_scale_and_phase_invariant(xi, omega, factor, phase):
    base = find_dark_states(scheme("four_level_chain", xi, omega))
    scaled = find_dark_states(scheme("four_level_chain", xi, omega * factor))
    assert base.n_dark == scaled.n_dark == 1
    assert abs(abs(np.vdot(base.kernel_vectors[0], scaled.kernel_vectors[0])) - 1) < 1e-10
    s = scheme("four_level_chain", xi, omega)
    h_slow, h_fast = split_hamiltonian(s)
    ph = np.exp(1j * phase)
    u = np.diag([1, ph, ph, ph])
    rotated = find_dark_states(
        type(s)(name=s.name, dim=4, h_int=u @ s.h_int @ u.conj().T, collapse_ops=(), p_cs=s.p_cs, params=s.params),
        (u @ h_slow @ u.conj().T, u @ h_fast @ u.conj().T),
    )
    assert rotated.n_dark == 1
    assert abs(rotated.couplings[0, 0]) == pytest.approx(abs(base.couplings[0, 0]))


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 50), st.floats(0.01, 10))
def test_decay_kernel_scale_free(omega, factor):
    a = find_dark_states(scheme("four_level_chain", 1.0, omega, omega))
    b = find_dark_states(scheme("four_level_chain", 1.0, omega * factor, omega * factor))
    assert a.n_dark == b.n_dark == 0


@pytest.mark.parametrize("name", ["two_level", "three_level_chain", "four_level_chain"])
def test_effective_hamiltonian_on_ket0_vanishes(name):
    s = scheme(name, 1.0, 5.0)
    np.testing.assert_allclose(effective_hamiltonian(s.h_int, s.p_cs), 0, atol=1e-15)


def test_effective_hamiltonian_examples():
    s = scheme("three_level_chain", 2.0, 5.0)
    p = outer(3, 0, 0) + outer(3, 1, 1)
    expected = 2.0 * (outer(3, 0, 1) + outer(3, 1, 0))
    np.testing.assert_allclose(effective_hamiltonian(s.h_int, p), expected, atol=1e-15)
    np.testing.assert_allclose(effective_hamiltonian(s.h_int, np.eye(3)), s.h_int, atol=1e-15)


def test_effective_hamiltonian_rejects_non_projector():
    s = scheme("three_level_chain", 1.0, 5.0)
    with pytest.raises(ValueError):
        effective_hamiltonian(s.h_int, 0.5 * np.eye(3))
    with pytest.raises(ValueError):
        effective_hamiltonian(s.h_int, np.eye(2))


def test_bright_dark_rewrite_entries():
    h = bright_dark_rewrite(scheme("four_level_chain", 1.0, 10.0))
    assert h[0, 1] == pytest.approx(1 / S2)
    assert h[0, 2] == pytest.approx(1 / S2)
    assert h[2, 3] == pytest.approx(10 * S2)
    assert h[1, 3] == 0
    np.testing.assert_allclose(h, h.conj().T, atol=1e-15)


def test_bright_dark_rewrite_without_leak():
    h = bright_dark_rewrite(scheme("four_level_chain", 0.0, 3.0))
    mask = np.zeros((4, 4), dtype=bool)
    mask[2, 3] = mask[3, 2] = True
    np.testing.assert_allclose(h[~mask], 0, atol=1e-15)


def test_bright_dark_frame_round_trip():
    s = scheme("four_level_chain", 1.3, 4.0)
    u = bright_dark_frame()
    np.testing.assert_allclose(u.conj().T @ u, np.eye(4), atol=1e-15)
    np.testing.assert_allclose(u @ bright_dark_rewrite(s) @ u.conj().T, s.h_int, atol=1e-12)


def test_bright_dark_rewrite_wrong_scheme():
    with pytest.raises(ValueError):
        bright_dark_rewrite(scheme("three_level_chain", 1.0, 2.0))


@pytest.mark.parametrize(
    "name,omega,expect_protected",
    [("two_level", 0.0, False), ("three_level_chain", 10.0, True), ("three_level_chain", 30.0, True), ("four_level_chain", 10.0, False), ("four_level_chain", 100.0, False)],
)
def test_coherent_verdicts_match_dynamics(name, omega, expect_protected):
    s = scheme(name, 1.0, omega)
    assert find_dark_states(s).protected is expect_protected
    check = dynamic_protection(s)
    if expect_protected:
        assert check.min_p0 >= 1 - 10 / omega**2
    else:
        assert check.min_p0 <= 0.2


@pytest.mark.parametrize("name", ["two_level", "three_level_chain", "four_level_chain"])
def test_dissipative_protection_improves_with_drive(name):
    means = []
    for rate in (10.0, 100.0, 1000.0):
        s = scheme(name, 1.0, rate, rate)
        assert find_dark_states(s).protected
        means.append(dynamic_protection(s).mean_p0)
    assert means[0] < means[1] < means[2]
    assert means[2] > 0.98


def test_dynamic_protection_needs_window():
    with pytest.raises(ValueError):
        dynamic_protection(scheme("two_level", 0.0, 0.0, 1.0))
