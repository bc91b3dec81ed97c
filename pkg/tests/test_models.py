import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zenoguard.models import (
    CouplingTerm,
    ModelParams,
    build_model,
    custom_scheme,
    interaction_picture,
    resonant_terms,
    split_hamiltonian,
)
from zenoguard.operators import outer

from conftest import scheme

rates = st.floats(0, 100, allow_nan=False)


def test_two_level_hamiltonian():
    s = scheme("two_level", xi=1.0)
    assert s.dim == 2
    np.testing.assert_array_equal(s.h_int, [[0, 1], [1, 0]])
    assert s.collapse_ops == ()


def test_three_level_collapse_operator():
    s = scheme("three_level_chain", xi=1.0, omega=10.0, gamma=10.0)
    assert len(s.collapse_ops) == 1
    np.testing.assert_allclose(s.collapse_ops[0], np.sqrt(10) * outer(3, 1, 2))


def test_four_level_collapse_operators_equal_rates():
    s = scheme("four_level_chain", xi=1.0, omega=3.0, gamma=2.0)
    np.testing.assert_allclose(s.collapse_ops[0], np.sqrt(2) * outer(4, 1, 2))
    np.testing.assert_allclose(s.collapse_ops[1], np.sqrt(2) * outer(4, 2, 3))
    np.testing.assert_allclose(s.decay_operator, np.diag([0, 0, 2, 2]))


def test_four_level_zero_params():
    s = scheme("four_level_chain")
    s = build_model("four_level_chain", ModelParams(xi=0, omega=0, gamma=0))
    np.testing.assert_array_equal(s.h_int, np.zeros((4, 4)))


def test_unknown_model():
    with pytest.raises(ValueError, match="unknown model"):
        build_model("five_level", ModelParams())


@pytest.mark.parametrize("bad", [{"xi": -1}, {"gamma": float("inf")}, {"omega": float("nan")}])
def test_params_validated(bad):
    with pytest.raises(ValueError):
        ModelParams(**bad)


def test_split_reproduces_h_int():
    s = scheme("four_level_chain", xi=0.7, omega=3.0)
    slow, fast = split_hamiltonian(s)
    np.testing.assert_allclose(slow + fast, s.h_int)
    np.testing.assert_allclose(slow, 0.7 * (outer(4, 0, 1) + outer(4, 1, 0)))


def test_custom_scheme_requires_projector():
    with pytest.raises(ValueError):
        custom_scheme(np.eye(2), p_cs=2 * np.eye(2))
    with pytest.raises(ValueError):
        custom_scheme(outer(2, 0, 1))


@given(st.sampled_from(["two_level", "three_level_chain", "four_level_chain"]), rates, rates, rates)
@settings(max_examples=60, deadline=None)
def test_scheme_invariants(name, xi, omega, gamma):
    s = build_model(name, ModelParams(xi=xi, omega=omega, gamma=gamma))
    assert np.max(np.abs(s.h_int - s.h_int.conj().T)) == 0
    np.testing.assert_allclose(s.p_cs @ s.p_cs, s.p_cs)
    assert abs(s.h_int[0, 0]) == 0
    np.testing.assert_array_equal(s.p_cs @ s.h_int @ s.p_cs, 0)
    for c in s.collapse_ops:
        np.testing.assert_array_equal(c @ c, 0)
    coherent = build_model(name, ModelParams(xi=xi, omega=omega, gamma=0.0))
    np.testing.assert_array_equal(coherent.h_int, s.h_int)


def test_interaction_picture_two_level():
    p = ModelParams(xi=1.0, free_energies=(0.3, 2.9))
    terms = resonant_terms("two_level", p)
    assert terms[0].frequency == pytest.approx(2.6)
    h = interaction_picture(terms, p.free_energies, np.linspace(0, 7, 11))
    np.testing.assert_allclose(h, outer(2, 0, 1) + outer(2, 1, 0), atol=1e-12)


def test_interaction_picture_all_zero():
    terms = [CouplingTerm(0, 1, 0.0, 5.0), CouplingTerm(1, 2, 0.0, -1.0)]
    h = interaction_picture(terms, [0, 1, 7], [0, 0.5, 3.0])
    np.testing.assert_array_equal(h, np.zeros((3, 3)))


def test_interaction_picture_four_level():
    # equally spaced ladder: exp(iH0 t)|j><k|exp(-iH0 t) = exp(i(w_j - w_k)t)|j><k|
    # cancels exp(i(w_k - w_j)t) of every resonant term, leaving the static couplings
    w = (0.0, 1.7, 3.0, 4.3)
    p = ModelParams(xi=0.5, omega=4.0, free_energies=w)
    terms = resonant_terms("four_level_chain", p)
    assert [t.frequency for t in terms] == pytest.approx([1.7, 1.3, 1.3])
    h = interaction_picture(terms, w, np.linspace(0, 10, 17))
    expected = np.zeros((4, 4))
    expected[0, 1] = expected[1, 0] = 0.5
    expected[1, 2] = expected[2, 1] = expected[2, 3] = expected[3, 2] = 4.0
    np.testing.assert_allclose(h, expected, atol=1e-12)
    np.testing.assert_allclose(h, build_model("four_level_chain", p).h_int, atol=1e-12)


def test_interaction_picture_detuned_term_reported():
    terms = [CouplingTerm(0, 1, 1.0, 1.0), CouplingTerm(1, 2, 1.0, 0.5)]
    with pytest.raises(ValueError, match=r"bra=1, ket=2"):
        interaction_picture(terms, [0.0, 1.0, 2.0], np.linspace(0, 3, 5))
