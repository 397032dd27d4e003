import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from cognatephylo.phylo.model import GammaRates, SubstModel2, discretize_gamma, transition_matrix

pis = st.floats(0.01, 0.99)
times = st.floats(0.0, 50.0)


def test_identity_at_zero():
    assert np.array_equal(transition_matrix(0.0, SubstModel2(0.3)), np.eye(2))


def test_stationary_limit():
    m = SubstModel2(0.3)
    p = transition_matrix(1e3, m)
    assert np.allclose(p, [[0.3, 0.7], [0.3, 0.7]], atol=1e-9, rtol=0)


def test_hand_value():
    p = transition_matrix(0.1, SubstModel2(0.5))
    assert SubstModel2(0.5).mu == 2.0
    assert p[0, 1] == pytest.approx(0.5 * (1 - math.exp(-0.2)), abs=1e-9)
    assert p[0, 1] == pytest.approx(0.0906346234, abs=1e-9)


def test_negative_length():
    with pytest.raises(ValueError):
        transition_matrix(-1e-9, SubstModel2())


@pytest.mark.parametrize("pi0", [0.0, 1.0, -0.1])
def test_bad_frequencies(pi0):
    with pytest.raises(ValueError):
        SubstModel2(pi0)


@given(pis, times)
def test_row_stochastic_and_reversible(pi0, t):
    m = SubstModel2(pi0)
    p = transition_matrix(t, m)
    assert np.allclose(p.sum(axis=1), 1.0, atol=1e-12, rtol=0)
    assert abs(m.pi0 * p[0, 1] - m.pi1 * p[1, 0]) <= 1e-12
    assert (p >= 0).all()


@given(pis, st.floats(0.0, 5.0), st.floats(0.0, 5.0))
def test_chapman_kolmogorov(pi0, s, t):
    m = SubstModel2(pi0)
    assert np.allclose(transition_matrix(s, m) @ transition_matrix(t, m), transition_matrix(s + t, m), atol=1e-12)


def test_unit_substitution_rate():
    # expected substitutions per unit time at stationarity: sum_i pi_i q_i = 1
    m = SubstModel2(0.2)
    h = 1e-7
    p = transition_matrix(h, m)
    assert (m.pi0 * p[0, 1] + m.pi1 * p[1, 0]) / h == pytest.approx(1.0, rel=1e-6)


@pytest.mark.parametrize("alpha", [0.1, 0.5, 1.0, 2.0, 10.0])
def test_gamma_mean_one(alpha):
    r = discretize_gamma(alpha, 4)
    assert abs(r.mean() - 1.0) <= 1e-8
    assert (np.diff(r) >= 0).all()
    assert len(r) == 4


def test_gamma_alpha_one_matches_quadrature():
    assert np.allclose(discretize_gamma(1.0, 4), oracles.exponential_category_means(4), atol=1e-6, rtol=0)


def test_gamma_single_category():
    assert discretize_gamma(0.3, 1).tolist() == [1.0]


def test_gamma_concentrated():
    assert np.allclose(discretize_gamma(1e6, 4), 1.0, atol=1e-2)


@pytest.mark.parametrize("alpha, k", [(0.0, 4), (-1.0, 4), (1.0, 0)])
def test_gamma_errors(alpha, k):
    with pytest.raises(ValueError):
        discretize_gamma(alpha, k)


def test_gamma_rates_wrapper():
    assert np.array_equal(GammaRates(0.7).rates, discretize_gamma(0.7, 4))
