import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gqconc.catalog import (
    Q0_BRACKET,
    TABLE1_K,
    TABLE1_Q,
    TABLE1_VALUES,
    antisymmetric_333,
    family_422,
    family_422_c2,
    family_422_terms,
    ghz_state,
    l_q_bound,
    m_and_mq_422,
    q0_bracket,
    q0_root,
    w_closed_c2,
    w_closed_terms,
    w_state,
    w_table1_value,
    w_tau,
)
from gqconc.measures import concurrence_pure, gq_concurrence_pure, h_q_squared, wootters_concurrence
from gqconc.qcore import PureState, hermitian_spectrum, reduced_state
from gqconc.roof import roof_minimize
from gqconc.measures import CONCURRENCE

# mpmath root of l_q, 40 digits
Q0_REFERENCE = 1.2099384597224072843


def test_w2_is_bell_like():
    psi = w_state(2)
    np.testing.assert_allclose(psi.amplitudes, [0, 1 / math.sqrt(2), 1 / math.sqrt(2), 0], atol=1e-15)
    assert concurrence_pure(psi, [0]) == pytest.approx(1.0, abs=1e-14)


def test_w3_reduced_spectrum():
    np.testing.assert_allclose(hermitian_spectrum(reduced_state(w_state(3), [0])).eigenvalues, [2 / 3, 1 / 3],
                               atol=1e-14)


def test_w8_whole_concurrence():
    assert concurrence_pure(w_state(8), [0]) ** 2 == pytest.approx(0.4375, abs=1e-13)


@pytest.mark.parametrize("n", [3, 5, 8])
@pytest.mark.parametrize("q", [1.3, 1.7, 2.0])
def test_w_closed_forms_match_direct_evaluation(n, q):
    psi = w_state(n)
    for k in range(3, n + 1):
        whole, pair, block = w_closed_terms(n, k, q)
        assert whole == pytest.approx(gq_concurrence_pure(psi, [0], q) ** 2, abs=1e-10)
        c = wootters_concurrence(reduced_state(psi, [0, 1]))
        assert pair == pytest.approx(float(h_q_squared(c * c, q)), abs=1e-10)
        assert w_closed_c2(n, k)["pairwise"] == pytest.approx(c * c, abs=1e-12)
        if k == n:
            assert block == pair


def test_w_closed_block_k_equals_n():
    c2 = w_closed_c2(6, 6)
    assert c2["block"] == c2["pairwise"]


def test_table1_spot_values():
    assert abs(w_table1_value(8, 3, 1.3) - 0.0031) <= 1.5e-4
    assert abs(w_table1_value(8, 5, 1.5) - 0.0295) <= 1.5e-4
    assert abs(w_table1_value(8, 6, 1.6) - 0.0532) <= 1.5e-4
    assert abs(w_table1_value(8, 8, 1.7) - 0.1005) <= 1.5e-4


def test_table1_grid_shape():
    assert len(TABLE1_K) == 6 and len(TABLE1_Q) == 5
    assert all(len(TABLE1_VALUES[k]) == 5 for k in TABLE1_K)


def test_w_tau_subtracts_all_pairwise_terms():
    # definition with k - 2 pairwise terms; k = 3 coincides with the table convention
    assert w_tau(8, 3, 1.5) == w_table1_value(8, 3, 1.5)
    assert w_tau(8, 8, 1.7) == pytest.approx(0.03230, abs=5e-6)
    whole, pair, block = w_closed_terms(8, 8, 1.7)
    assert w_tau(8, 8, 1.7) == pytest.approx(whole - 6 * pair - block, abs=1e-15)


def test_ghz_terms():
    psi = ghz_state(4)
    assert concurrence_pure(psi, [0]) ** 2 == pytest.approx(1.0, abs=1e-14)
    assert wootters_concurrence(reduced_state(psi, [0, 1])) < 1e-12
    block = reduced_state(psi, [0, 2, 3])
    assert roof_minimize(block, CONCURRENCE, (0,)).value < 1e-6


def test_antisymmetric_reductions():
    psi = antisymmetric_333()
    for i in range(3):
        np.testing.assert_allclose(reduced_state(psi, [i]).matrix, np.eye(3) / 3, atol=1e-12)
    assert concurrence_pure(psi, [0]) ** 2 == pytest.approx(4 / 3, abs=1e-14)


def test_l_q_values():
    assert l_q_bound(2.0) == pytest.approx(-1 / 3, abs=1e-15)
    assert l_q_bound(1.2) == pytest.approx(5.7e-4, abs=5e-5)
    assert l_q_bound(1.5) == pytest.approx(-0.072, abs=1e-3)
    with pytest.raises(ValueError):
        l_q_bound(2.5)


def test_q0_root():
    q0 = q0_root(1e-12)
    assert 1.20 < q0 < 1.22
    assert abs(l_q_bound(q0)) < 1e-10
    assert q0 == pytest.approx(Q0_REFERENCE, abs=1e-11)


def test_q0_bracket_halving():
    lo1, hi1 = q0_bracket(1e-6)
    lo2, hi2 = q0_bracket(0.5e-6)
    assert lo1 <= lo2 < hi2 <= hi1
    assert hi2 - lo2 == pytest.approx((hi1 - lo1) / 2, rel=1e-6)
    assert Q0_BRACKET[0] < lo2 and hi2 < Q0_BRACKET[1]
    with pytest.raises(ValueError):
        q0_bracket(0.0)


def test_family_422_theta_zero():
    psi = family_422(0.0)
    expected = np.zeros(16)
    expected[np.ravel_multi_index((1, 1, 0), (4, 2, 2))] = 1 / math.sqrt(2)
    expected[np.ravel_multi_index((3, 1, 1), (4, 2, 2))] = 1 / math.sqrt(2)
    np.testing.assert_allclose(psi.amplitudes, expected, atol=1e-15)


@pytest.mark.parametrize("theta", np.linspace(0, math.pi / 2, 9))
def test_family_422_squared_concurrences(theta):
    psi = family_422(theta)
    c2 = family_422_c2(theta)
    a2, b2 = math.sin(theta) ** 2, math.cos(theta) ** 2
    assert concurrence_pure(psi, [0]) ** 2 == pytest.approx(2 - a2 * a2 - b2 * b2, abs=1e-12)
    assert c2["whole"] == pytest.approx(concurrence_pure(psi, [0]) ** 2, abs=1e-12)
    # rho_AC is a mixture of two Bell-like states on orthogonal supports
    assert c2["AC"] == 1.0


@pytest.mark.parametrize("theta", np.linspace(0.05, math.pi / 2 - 0.05, 5))
@pytest.mark.parametrize("q", [1.1, 1.3, 1.5])
def test_family_422_whole_term_matches_direct(theta, q):
    t = family_422_terms(theta, q)
    assert t["whole"] == pytest.approx(gq_concurrence_pure(family_422(theta), [0], q) ** 2, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(theta=st.floats(0.0, math.pi / 2), ai=st.floats(0.0, 1.0), gamma=st.floats(0.0, 2 * math.pi))
def test_every_ab_decomposition_member_has_the_same_spectrum(theta, ai, gamma):
    a, b = math.sin(theta), math.cos(theta)
    phi1 = np.zeros(8, dtype=complex)
    phi2 = np.zeros(8, dtype=complex)
    phi1[np.ravel_multi_index((0, 0), (4, 2))] = a
    phi1[np.ravel_multi_index((1, 1), (4, 2))] = b
    phi2[np.ravel_multi_index((2, 0), (4, 2))] = a
    phi2[np.ravel_multi_index((3, 1), (4, 2))] = b
    member = ai * phi1 + np.exp(-1j * gamma) * math.sqrt(1 - ai * ai) * phi2
    spec = hermitian_spectrum(reduced_state(PureState(member, (4, 2)), [1])).eigenvalues
    np.testing.assert_allclose(np.sort(spec), np.sort([a * a, b * b]), atol=1e-10)


def test_m_and_mq():
    m, _ = m_and_mq_422(math.pi / 4, 1.25)
    assert m == pytest.approx(-0.5, abs=1e-15)
    for th in np.linspace(0, math.pi / 2, 7):
        assert abs(m_and_mq_422(th, 1.0)[1]) < 1e-12
    grid = [m_and_mq_422(th, q)[1] for th in np.linspace(0, math.pi / 2, 9) for q in np.linspace(1.05, 1.5, 10)]
    assert min(grid) >= -1e-12
    with pytest.raises(ValueError):
        m_and_mq_422(0.3, 1.6)
    with pytest.raises(ValueError):
        family_422(2.0)
