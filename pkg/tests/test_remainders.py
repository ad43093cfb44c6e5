"""Asymptotic remainders phi_{n,m}: oracle values, identities, decay, signs."""

from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmdeg import (
    ElementaryForm,
    InvalidIndex,
    InvalidSpec,
    NonPositiveArgument,
    PrecisionPolicy,
    RemainderSpec,
    asymptotic_partial_sum,
    bernoulli,
    differentiate,
    evaluate_form,
    log_gamma,
    phi_derivatives,
    pole_order,
    q_derivative,
    q_value,
    remainder_value,
)

POLICY = PrecisionPolicy(working_bits=128)
TOL = POLICY.abs_error_target

# Apery's constant zeta(3), frozen to 50 digits (standard reference value)
ZETA3_50 = "1.2020569031595942853997381615114499907649862923405"

Q = RemainderSpec(special="Q")


def mpf_frac(q):
    q = Fraction(q)
    return mp.mpf(q.numerator) / q.denominator


def test_q_at_one_equals_pi_squared_over_six_minus_49_30():
    with mp.workprec(200):
        expected = mp.pi**2 / 6 - mpf_frac(Fraction(49, 30))
        assert abs(q_value(1, POLICY) - expected) < TOL
    # frozen decimal prefix
    assert mp.nstr(q_value(1, POLICY), 30) == "0.0116007335148931031390818333127"


def test_q_derivative_at_one_uses_apery_constant():
    # Q'(1) = psi''(1) + 7/3 = -2 zeta(3) + 7/3
    with mp.workprec(200):
        expected = -2 * mp.mpf(ZETA3_50) + mpf_frac(Fraction(7, 3))
        assert abs(q_derivative(1, 1, POLICY) - expected) < TOL


@pytest.mark.parametrize("t", ["0.25", 1, 7])
def test_q_derivative_order_zero_matches_q_value(t):
    with mp.workprec(200):
        assert abs(q_derivative(0, t, POLICY) - q_value(t, POLICY)) < 2 * TOL


@pytest.mark.parametrize("t", ["0.001", "0.5", 1, 10, 10000])
def test_phi_2_2_is_q(t):
    # the (n, m) = (2, 2) member coincides with Q
    with mp.workprec(300):
        family = remainder_value(RemainderSpec(n=2, m=2), t, POLICY)
        direct = q_value(t, POLICY)
        assert abs(family - direct) < mp.mpf(2) ** (-120)


@pytest.mark.parametrize("t", [1, "3.5"])
def test_alias_special_matches_family_member(t):
    a = remainder_value(RemainderSpec(special="Q-alias"), t, POLICY)
    b = remainder_value(RemainderSpec(n=2, m=2), t, POLICY)
    assert a == b


@pytest.mark.parametrize("n", [0, 1, 2, 3, 4])
@pytest.mark.parametrize("t", [Fraction(1, 2), 2, 30])
def test_remainder_against_direct_stirling_difference(n, t):
    # R_n = (-1)^n [ln Gamma(t) - S_n(t)] assembled here from scratch
    with mp.workprec(300):
        tv = mpf_frac(t)
        s_n = (tv - mp.mpf(1) / 2) * mp.log(tv) - tv + mp.log(2 * mp.pi) / 2
        for k in range(1, n + 1):
            coeff = bernoulli(2 * k) / (2 * k * (2 * k - 1))
            s_n += mpf_frac(coeff) * tv ** (1 - 2 * k)
        expected = (-1) ** n * (mp.loggamma(tv) - s_n)
        value = remainder_value(RemainderSpec(n=n, m=0), t, POLICY)
        assert abs(value - expected) < 16 * TOL


@pytest.mark.parametrize("n", [0, 1, 2, 3, 4, 5, 6])
@pytest.mark.parametrize("t", [Fraction(1, 2), 1, 3, 10])
def test_telescoping_identity(n, t):
    # R_n(t) + R_{n+1}(t) = (-1)^n B_{2n+2} / ((2n+2)(2n+1) t^(2n+1))
    with mp.workprec(300):
        lhs = remainder_value(RemainderSpec(n=n, m=0), t, POLICY) + remainder_value(
            RemainderSpec(n=n + 1, m=0), t, POLICY
        )
        rhs = (-1) ** n * bernoulli(2 * n + 2) / (
            (2 * n + 2) * (2 * n + 1) * Fraction(t) ** (2 * n + 1)
        )
        assert abs(lhs - mpf_frac(rhs)) < 8 * TOL


def test_telescoping_specific_value():
    # n = 1, t = 2: R_1(2) + R_2(2) = 1/2880
    with mp.workprec(200):
        total = remainder_value(RemainderSpec(n=1, m=0), 2, POLICY) + remainder_value(
            RemainderSpec(n=2, m=0), 2, POLICY
        )
        assert abs(total - mpf_frac(Fraction(1, 2880))) < 8 * TOL


def test_r0_at_50_below_classical_bound():
    # 0 < R_0(t) < 1/(12 t)
    value = remainder_value(RemainderSpec(n=0, m=0), 50, POLICY)
    assert 0 < value < mpf_frac(Fraction(1, 600))


def test_q_large_t_decay_rate():
    # Q(t) ~ 1/(42 t^7): first omitted Stirling term differentiated twice
    with mp.workprec(200):
        t = mp.mpf(100)
        scaled = 42 * t**7 * q_value(100, POLICY)
        assert abs(scaled - 1) < mp.mpf("0.01")


@pytest.mark.parametrize("n, m", [(0, 0), (1, 1), (2, 2), (3, 2)])
def test_scaled_decay_stays_bounded(n, m):
    # |phi_{n,m}(t)| * t^(2n+m+1) stays below twice its limiting constant
    spec = RemainderSpec(n=n, m=m)
    limit = abs(bernoulli(2 * n + 2)) / ((2 * n + 2) * (2 * n + 1))
    for i in range(m):
        limit *= 2 * n + 1 + i
    with mp.workprec(300):
        for t in (10, 100, 10000):
            scaled = abs(remainder_value(spec, t, POLICY)) * mp.mpf(t) ** (2 * n + m + 1)
            assert 0 < scaled < 2 * mpf_frac(limit)


@pytest.mark.parametrize("n", [0, 1, 2, 3])
@pytest.mark.parametrize("m", [0, 1, 2])
@pytest.mark.parametrize("t", ["0.01", 1, 100])
def test_members_positive_on_samples(n, m, t):
    assert remainder_value(RemainderSpec(n=n, m=m), t, POLICY) > 0


@pytest.mark.parametrize("name", ["Q", "PsiGap", "TrigammaGap3"])
@pytest.mark.parametrize("t", ["0.01", 1, 100])
def test_specials_positive_on_samples(name, t):
    assert remainder_value(RemainderSpec(special=name), t, POLICY) > 0


def test_partial_sum_values():
    with mp.workprec(200):
        # S_0(1) = -1 + ln(2 pi)/2
        s0 = asymptotic_partial_sum(0, 0, 1, POLICY)
        assert abs(s0 - (mp.log(2 * mp.pi) / 2 - 1)) < TOL
        # S_2''(1) = 1 + 1/2 + 1/6 - 1/30 = 49/30
        s2 = asymptotic_partial_sum(2, 2, 1, POLICY)
        assert abs(s2 - mpf_frac(Fraction(49, 30))) < TOL
        # S_1'(2) = ln 2 - 13/48
        s1 = asymptotic_partial_sum(1, 1, 2, POLICY)
        assert abs(s1 - (mp.log(2) - mpf_frac(Fraction(13, 48)))) < TOL


def test_partial_sum_plus_remainder_reconstructs_log_gamma():
    with mp.workprec(300):
        for n in (0, 2, 5):
            for t in (Fraction(1, 4), 2, 40):
                total = asymptotic_partial_sum(n, 0, t, POLICY) + (
                    -1
                ) ** n * remainder_value(RemainderSpec(n=n, m=0), t, POLICY)
                assert abs(total - log_gamma(t, POLICY)) < 16 * TOL


@given(
    n=st.integers(min_value=0, max_value=6),
    t=st.fractions(
        min_value=Fraction(1, 20), max_value=Fraction(50), max_denominator=64
    ),
)
@settings(max_examples=20, deadline=None)
def test_partial_sum_plus_remainder_property(n, t):
    with mp.workprec(300):
        total = asymptotic_partial_sum(n, 0, t, POLICY) + (-1) ** n * remainder_value(
            RemainderSpec(n=n, m=0), t, POLICY
        )
        assert abs(total - log_gamma(t, POLICY)) < 16 * TOL


def test_trigamma_gap_matches_family_member():
    # TrigammaGap3 is phi_{1,2}
    for t in ("0.5", 3):
        a = remainder_value(RemainderSpec(special="TrigammaGap3"), t, POLICY)
        b = remainder_value(RemainderSpec(n=1, m=2), t, POLICY)
        assert abs(a - b) < mp.mpf(2) ** (-120)


def test_psi_gap_matches_family_member():
    # PsiGap is phi_{0,1}
    for t in ("0.5", 3):
        a = remainder_value(RemainderSpec(special="PsiGap"), t, POLICY)
        b = remainder_value(RemainderSpec(n=0, m=1), t, POLICY)
        assert abs(a - b) < mp.mpf(2) ** (-120)


def test_phi_derivatives_match_q_derivatives():
    ders = phi_derivatives(RemainderSpec(n=2, m=2), 1, 3, POLICY)
    with mp.workprec(200):
        for j, value in enumerate(ders):
            assert abs(value - q_derivative(j, 1, POLICY)) < mp.mpf(2) ** (-118)


def test_pole_orders():
    assert pole_order(RemainderSpec(n=0, m=0)) == 0
    assert pole_order(RemainderSpec(n=0, m=3)) == 3
    assert pole_order(RemainderSpec(n=1, m=2)) == 3
    assert pole_order(RemainderSpec(n=2, m=2)) == 5
    assert pole_order(RemainderSpec(n=3, m=1)) == 6
    assert pole_order(RemainderSpec(special="Q")) == 5
    assert pole_order(RemainderSpec(special="PsiGap")) == 1
    assert pole_order(RemainderSpec(special="TrigammaGap3")) == 3


def test_spec_labels_and_indices():
    assert RemainderSpec(n=1, m=2).label == "phi(1,2)"
    assert RemainderSpec(special="Q").label == "Q"
    assert RemainderSpec(special="Q").family_indices == (2, 2)
    assert RemainderSpec(special="PsiGap").family_indices == (0, 1)
    assert RemainderSpec(n=4, m=0).family_indices == (4, 0)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n": 9, "m": 0},
        {"n": 0, "m": 7},
        {"n": -1, "m": 0},
        {"n": 1.5, "m": 0},
        {"n": 2},
        {"m": 2},
        {},
        {"special": "Quux"},
        {"n": 2, "m": 2, "special": "Q"},
    ],
)
def test_invalid_specs_rejected(kwargs):
    with pytest.raises(InvalidSpec):
        RemainderSpec(**kwargs)


@pytest.mark.parametrize("t", [0, -1, "-2.5"])
def test_nonpositive_argument_rejected(t):
    with pytest.raises(NonPositiveArgument):
        remainder_value(Q, t, POLICY)
    with pytest.raises(NonPositiveArgument):
        q_value(t, POLICY)


def test_invalid_derivative_indices_rejected():
    with pytest.raises(InvalidIndex):
        phi_derivatives(Q, 1, -1, POLICY)
    with pytest.raises(InvalidIndex):
        q_derivative(-1, 1, POLICY)
    with pytest.raises(InvalidSpec):
        asymptotic_partial_sum(9, 0, 1, POLICY)
    with pytest.raises(InvalidSpec):
        asymptotic_partial_sum(0, 7, 1, POLICY)


def test_differentiate_power_and_log_rules():
    form = ElementaryForm(powers={2: Fraction(3)}, log=Fraction(1), tlog=Fraction(2))
    d = differentiate(form)
    # d/dt [3 t^2 + ln t + 2 t ln t] = 6 t + 1/t + 2 ln t + 2
    assert d.powers == {1: Fraction(6), -1: Fraction(1)}
    assert d.log == Fraction(2)
    assert d.const == Fraction(2)
    assert d.tlog == 0


def test_differentiate_gamma_tower():
    form = ElementaryForm(loggamma=Fraction(1))
    d1 = differentiate(form)
    assert d1.psi == {0: Fraction(1)} and d1.loggamma == 0
    d2 = differentiate(d1)
    assert d2.psi == {1: Fraction(1)}


def test_evaluate_pure_rational_form():
    form = ElementaryForm(powers={-2: Fraction(3, 7)})
    value = evaluate_form(form, Fraction(1, 2), POLICY)
    with mp.workprec(200):
        assert abs(value - mpf_frac(Fraction(12, 7))) < TOL
