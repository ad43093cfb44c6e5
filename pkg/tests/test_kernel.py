"""Laplace kernel h and its derivatives: exact coefficients, series/closed
consistency, boundary limits, positivity, and the integral reconstruction."""

import importlib
from fractions import Fraction
from math import comb, factorial

import mpmath as mp
import pytest

kernel_module = importlib.import_module("cmdeg.kernel")

from cmdeg import (
    CmdegError,
    InvalidIndex,
    InvalidSpec,
    KernelCoefficient,
    NonPositiveArgument,
    PrecisionPolicy,
    QuadratureNotConverged,
    QuadratureParams,
    bernoulli,
    h4_positivity_scan,
    h4_series_coefficient,
    kernel_h,
    laplace_reconstruct,
    q_value,
)

POLICY = PrecisionPolicy(working_bits=128)

# [PAPER] doubled coefficients 2 c_k for k = 7..11
DOUBLED_COEFFS = {
    7: Fraction(5, 7),
    8: Fraction(25, 14),
    9: Fraction(193, 84),
    10: Fraction(85, 42),
    11: Fraction(5065, 3696),
}


@pytest.mark.parametrize("k, doubled", sorted(DOUBLED_COEFFS.items()))
def test_known_coefficients_exact(k, doubled):
    c = h4_series_coefficient(k)
    assert c.k == k
    assert 2 * c.value == doubled


@pytest.mark.parametrize("k", [6, 0, -3, 2.5, "7"])
def test_coefficient_index_validation(k):
    with pytest.raises(InvalidIndex):
        h4_series_coefficient(k)


def _convolution_coefficients(order):
    """Maclaurin coefficients of 30 (e^s - 1)^5 h''''(s), assembled from
    scratch by exact series multiplication -- an independent oracle for c_k."""
    # (e^s - 1)^5 = sum_i a_i s^i with a_i = sum_r C(5,r) (-1)^(5-r) r^i / i!
    a = [
        Fraction(
            sum(comb(5, r) * (-1) ** (5 - r) * r**i for r in range(6)), factorial(i)
        )
        for i in range(order + 1)
    ]
    # h''''(s) = sum_{k>=3} B_2k s^(2k-4) / (2k-4)!
    b = [Fraction(0)] * (order + 1)
    for k in range(3, order // 2 + 3):
        if 2 * k - 4 <= order:
            b[2 * k - 4] = bernoulli(2 * k) / factorial(2 * k - 4)
    out = []
    for i in range(order + 1):
        out.append(30 * sum(a[j] * b[i - j] for j in range(i + 1)))
    return out


def test_coefficients_match_independent_convolution():
    conv = _convolution_coefficients(20)
    assert all(conv[i] == 0 for i in range(7))
    for k in range(7, 21):
        assert h4_series_coefficient(k).value == conv[k]


def test_coefficient_bracket_bound():
    # the closed numerator is bounded by 2 * 5^k, so c_k <= 2 * 5^k / k!
    for k in range(7, 1001):
        assert 0 < h4_series_coefficient(k).value * factorial(k) <= 2 * 5**k


def test_positivity_scan_report():
    rep = h4_positivity_scan(200)
    assert rep.k_min == 7
    assert rep.k_max == 200
    assert rep.checked == 194
    assert rep.all_positive
    assert rep.failures == ()


def test_positivity_scan_validation():
    with pytest.raises(InvalidIndex):
        h4_positivity_scan(6)


def test_nonpositive_coefficient_is_hard_error():
    with pytest.raises(CmdegError):
        KernelCoefficient(9, Fraction(-1, 3))
    with pytest.raises(CmdegError):
        KernelCoefficient(9, Fraction(0))


def test_kernel_value_at_one_frozen():
    assert mp.nstr(kernel_h(0, 1, POLICY), 25) == "0.00003226242488197994055756066"


@pytest.mark.parametrize("j", [0, 1, 2, 3, 4])
@pytest.mark.parametrize("s", ["0.125", "0.25", "0.5", 1])
def test_series_and_closed_forms_agree(j, s):
    # the Maclaurin series converges for |s| < 2 pi, so it overlaps the
    # closed-form branch well past the crossover
    prec = 240
    sv = mp.mpf(s)
    series = kernel_module._h_series(j, sv, prec)
    closed = kernel_module._h_closed(j, sv, prec)
    assert abs(series - closed) < mp.mpf(2) ** (-150) * (1 + abs(closed))


@pytest.mark.parametrize("s", ["0.5", 1, 2, 5])
def test_h4_closed_form_matches_coefficient_series_with_exact_tail(s):
    # 30 (e^s - 1)^5 h''''(s) = sum_{k=7}^{60} c_k s^k + tail,
    # 0 < tail <= 2 sum_{k>=61} (5s)^k / k! <= 2 (5s)^61/61! / (1 - 5s/62)
    K = 60
    with mp.workprec(300):
        sv = mp.mpf(s)
        lhs = 30 * (mp.exp(sv) - 1) ** 5 * kernel_h(4, s, POLICY)
        partial = mp.mpf(0)
        for k in range(7, K + 1):
            c = h4_series_coefficient(k).value
            partial += mp.mpf(c.numerator) / c.denominator * sv**k
        x = 5 * sv
        tail_bound = 2 * x ** (K + 1) / factorial(K + 1) / (1 - x / (K + 2))
        assert 0 < lhs - partial < tail_bound


@pytest.mark.parametrize("j", [0, 1, 2, 3])
def test_boundary_limits_vanish(j):
    assert abs(kernel_h(j, "1e-4", POLICY)) < mp.mpf("1e-8")


def test_fourth_derivative_small_s_leading_term():
    # h''''(s) ~ B_6 s^2 / 2 = s^2/84 as s -> 0
    with mp.workprec(200):
        value = kernel_h(4, "1e-4", POLICY)
        lead = mp.mpf("1e-8") / 84
        assert abs(value - lead) < mp.mpf("1e-14")


@pytest.mark.parametrize("j", [0, 1, 2, 3, 4])
def test_positive_on_log_grid(j):
    with mp.workprec(200):
        points = [mp.mpf("0.01") * (5000 ** (i / 19)) for i in range(20)]
        for s in points:
            assert kernel_h(j, s, POLICY) > 0


@pytest.mark.parametrize("j", [0, 1, 2, 3])
@pytest.mark.parametrize("s", ["0.15", "0.7", 3])
def test_derivative_chain_finite_difference(j, s):
    wb = POLICY.working_bits
    h = Fraction(1, 2 ** (wb // 3))
    fine = PrecisionPolicy(working_bits=2 * wb)
    with mp.workprec(3 * wb):
        hv = mp.mpf(h.numerator) / h.denominator
        plus = kernel_h(j, mp.mpf(s) + hv, fine)
        minus = kernel_h(j, mp.mpf(s) - hv, fine)
        fd = (plus - minus) / (2 * hv)
        exact = kernel_h(j + 1, s, POLICY)
        assert abs(fd - exact) < mp.mpf(2) ** (-(wb // 4)) * (1 + abs(exact))


def test_kernel_argument_validation():
    with pytest.raises(InvalidIndex):
        kernel_h(5, 1, POLICY)
    with pytest.raises(InvalidIndex):
        kernel_h(-1, 1, POLICY)
    with pytest.raises(NonPositiveArgument):
        kernel_h(0, -1, POLICY)
    assert kernel_h(0, 0, POLICY) == 0


def test_laplace_reconstruction_matches_q():
    with mp.workprec(200):
        diff = abs(laplace_reconstruct(1, POLICY) - q_value(1, POLICY))
        assert diff < mp.mpf("1e-20")


def test_laplace_decreases_with_t():
    assert laplace_reconstruct(10, POLICY) > laplace_reconstruct(20, POLICY) > 0


def test_laplace_rejects_nonpositive_t():
    with pytest.raises(NonPositiveArgument):
        laplace_reconstruct(0, POLICY)


def test_quadrature_stall_raises():
    params = QuadratureParams(tolerance=1e-60, max_level=3)
    with pytest.raises(QuadratureNotConverged):
        laplace_reconstruct(1, POLICY, params)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"tolerance": 0.0},
        {"tolerance": -1e-10},
        {"max_level": 2},
        {"panel_width": 0},
    ],
)
def test_quadrature_params_validation(kwargs):
    with pytest.raises(InvalidSpec):
        QuadratureParams(**kwargs)


def test_determinism():
    a = laplace_reconstruct(5, POLICY)
    b = laplace_reconstruct(5, POLICY)
    assert a == b
    assert kernel_h(2, "0.3", POLICY) == kernel_h(2, "0.3", POLICY)
