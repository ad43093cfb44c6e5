"""Digamma, polygamma and log-gamma evaluation to policy-controlled accuracy.

The algorithm is the classical shift-and-series scheme:

1. shift the argument upward by the recurrence
       psi^(k)(w) = psi^(k)(w+1) + (-1)^k k! / w^(k+1)
   (and ln Gamma(w) = ln Gamma(w+1) - ln w) until it is large enough,
2. evaluate the Bernoulli asymptotic series at the shifted point,
   truncated at its smallest term,
3. undo the shift.

The shift target max(10, working_bits/3) makes the smallest series term
comfortably smaller than the absolute error target, so the smallest-term
truncation rule meets the accuracy contract; the loop still verifies the
achieved bound and shifts further when a high derivative order requires it.
"""

from __future__ import annotations

from math import factorial

import mpmath as mp

from .bernoulli import bernoulli
from .errors import InvalidIndex, NonPositiveArgument, PrecisionUnreachable
from .precision import PrecisionPolicy, as_mpf, default_policy, mag_bits

__all__ = ["polygamma", "log_gamma", "polygamma_block"]

#: Hard budget on extra recurrence shifts beyond the baseline target.
MAX_EXTRA_SHIFTS = 10**6


def _shift_target(working_bits: int) -> int:
    return max(10, -(-working_bits // 3))


def _magnitude_compensation(k: int, t: mp.mpf) -> int:
    """log2 bound on the largest intermediate term (recurrence term k!/t^(k+1))."""
    neg_log_t = max(0, -mag_bits(t))
    fact_bits = factorial(k).bit_length() if k > 1 else 1
    return fact_bits + (k + 1) * neg_log_t + 4


def _psi_series(k: int, w: mp.mpf, target: mp.mpf) -> mp.mpf | None:
    """Asymptotic series for psi^(k)(w) at large w, smallest-term truncation.

    Returns None when the smallest term fails to reach ``target`` (caller
    must shift further).
    """
    w2 = w * w
    if k == 0:
        total = mp.log(w) - 1 / (2 * w)
        wpow = w2  # w^(2i)
        prev = mp.inf
        i = 1
        while True:
            b = bernoulli(2 * i)
            term = mp.mpf(b.numerator) / (b.denominator * 2 * i) / wpow
            if abs(term) > prev:
                return None  # terms growing before target met
            total -= term
            if abs(term) <= target:
                return total
            prev = abs(term)
            wpow *= w2
            i += 1
    # k >= 1: (-1)^(k-1) [ (k-1)!/w^k + k!/(2 w^(k+1)) + sum_i B_2i (2i+k-1)!/((2i)! w^(2i+k)) ]
    wk = w**k
    total = mp.mpf(factorial(k - 1)) / wk + mp.mpf(factorial(k)) / (2 * wk * w)
    coeff = factorial(k + 1) // 2  # (2i+k-1)!/(2i)! at i=1
    wpow = wk * w2  # w^(2i+k)
    prev = mp.inf
    i = 1
    while True:
        b = bernoulli(2 * i)
        term = mp.mpf(b.numerator * coeff) / b.denominator / wpow
        if abs(term) > prev:
            return None
        total += term
        if abs(term) <= target:
            break
        prev = abs(term)
        coeff = coeff * (2 * i + k + 1) * (2 * i + k) // ((2 * i + 2) * (2 * i + 1))
        wpow *= w2
        i += 1
    return total if k % 2 else -total


def _round_out(x: mp.mpf, working_bits: int) -> mp.mpf:
    """Canonical output rounding: keep the absolute-error contract even for
    values much larger than 1 by retaining magnitude bits."""
    with mp.workprec(working_bits + max(0, mag_bits(x)) + 8):
        return +x


def _polygamma_raw(k: int, t: mp.mpf, policy: PrecisionPolicy) -> mp.mpf:
    prec = policy.internal_bits(_magnitude_compensation(k, t))
    with mp.workprec(prec):
        target = mp.mpf(2) ** (8 - prec)
        base = _shift_target(policy.working_bits)
        extra = 0
        while True:
            # recurrence sum over the shifted-through points
            shift_sum = mp.mpf(0)
            w = +t
            while w < base + extra:
                shift_sum += 1 / w ** (k + 1)
                w += 1
            tail = _psi_series(k, w, target)
            if tail is not None:
                break
            extra += max(base, (base + extra) // 2)
            if extra > MAX_EXTRA_SHIFTS:
                raise PrecisionUnreachable(
                    f"polygamma order {k}: series did not reach target within shift budget"
                )
        if k == 0:
            result = tail - shift_sum
        elif k % 2:
            result = tail + mp.mpf(factorial(k)) * shift_sum
        else:
            result = tail - mp.mpf(factorial(k)) * shift_sum
    return _round_out(result, policy.working_bits)


def polygamma(k: int, t, policy: PrecisionPolicy | None = None) -> mp.mpf:
    """psi^(k)(t) for t > 0; k = 0 is the digamma function.

    Absolute error stays below ``2**(-working_bits + guard_bits)``; values of
    large magnitude keep correspondingly many mantissa bits so the bound holds
    absolutely, not just relatively.
    """
    if not isinstance(k, int) or k < 0:
        raise InvalidIndex(f"derivative order must be a nonnegative integer, got {k!r}")
    policy = policy or default_policy()
    tv = as_mpf(t, policy.internal_bits())
    if not tv > 0:
        raise NonPositiveArgument(f"polygamma requires t > 0, got {t!r}")
    result = _polygamma_raw(k, tv, policy)
    if policy.agreement_check:
        doubled = PrecisionPolicy(2 * policy.working_bits, policy.guard_bits)
        check = _polygamma_raw(k, as_mpf(t, doubled.internal_bits()), doubled)
        tol = policy.abs_error_target * max(1, abs(check))
        if abs(result - check) > tol:
            raise PrecisionUnreachable(
                f"polygamma order {k} at t={t}: doubled-precision disagreement"
            )
    return result


def polygamma_block(k_max: int, t, policy: PrecisionPolicy | None = None) -> list[mp.mpf]:
    """psi^(0)(t) .. psi^(k_max)(t) sharing one argument shift.

    Equivalent to ``[polygamma(k, t, policy) for k in 0..k_max]`` up to the
    accuracy contract; used by scan code that needs many orders at one point.
    """
    if not isinstance(k_max, int) or k_max < 0:
        raise InvalidIndex(f"k_max must be a nonnegative integer, got {k_max!r}")
    policy = policy or default_policy()
    tv = as_mpf(t, policy.internal_bits())
    if not tv > 0:
        raise NonPositiveArgument(f"polygamma requires t > 0, got {t!r}")
    prec = policy.internal_bits(_magnitude_compensation(k_max, tv))
    with mp.workprec(prec):
        target = mp.mpf(2) ** (8 - prec)
        base = _shift_target(policy.working_bits)
        extra = 0
        while True:
            # inverse powers of every shifted-through point, shared across orders
            points: list[mp.mpf] = []
            w = +tv
            while w < base + extra:
                points.append(1 / w)
                w += 1
            tails = []
            for k in range(k_max + 1):
                tail = _psi_series(k, w, target)
                if tail is None:
                    break
                tails.append(tail)
            if len(tails) == k_max + 1:
                break
            extra += max(base, (base + extra) // 2)
            if extra > MAX_EXTRA_SHIFTS:
                raise PrecisionUnreachable(
                    f"polygamma block up to order {k_max}: shift budget exhausted"
                )
        results = []
        powers = [mp.mpf(1)] * len(points)
        for k in range(k_max + 1):
            shift_sum = mp.mpf(0)
            for idx, u in enumerate(points):
                powers[idx] *= u
                shift_sum += powers[idx]
            if k == 0:
                results.append(tails[0] - shift_sum)
            elif k % 2:
                results.append(tails[k] + mp.mpf(factorial(k)) * shift_sum)
            else:
                results.append(tails[k] - mp.mpf(factorial(k)) * shift_sum)
    return [_round_out(x, policy.working_bits) for x in results]


def _log_gamma_raw(t: mp.mpf, policy: PrecisionPolicy) -> mp.mpf:
    comp = 6 + max(0, -mag_bits(t))  # |ln t| grows only logarithmically
    prec = policy.internal_bits(comp)
    with mp.workprec(prec):
        target = mp.mpf(2) ** (8 - prec)
        base = _shift_target(policy.working_bits)
        extra = 0
        while True:
            log_sum = mp.mpf(0)
            w = +t
            while w < base + extra:
                log_sum += mp.log(w)
                w += 1
            # Stirling series at w, smallest-term truncation
            total = (w - mp.mpf(1) / 2) * mp.log(w) - w + mp.log(2 * mp.pi) / 2
            w2 = w * w
            wpow = +w
            prev = mp.inf
            i = 1
            tail = None
            while True:
                b = bernoulli(2 * i)
                term = mp.mpf(b.numerator) / (b.denominator * 2 * i * (2 * i - 1)) / wpow
                if abs(term) > prev:
                    break
                total += term
                if abs(term) <= target:
                    tail = total
                    break
                prev = abs(term)
                wpow *= w2
                i += 1
            if tail is not None:
                break
            extra += max(base, (base + extra) // 2)
            if extra > MAX_EXTRA_SHIFTS:
                raise PrecisionUnreachable("log_gamma: shift budget exhausted")
        result = tail - log_sum
    return _round_out(result, policy.working_bits)


def log_gamma(t, policy: PrecisionPolicy | None = None) -> mp.mpf:
    """ln Gamma(t) for t > 0 under the same accuracy contract as polygamma."""
    policy = policy or default_policy()
    tv = as_mpf(t, policy.internal_bits())
    if not tv > 0:
        raise NonPositiveArgument(f"log_gamma requires t > 0, got {t!r}")
    result = _log_gamma_raw(tv, policy)
    if policy.agreement_check:
        doubled = PrecisionPolicy(2 * policy.working_bits, policy.guard_bits)
        check = _log_gamma_raw(as_mpf(t, doubled.internal_bits()), doubled)
        tol = policy.abs_error_target * max(1, abs(check))
        if abs(result - check) > tol:
            raise PrecisionUnreachable(f"log_gamma at t={t}: doubled-precision disagreement")
    return result
