"""The Laplace kernel of the trigamma remainder and its derivatives.

Q(t) has the Laplace representation

    Q(t) = integral_0^inf h(s) exp(-t s) ds,
    h(s) = s/(1 - exp(-s)) - 1 - s/2 - s^2/12 + s^4/720,

and h has the everywhere-convergent-for-|s|<2pi Maclaurin series

    h(s) = sum_{k>=3} B_2k s^(2k) / (2k)!.

Derivatives h', h'', h^(3), h^(4) have explicit exponential-polynomial
closed forms, used for s >= 1/4; below the crossover the Maclaurin series
avoids the catastrophic cancellation of the closed forms near 0.

The fourth derivative expands as

    h^(4)(s) = 1/(30 (e^s - 1)^5) * sum_{k>=7} c_k s^k

with exactly known positive rational c_k; their positivity is the heart
of the lower-bound argument for the monotonic degree of Q.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import mpmath as mp

from .bernoulli import bernoulli
from .errors import (
    CmdegError,
    InvalidIndex,
    InvalidSpec,
    NonPositiveArgument,
    QuadratureNotConverged,
)
from .precision import PrecisionPolicy, as_mpf, default_policy

__all__ = [
    "KERNEL_SERIES_CROSSOVER",
    "KernelCoefficient",
    "PositivityScanReport",
    "QuadratureParams",
    "kernel_h",
    "h4_series_coefficient",
    "h4_positivity_scan",
    "laplace_reconstruct",
]

#: Below this |s| the Maclaurin series is used instead of the closed forms.
KERNEL_SERIES_CROSSOVER = Fraction(1, 4)

#: Guard bits absorbing closed-form cancellation near the crossover
#: (about 2^27 at s = 1/4) plus quadrature summation rounding.
_KERNEL_GUARD_BITS = 64


def _h_series(j: int, s: mp.mpf, prec: int) -> mp.mpf:
    """sum_{k>=3} B_2k s^(2k-j)/(2k-j)!  -- converges fast for |s| <= 1/4."""
    with mp.workprec(prec):
        target = mp.mpf(2) ** (8 - prec)
        total = mp.mpf(0)
        s2 = s * s
        spow = s ** (6 - j)
        k = 3
        while True:
            b = bernoulli(2 * k)
            term = mp.mpf(b.numerator) / b.denominator / factorial(2 * k - j) * spow
            total += term
            # ratio of consecutive terms is below (s/2pi)^2 < 1/600 here,
            # so the tail is dominated by the last added term
            if abs(term) <= target and k > 3:
                return total
            spow *= s2
            k += 1


def _h_closed(j: int, s: mp.mpf, prec: int) -> mp.mpf:
    with mp.workprec(prec):
        if j == 0:
            return s / (1 - mp.exp(-s)) - 1 - s / 2 - s * s / 12 + s**4 / 720
        e1 = mp.exp(s)
        em1 = e1 - 1
        s2 = s * s
        if j == 1:
            s3 = s2 * s
            e2 = e1 * e1
            num = s3 + (s3 - 30 * s + 90) * e2 - 2 * s * (s2 + 60) * e1 - 30 * s - 90
            return num / (180 * em1**2)
        if j == 2:
            e2 = e1 * e1
            e3 = e2 * e1
            num = (
                e3 * (s2 - 10)
                + 3 * (s2 + 20 * s + 30) * e1
                - 3 * (s2 - 20 * s + 30) * e2
                - s2
                + 10
            )
            return num / (60 * em1**3)
        if j == 3:
            e2 = e1 * e1
            e3 = e2 * e1
            e4 = e2 * e2
            num = s * e4 + (90 - 34 * s) * e3 - 114 * s * e2 - 2 * (17 * s + 45) * e1 + s
            return num / (30 * em1**4)
        e2 = e1 * e1
        e3 = e2 * e1
        e4 = e2 * e2
        e5 = e4 * e1
        num = (
            e5
            + 5 * (6 * s - 25) * e4
            + 10 * (33 * s - 35) * e3
            + 10 * (33 * s + 35) * e2
            + 5 * (6 * s + 25) * e1
            - 1
        )
        return num / (30 * em1**5)


def kernel_h(j: int, s, policy: PrecisionPolicy | None = None) -> mp.mpf:
    """h^(j)(s) for 0 <= j <= 4 and s >= 0."""
    if not isinstance(j, int) or not 0 <= j <= 4:
        raise InvalidIndex(f"kernel derivative order must be 0..4, got {j!r}")
    policy = policy or default_policy()
    prec = policy.internal_bits(_KERNEL_GUARD_BITS)
    sv = as_mpf(s, prec)
    if sv < 0:
        raise NonPositiveArgument(f"kernel argument must be s >= 0, got {s!r}")
    if sv == 0:
        return mp.mpf(0)
    if sv < float(KERNEL_SERIES_CROSSOVER):
        return _h_series(j, sv, prec)
    return _h_closed(j, sv, prec)


@dataclass(frozen=True)
class KernelCoefficient:
    """Coefficient c_k in the expansion 30 (e^s - 1)^5 h^(4)(s) = sum c_k s^k."""

    k: int
    value: Fraction

    def __post_init__(self) -> None:
        if self.value <= 0:
            raise CmdegError(
                f"kernel coefficient c_{self.k} = {self.value} is not positive; "
                "this contradicts the positivity underlying the lower bound"
            )


def h4_series_coefficient(k: int) -> KernelCoefficient:
    """Exact c_k for k >= 7:
    c_k = [5^k + (110k-350) 3^k + 5(3k-50) 2^(2k-1) + (165k+350) 2^k + 30k + 125] / k!.
    """
    if not isinstance(k, int) or k < 7:
        raise InvalidIndex(f"kernel coefficients start at k = 7, got {k!r}")
    num = (
        5**k
        + (110 * k - 350) * 3**k
        + 5 * (3 * k - 50) * 2 ** (2 * k - 1)
        + (165 * k + 350) * 2**k
        + 30 * k
        + 125
    )
    return KernelCoefficient(k, Fraction(num, factorial(k)))


@dataclass(frozen=True)
class PositivityScanReport:
    """Outcome of checking c_k > 0 for k = 7..k_max in exact arithmetic."""

    k_min: int
    k_max: int
    checked: int
    all_positive: bool
    failures: tuple[int, ...] = ()


def h4_positivity_scan(k_max: int) -> PositivityScanReport:
    """Exact positivity check of the expansion coefficients up to k_max."""
    if not isinstance(k_max, int) or k_max < 7:
        raise InvalidIndex(f"k_max must be at least 7, got {k_max!r}")
    failures = []
    for k in range(7, k_max + 1):
        try:
            h4_series_coefficient(k)
        except CmdegError:
            failures.append(k)
    return PositivityScanReport(
        k_min=7,
        k_max=k_max,
        checked=k_max - 6,
        all_positive=not failures,
        failures=tuple(failures),
    )


@dataclass(frozen=True)
class QuadratureParams:
    """Controls for the Laplace-integral reconstruction.

    tolerance: absolute error target for the full integral (tail included).
    max_level: tanh-sinh refinement ceiling per panel (nodes roughly
        double per level); exceeding it raises QuadratureNotConverged.
    panel_width: finite-part panel length; panels stay well inside the
        analyticity strip of the integrand.
    """

    tolerance: float = 1e-22
    max_level: int = 12
    panel_width: int = 4

    def __post_init__(self) -> None:
        if not self.tolerance > 0:
            raise InvalidSpec(f"tolerance must be positive, got {self.tolerance!r}")
        if self.max_level < 3:
            raise InvalidSpec(f"max_level must be at least 3, got {self.max_level!r}")
        if self.panel_width < 1:
            raise InvalidSpec(f"panel_width must be at least 1, got {self.panel_width!r}")


_ts_node_cache: dict[tuple[int, int], list[tuple[mp.mpf, mp.mpf]]] = {}


def _ts_nodes(level: int, prec: int) -> list[tuple[mp.mpf, mp.mpf]]:
    """tanh-sinh abscissas/weights for j >= 0 at step 2^-level."""
    key = (level, prec)
    cached = _ts_node_cache.get(key)
    if cached is not None:
        return cached
    with mp.workprec(prec):
        h = mp.mpf(2) ** (-level)
        cutoff = mp.mpf(2) ** (-prec - 32)
        nodes = []
        j = 0
        while True:
            u = j * h
            ch = mp.cosh(u)
            sh = mp.sinh(u)
            w = (mp.pi / 2) * ch / mp.cosh((mp.pi / 2) * sh) ** 2
            if w < cutoff and j > 0:
                break
            x = mp.tanh((mp.pi / 2) * sh)
            nodes.append((x, w))
            j += 1
    _ts_node_cache[key] = nodes
    return nodes


def _ts_panel(f, a: mp.mpf, b: mp.mpf, tol: mp.mpf, max_level: int, prec: int) -> mp.mpf:
    """Integrate f over [a, b] by tanh-sinh with level doubling."""
    with mp.workprec(prec):
        c = (a + b) / 2
        d = (b - a) / 2
        estimates = []
        for level in range(3, max_level + 1):
            h = mp.mpf(2) ** (-level)
            nodes = _ts_nodes(level, prec)
            total = mp.mpf(0)
            for j, (x, w) in enumerate(nodes):
                if j == 0:
                    total += w * f(c)
                else:
                    total += w * (f(c + d * x) + f(c - d * x))
            value = total * h * d
            estimates.append(value)
            if len(estimates) >= 2 and abs(estimates[-1] - estimates[-2]) <= tol:
                return value
        raise QuadratureNotConverged(
            f"tanh-sinh failed to reach tolerance {mp.nstr(tol, 3)} on "
            f"[{mp.nstr(a, 6)}, {mp.nstr(b, 6)}] within level {max_level}"
        )


def _tail_bound(A: mp.mpf, t: mp.mpf) -> mp.mpf:
    """Bound on integral_A^inf h(s) e^(-ts) ds using 0 <= h(s) <= 2 s^4 (s >= 1)."""
    return (
        2
        * mp.exp(-t * A)
        * (A**4 / t + 4 * A**3 / t**2 + 12 * A**2 / t**3 + 24 * A / t**4 + 24 / t**5)
    )


def laplace_reconstruct(
    t, policy: PrecisionPolicy | None = None, quad: QuadratureParams | None = None
) -> mp.mpf:
    """Reconstruct Q(t) as integral_0^inf h(s) exp(-t s) ds.

    The integral is split at a point A where the proven envelope
    h(s) <= 2 s^4 (s >= 1) makes the discarded tail smaller than half the
    tolerance; the finite part is integrated by per-panel tanh-sinh
    quadrature with level doubling.
    """
    policy = policy or default_policy()
    quad = quad or QuadratureParams()
    prec = max(
        policy.internal_bits(_KERNEL_GUARD_BITS),
        int(-mp.log(mp.mpf(quad.tolerance), 2)) + 80,
    )
    tv = as_mpf(t, prec)
    if not tv > 0:
        raise NonPositiveArgument(f"laplace_reconstruct requires t > 0, got {t!r}")
    with mp.workprec(prec):
        tol = mp.mpf(quad.tolerance)
        A = max(mp.mpf(1), 40 / tv)
        while _tail_bound(A, tv) > tol / 2:
            A *= mp.mpf(5) / 4

        def f(s: mp.mpf) -> mp.mpf:
            return kernel_h(0, s, policy) * mp.exp(-tv * s)

        edges = [mp.mpf(0)]
        while edges[-1] + quad.panel_width < A:
            edges.append(edges[-1] + quad.panel_width)
        edges.append(A)
        panel_tol = (tol / 2) / len(edges)
        total = mp.mpf(0)
        for a, b in zip(edges[:-1], edges[1:]):
            total += _ts_panel(f, a, b, panel_tol, quad.max_level, prec)
    return total
