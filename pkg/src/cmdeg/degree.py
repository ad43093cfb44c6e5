"""Numerical evidence for completely monotonic degrees.

A function phi is completely monotonic (CM) when (-1)^k phi^(k) >= 0 for
every k; its CM degree is the largest r such that t^r phi(t) is still CM.
This module scans the sign pattern of

    (-1)^k d^k/dt^k [ t^r phi(t) ]
        = (-1)^k sum_j C(k,j) r(r-1)...(r-j+1) t^(r-j) phi^(k-j)(t)

over finite grids and derivative orders.  A grid-and-finite-order scan can
only furnish evidence, never proof: a clean sign violation certifies that
t^r phi is *not* CM (so the degree lies below r), while an all-pass scan
is supporting evidence that the degree reaches r.  Upper bounds also come
from the t -> 0+ criterion: if t^u phi stays CM then
-u <= lim t phi'/phi, so extrapolating g(t) = -base_r - t phi'(t)/phi(t)
to 0 bounds the degree by base_r + lim g.

Verdict bookkeeping is deliberately conservative: any signed value within
the guard band of zero is re-evaluated at doubled precision and reported
as inconclusive when still indistinguishable from zero.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import mpmath as mp

from .errors import CmdegError, ExtrapolationUnstable, InvalidIndex, InvalidSpec
from .precision import PrecisionPolicy, as_mpf, default_policy
from .remainders import RemainderSpec, phi_derivatives, pole_order

__all__ = [
    "Grid",
    "default_grid",
    "signed_derivative",
    "classify_sign",
    "CmCheckReport",
    "cm_check",
    "small_t_bound",
    "DegreeBracket",
    "degree_bracket",
    "conjectured_degree",
    "established_degree",
    "ConjectureCell",
    "ConjectureScanReport",
    "conjecture_scan",
]

_SUM_GUARD_BITS = 64  # extra bits for the product-rule sums


@dataclass(frozen=True)
class Grid:
    """Deterministic evaluation grid on (0, infinity).

    Endpoints are exact rationals; points are generated at a requested
    binary precision, identically on every run.
    """

    t_min: Fraction
    t_max: Fraction
    points: int
    spacing: str = "log"

    def __post_init__(self) -> None:
        if self.points < 1:
            raise InvalidIndex(f"grid needs at least one point, got {self.points}")
        if not 0 < self.t_min <= self.t_max:
            raise InvalidSpec("grid endpoints must satisfy 0 < t_min <= t_max")
        if self.spacing not in ("log", "linear"):
            raise InvalidSpec(f"unknown grid spacing {self.spacing!r}")

    @classmethod
    def parse(cls, text: str) -> "Grid":
        """Parse 'log:<t_min>:<t_max>:<points>' (or 'linear:...')."""
        parts = text.split(":")
        if len(parts) != 4:
            raise InvalidSpec(f"grid must look like 'log:1e-3:1e4:200', got {text!r}")
        spacing, lo, hi, pts = parts
        try:
            return cls(Fraction(lo), Fraction(hi), int(pts), spacing)
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidSpec(f"bad grid {text!r}: {exc}") from None

    def values(self, prec: int) -> list[mp.mpf]:
        with mp.workprec(prec + 16):
            lo = as_mpf(self.t_min, prec + 16)
            hi = as_mpf(self.t_max, prec + 16)
            if self.points == 1:
                return [lo]
            if self.spacing == "linear":
                step = (hi - lo) / (self.points - 1)
                return [lo + i * step for i in range(self.points)]
            la, lb = mp.log(lo), mp.log(hi)
            step = (lb - la) / (self.points - 1)
            return [mp.exp(la + i * step) for i in range(self.points)]


def default_grid() -> Grid:
    return Grid(Fraction(1, 1000), Fraction(10000), 200)


def _as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12)
    if isinstance(x, mp.mpf):
        return Fraction(*x.as_integer_ratio())
    raise InvalidSpec(f"cannot interpret {x!r} as a rational exponent")


def _falling(r: Fraction, j: int) -> Fraction:
    out = Fraction(1)
    for i in range(j):
        out *= r - i
    return out


# ---------------------------------------------------------------------------
# derivative cache shared by scans (same spec/t/policy across lattice points)

_ders_cache: dict = {}
_ders_lock = threading.Lock()
_DERS_CACHE_CAP = 200_000


def _phi_ders_cached(spec: RemainderSpec, t: mp.mpf, i_max: int, policy: PrecisionPolicy):
    key = (spec.key(), t, i_max, policy.working_bits, policy.guard_bits)
    hit = _ders_cache.get(key)
    if hit is not None:
        return hit
    val = phi_derivatives(spec, t, i_max, policy)
    with _ders_lock:
        if len(_ders_cache) >= _DERS_CACHE_CAP:
            _ders_cache.clear()
        _ders_cache[key] = val
    return val


def _signed_with_scale(
    r: Fraction,
    k: int,
    t: mp.mpf,
    ders: list[mp.mpf],
    policy: PrecisionPolicy,
) -> tuple[mp.mpf, mp.mpf]:
    """Signed derivative value and the largest |term| of its defining sum."""
    with mp.workprec(policy.working_bits + _SUM_GUARD_BITS):
        lnt = mp.log(t)
        total = mp.mpf(0)
        scale = mp.mpf(0)
        for j in range(k + 1):
            ff = _falling(r, j)
            if ff == 0:
                continue
            power = mp.exp((mp.mpf(r.numerator) / r.denominator - j) * lnt)
            term = comb(k, j) * (mp.mpf(ff.numerator) / ff.denominator) * power * ders[k - j]
            total += term
            scale = max(scale, abs(term))
        if k % 2:
            total = -total
    return total, scale


def signed_derivative(
    spec: RemainderSpec, r, k: int, t, policy: PrecisionPolicy | None = None
) -> mp.mpf:
    """(-1)^k d^k/dt^k [t^r phi(t)] for the selected family member.

    Nonnegative values support complete monotonicity of t^r phi at this
    point and order; a definitely negative value refutes it.
    """
    if not isinstance(k, int) or k < 0:
        raise InvalidIndex(f"derivative order must be a nonnegative integer, got {k!r}")
    policy = policy or default_policy()
    rv = _as_rational(r)
    tv = as_mpf(t, policy.internal_bits())
    ders = _phi_ders_cached(spec, tv, k, policy)
    value, _ = _signed_with_scale(rv, k, tv, ders, policy)
    return value


def classify_sign(value, scale, policy: PrecisionPolicy) -> str:
    """'pass' / 'violation' / 'borderline' relative to the guard band.

    The guard band is 2^(-working_bits/2) of the local term scale, so the
    classification is invariant under scaling phi by a positive constant.
    """
    guard = mp.mpf(2) ** (-(policy.working_bits // 2)) * scale
    if abs(value) <= guard:
        return "borderline"
    return "pass" if value > 0 else "violation"


@dataclass(frozen=True)
class CmCheckReport:
    """Outcome of a sign scan of (-1)^k [t^r phi]^(k) over a grid."""

    spec: RemainderSpec
    r: Fraction
    max_order: int
    grid: Grid
    working_bits: int
    verdict: str  # "pass" | "violation" | "inconclusive"
    violations: tuple  # (t, k, value), ordered by (t, k)
    inconclusive: tuple  # (t, k)
    values: tuple  # every (t, k, value), ordered by (t, k)

    def worst_margin(self):
        """Smallest value/scale ratio is not retained; smallest value is."""
        return min((v for _, _, v in self.values), default=None)


def cm_check(
    spec: RemainderSpec,
    r,
    max_order: int = 12,
    grid: Grid | None = None,
    policy: PrecisionPolicy | None = None,
    _derivative_provider=None,
) -> CmCheckReport:
    """Scan the CM sign pattern of t^r phi(t) at orders 0..max_order.

    Values inside the guard band are re-evaluated once at doubled working
    precision; if still indistinguishable from zero they are reported as
    inconclusive rather than silently counted as passes or violations.
    """
    if not isinstance(max_order, int) or max_order < 0:
        raise InvalidIndex(f"max_order must be a nonnegative integer, got {max_order!r}")
    policy = policy or default_policy()
    grid = grid or default_grid()
    rv = _as_rational(r)
    provider = _derivative_provider or (
        lambda t, i_max, pol: _phi_ders_cached(spec, t, i_max, pol)
    )
    doubled = PrecisionPolicy(2 * policy.working_bits, policy.guard_bits)
    violations = []
    inconclusive = []
    all_values = []
    for tv in grid.values(policy.internal_bits()):
        ders = provider(tv, max_order, policy)
        for k in range(max_order + 1):
            value, scale = _signed_with_scale(rv, k, tv, ders, policy)
            cls = classify_sign(value, scale, policy)
            if cls == "borderline":
                ders2 = provider(tv, max_order, doubled)
                value, scale = _signed_with_scale(rv, k, tv, ders2, doubled)
                cls = classify_sign(value, scale, doubled)
                if cls == "borderline":
                    inconclusive.append((tv, k))
                    all_values.append((tv, k, value))
                    continue
            all_values.append((tv, k, value))
            if cls == "violation":
                violations.append((tv, k, value))
    if violations:
        verdict = "violation"
    elif inconclusive:
        verdict = "inconclusive"
    else:
        verdict = "pass"
    return CmCheckReport(
        spec=spec,
        r=rv,
        max_order=max_order,
        grid=grid,
        working_bits=policy.working_bits,
        verdict=verdict,
        violations=tuple(violations),
        inconclusive=tuple(inconclusive),
        values=tuple(all_values),
    )


_DEFAULT_SMALL_T = (Fraction(1, 10), Fraction(1, 100), Fraction(1, 1000), Fraction(1, 10000))


def _small_t_detail(
    spec: RemainderSpec, base_r, t_sequence, policy: PrecisionPolicy
) -> tuple[mp.mpf, mp.mpf]:
    base = _as_rational(base_r)
    seq = tuple(t_sequence) if t_sequence is not None else _DEFAULT_SMALL_T
    if len(seq) < 2:
        raise InvalidSpec("small_t_bound needs at least two sample points")
    rationals = [_as_rational(t) for t in seq]
    if any(t <= 0 for t in rationals) or any(
        a <= b for a, b in zip(rationals, rationals[1:])
    ):
        raise InvalidSpec("small_t sample points must be positive and strictly decreasing")
    prec = policy.internal_bits(_SUM_GUARD_BITS)
    xs = []
    ys = []
    with mp.workprec(prec):
        for t in seq:
            tv = as_mpf(t, prec)
            phi0, phi1 = _phi_ders_cached(spec, tv, 1, policy)[:2]
            if phi0 == 0:
                raise ExtrapolationUnstable(f"phi({t}) = 0; ratio undefined")
            g = -mp.mpf(base.numerator) / base.denominator - tv * phi1 / phi0
            xs.append(tv)
            ys.append(g)
        # Neville extrapolation of the samples to t = 0
        n = len(xs)
        tableau = [list(ys)]
        for depth in range(1, n):
            row = []
            for i in range(n - depth):
                hi = tableau[depth - 1][i + 1]
                lo = tableau[depth - 1][i]
                row.append(hi + (hi - lo) * xs[i + depth] / (xs[i] - xs[i + depth]))
            tableau.append(row)
        diagonal = [tableau[d][-1] for d in range(n)]
        corrections = [abs(diagonal[i] - diagonal[i - 1]) for i in range(1, n)]
        if len(corrections) >= 2:
            last, prev = corrections[-1], corrections[-2]
            floor = mp.mpf("1e-9") * (1 + abs(diagonal[-1]))
            if last > 4 * prev and last > floor:
                raise ExtrapolationUnstable(
                    "extrapolation diagonal stopped converging: "
                    f"corrections {mp.nstr(prev, 4)} -> {mp.nstr(last, 4)}"
                )
        err = corrections[-1] * 2 if corrections else mp.mpf(0)
    return diagonal[-1], err


def small_t_bound(
    spec: RemainderSpec,
    base_r,
    t_sequence=None,
    policy: PrecisionPolicy | None = None,
) -> mp.mpf:
    """Extrapolated limit of -base_r - t phi'(t)/phi(t) as t -> 0+.

    If t^u phi is CM then u <= base_r + limit, so ``base_r + limit`` is a
    numerical upper bound for the CM degree of phi.
    """
    policy = policy or default_policy()
    limit, _ = _small_t_detail(spec, base_r, t_sequence, policy)
    return limit


@dataclass(frozen=True)
class DegreeBracket:
    """Evidence interval for a CM degree.

    lower: largest lattice exponent whose scan passed.
    upper: smaller of the small-t criterion bound and the smallest lattice
        exponent with a scan violation.
    """

    spec: RemainderSpec
    step: Fraction
    lower: Fraction
    upper: mp.mpf
    lower_evidence: CmCheckReport
    upper_method: str  # "small_t_criterion" | "scan_violation"
    scan_violation_r: Fraction | None
    violation_evidence: CmCheckReport | None
    small_t_limit: mp.mpf
    small_t_error: mp.mpf

    def contains(self, x) -> bool:
        xv = _as_rational(x)
        return self.lower <= xv and mp.mpf(xv.numerator) / xv.denominator <= self.upper


def degree_bracket(
    spec: RemainderSpec,
    r_lattice_step=Fraction(1),
    max_order: int = 12,
    grid: Grid | None = None,
    policy: PrecisionPolicy | None = None,
) -> DegreeBracket:
    """Bracket the CM degree by lattice bisection plus the small-t bound.

    Inconclusive lattice points are excluded from both endpoints, widening
    the bracket conservatively.
    """
    step = _as_rational(r_lattice_step)
    if not 0 < step <= 1:
        raise InvalidSpec(f"lattice step must lie in (0, 1], got {step}")
    policy = policy or default_policy()
    grid = grid or default_grid()
    limit, limit_err = _small_t_detail(spec, 0, None, policy)

    def check(idx: int) -> CmCheckReport:
        return cm_check(spec, step * idx, max_order, grid, policy)

    rep0 = check(0)
    if rep0.verdict != "pass":
        raise CmdegError(
            f"scan at r = 0 did not pass for {spec.label}; "
            "the member does not look completely monotonic on this grid"
        )
    pole = pole_order(spec)
    hi = int(pole / step) + 1
    hi_rep = check(hi)
    tries = 0
    while hi_rep.verdict != "violation" and tries < 8:
        hi += max(1, int(1 / step))
        hi_rep = check(hi)
        tries += 1
    if hi_rep.verdict != "violation":
        hi = None  # no scan violation found; upper rests on the small-t bound

    lo, lo_rep = 0, rep0
    if hi is not None:
        top, top_rep = hi, hi_rep
        while top - lo > 1:
            mid = (lo + top) // 2
            rep = check(mid)
            if rep.verdict == "pass":
                lo, lo_rep = mid, rep
            elif rep.verdict == "violation":
                top, top_rep = mid, rep
            else:
                # inconclusive midpoint: fall back to a linear sweep and
                # keep the widest consistent bracket
                sweep = {idx: check(idx) for idx in range(lo + 1, top)}
                viols = [i for i, rp in sweep.items() if rp.verdict == "violation"]
                if viols:
                    top, top_rep = min(viols), sweep[min(viols)]
                passes = [
                    i for i, rp in sweep.items() if rp.verdict == "pass" and i < top
                ]
                if passes:
                    lo, lo_rep = max(passes), sweep[max(passes)]
                break
        hi, hi_rep = top, top_rep

    lower = step * lo
    small_t_upper = limit  # base_r = 0
    if hi is not None:
        hi_value = as_mpf(step * hi, policy.working_bits)
        if small_t_upper <= hi_value:
            upper, method = small_t_upper, "small_t_criterion"
        else:
            upper, method = hi_value, "scan_violation"
    else:
        upper, method = small_t_upper, "small_t_criterion"
    if upper < as_mpf(lower, policy.working_bits):
        raise CmdegError(
            f"contradictory evidence for {spec.label}: scans pass at r = {lower} "
            f"but the small-t criterion bounds the degree by {mp.nstr(upper, 12)}; "
            "increase max_order or refine the grid"
        )
    return DegreeBracket(
        spec=spec,
        step=step,
        lower=lower,
        upper=upper,
        lower_evidence=lo_rep,
        upper_method=method,
        scan_violation_r=(step * hi) if hi is not None else None,
        violation_evidence=hi_rep if hi is not None else None,
        small_t_limit=limit,
        small_t_error=limit_err,
    )


def conjectured_degree(n: int, m: int) -> int:
    """Conjectured CM degree of phi_{n,m}: m, m+1, or m + 2(n-1)."""
    if n == 0:
        return m
    if n == 1:
        return m + 1
    return m + 2 * (n - 1)


_ESTABLISHED_DEGREES = {
    (0, 0): 0,
    (1, 0): 1,
    (0, 1): 1,
    (1, 1): 2,
    (2, 1): 3,
    (3, 1): 5,
    (0, 2): 2,
    (1, 2): 3,
}


def established_degree(n: int, m: int) -> int | None:
    """Degree value with a published proof, or None when open."""
    return _ESTABLISHED_DEGREES.get((n, m))


@dataclass(frozen=True)
class ConjectureCell:
    n: int
    m: int
    conjectured: int
    established: int | None
    bracket: DegreeBracket | None
    contains_conjectured: bool | None
    note: str = ""
    error: str | None = None


@dataclass(frozen=True)
class ConjectureScanReport:
    n_max: int
    m_max: int
    max_order: int
    step: Fraction
    working_bits: int
    cells: tuple


def conjecture_scan(
    n_max: int = 3,
    m_max: int = 3,
    max_order: int = 12,
    grid: Grid | None = None,
    policy: PrecisionPolicy | None = None,
    lattice_step=Fraction(1),
) -> ConjectureScanReport:
    """Bracket every phi_{n,m} for n <= n_max, m <= m_max and report whether
    the conjectured degree falls inside its bracket.  Per-cell failures are
    recorded and the scan continues."""
    policy = policy or default_policy()
    grid = grid or default_grid()
    step = _as_rational(lattice_step)
    cells = []
    for n in range(n_max + 1):
        for m in range(m_max + 1):
            conj = conjectured_degree(n, m)
            est = established_degree(n, m)
            note = ""
            if (n, m) == (2, 2):
                note = "published proof brackets the degree in [4, 5]; conjectured value 4"
            bracket = None
            contains = None
            error = None
            try:
                bracket = degree_bracket(
                    RemainderSpec(n=n, m=m), step, max_order, grid, policy
                )
                contains = bracket.contains(conj)
            except CmdegError as exc:
                error = f"{type(exc).__name__}: {exc}"
            cells.append(
                ConjectureCell(
                    n=n,
                    m=m,
                    conjectured=conj,
                    established=est,
                    bracket=bracket,
                    contains_conjectured=contains,
                    note=note,
                    error=error,
                )
            )
    return ConjectureScanReport(
        n_max=n_max,
        m_max=m_max,
        max_order=max_order,
        step=step,
        working_bits=policy.working_bits,
        cells=tuple(cells),
    )
