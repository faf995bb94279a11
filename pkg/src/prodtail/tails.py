"""Lower-tail probability of the clipped product X, exactly and by bounds.

The workhorse identity: for t in (0, 1),

    P(X <= t) = P(N > N*),   N ~ Pois(lam),  N* ~ Pois(-log t) independent,

which reduces every tail evaluation to a comparison of two independent
Poisson counts,

    P(M_mu > M_nu) = sum_k pmf(k; nu) * P(M_mu >= k + 1).

The series is evaluated with log-gamma pmf terms and summed past the mode
of the weight distribution (see ``_chunked_logsumexp`` for the truncation
rule).  Alongside the exact evaluator this module provides:

* the moment bound exp(a*lam/(1-a)) * t^a for a in (0, 1), its optimizer,
  and the optimized form exp(-(sqrt(-log t) - sqrt(lam))_+^2);
* the historical reference bound 6 * t^(1/4) for rate 1;
* the analogous comparison bound exp(-(sqrt(nu) - sqrt(mu))_+^2) for two
  independent Poissons;
* explicit lower/upper envelopes that bracket the exact tail for every
  t in (0, 1) and show the optimized bound is tight up to a factor
  polylogarithmic in 1/t;
* single-term bounds for the Poisson upper tail and Stirling-based bounds
  for the factorial ratio 1/(n!(n+1)!), both used by the envelopes.

A note on the bound family: 1/X has no finite exponential moments near
zero, so no Chernoff-style route exists for X itself and the family above
optimizes over polynomial moments instead -- the best polynomial-moment
bound is in general at least as tight as an exponential-moment bound
anyway.  The two-Poisson comparison bound is the exponential-moment
analogue on the comparison side.

Every tail evaluator returns a :class:`TailValue`, a probability paired
with its natural log; the log is authoritative once the probability
underflows (tails at t = 1e-300 remain representable in the log domain).
All functions here are pure; they are safe for unrestricted concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammainc, gammaln, logsumexp

__all__ = [
    "TailValue",
    "TailQuery",
    "PoissonPair",
    "PoissonTailQuery",
    "PoissonTailBounds",
    "StirlingRatioBounds",
    "BoundReport",
    "InconsistentBoundsError",
    "tail_exact",
    "tail_bound_moment",
    "optimal_alpha",
    "tail_bound_optimal",
    "tail_bound_legacy",
    "poisson_ge_exact",
    "poisson_ge_bound",
    "asymptotic_lower",
    "asymptotic_upper",
    "poisson_tail_bounds",
    "stirling_ratio_bounds",
    "build_bound_report",
]

# stop summing once the current term is below 1e-18 of the running sum
_LOG_TERM_CUTOFF = math.log(1e-18)
# below this, gammainc results are too close to the underflow floor to trust
_SF_FLOOR = 1e-290
_MAX_EXP_ARG = 709.0


class InconsistentBoundsError(RuntimeError):
    """Raised when cross-checked bound orderings fail; signals a numerics bug."""


@dataclass(frozen=True)
class TailValue:
    """A probability together with its natural logarithm.

    ``prob`` is exp(log_prob) and underflows to 0.0 below about -745; the
    log field is then the authoritative value.
    """

    prob: float
    log_prob: float

    @classmethod
    def from_log(cls, log_prob: float) -> "TailValue":
        lp = float(log_prob)
        if lp >= _MAX_EXP_ARG:
            return cls(math.inf, lp)
        return cls(math.exp(lp), lp)


@dataclass(frozen=True)
class TailQuery:
    """A tail threshold t in (0, 1) and a rate, the arguments of every
    tail function; ``alpha`` optionally pins the moment-bound exponent."""

    t: float
    lam: float
    alpha: float | None = None

    def __post_init__(self):
        if not (0.0 < self.t < 1.0):
            raise ValueError(f"t must lie in (0, 1), got {self.t}")
        _require_rate(self.lam)
        if self.alpha is not None and not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")


@dataclass(frozen=True)
class PoissonPair:
    """Means of two independent Poisson variables to be compared."""

    mu: float
    nu: float

    def __post_init__(self):
        _require_mean(self.mu, "mu")
        _require_mean(self.nu, "nu")


@dataclass(frozen=True)
class PoissonTailQuery:
    """Cutoff n and mean mu for the Poisson upper-tail bounds; the upper
    bound exists only when mu < n + 1."""

    n: int
    mu: float

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"n must be nonnegative, got {self.n}")
        _require_mean(self.mu, "mu")


class PoissonTailBounds(NamedTuple):
    lower: float
    upper: float | None


class StirlingRatioBounds(NamedTuple):
    lower: float
    upper: float
    exact: float


def _require_rate(lam: float) -> None:
    if not (math.isfinite(lam) and lam > 0.0):
        raise ValueError(f"rate must be positive and finite, got {lam}")


def _require_mean(value: float, name: str) -> None:
    if not (math.isfinite(value) and value >= 0.0):
        raise ValueError(f"{name} must be a nonnegative finite real, got {value}")


def _require_open_unit_t(t: float) -> None:
    if not (0.0 < t < 1.0):
        raise ValueError(f"t must lie in (0, 1), got {t}")


# ---------------------------------------------------------------------------
# log-domain Poisson primitives


def _log_poisson_sf(m, mu: float) -> np.ndarray:
    """log P(Y >= m) for Y ~ Pois(mu), elementwise over integer m.

    The regularized lower incomplete gamma function gives the survival
    probability directly.  Once that underflows, the tail is dominated by
    its leading term, so we switch to

        log pmf(m) + log(1 + mu/(m+1) + mu^2/((m+1)(m+2)) + ...),

    a series that converges fast precisely in the underflow regime m >> mu.
    """
    m = np.atleast_1d(np.asarray(m, dtype=np.int64))
    out = np.zeros(m.shape, dtype=float)
    pos = m > 0
    if not pos.any():
        return out
    if mu == 0.0:
        out[pos] = -np.inf
        return out
    mpos = m[pos].astype(float)
    sf = gammainc(mpos, mu)
    logs = np.empty(mpos.shape)
    big = sf > _SF_FLOOR
    logs[big] = np.log(sf[big])
    small = ~big
    if small.any():
        ms = mpos[small]
        ratio = np.ones_like(ms)
        series = np.ones_like(ms)
        for j in range(512):
            ratio = ratio * (mu / (ms + 1.0 + j))
            series += ratio
            if float(ratio.max()) < 1e-20:
                break
        logs[small] = ms * math.log(mu) - mu - gammaln(ms + 1.0) + np.log(series)
    out[pos] = logs
    return out


def _log_poisson_sf_scalar(m: int, mu: float) -> float:
    return float(_log_poisson_sf(np.array([m]), mu)[0])


def _chunked_logsumexp(log_term, k_start: int, k_guard: float) -> float:
    """logsumexp of log_term(k) for k >= k_start under the truncation rule:
    stop once k has passed ``k_guard`` (the mode-side guard) and the last
    term has fallen below 1e-18 of the accumulated sum."""
    k_hi = max(int(math.ceil(k_guard)), k_start) + 1
    total = -math.inf
    k_lo = k_start
    while True:
        ks = np.arange(k_lo, k_hi + 1)
        terms = log_term(ks)
        total = float(np.logaddexp(total, logsumexp(terms)))
        if not math.isfinite(total):
            return total  # nothing contributes; later terms only shrink
        if terms[-1] < total + _LOG_TERM_CUTOFF:
            return total
        k_lo = k_hi + 1
        k_hi += max(64, k_hi // 2)


def _log_dual_poisson_sum(weight_mean: float, tail_mean: float,
                          offset: int) -> float:
    """log sum_k pmf(k; weight_mean) * P(Pois(tail_mean) >= k + offset)."""
    nu = weight_mean
    if nu == 0.0:
        return _log_poisson_sf_scalar(offset, tail_mean)
    log_nu = math.log(nu)

    def log_term(ks):
        weights = ks * log_nu - nu - gammaln(ks + 1.0)
        return weights + _log_poisson_sf(ks + offset, tail_mean)

    return _chunked_logsumexp(log_term, 0, nu + 10.0 * math.sqrt(nu + 1.0))


# ---------------------------------------------------------------------------
# exact evaluators


def tail_exact(t: float, lam: float) -> TailValue:
    """P(X <= t) for the clipped product with exponential rate ``lam``.

    Evaluated through the two-Poisson identity P(X <= t) = P(N > N*) with
    N ~ Pois(lam) and N* ~ Pois(-log t).  The domain is extended by
    continuity of the law of X (which lives in (0, 1]): t >= 1 gives 1 and
    t <= 0 gives 0.  Bound functions reject such t; only the exact tail has
    a canonical extension.
    """
    _require_rate(lam)
    if t >= 1.0:
        return TailValue(1.0, 0.0)
    if t <= 0.0:
        return TailValue(0.0, -math.inf)
    lp = _log_dual_poisson_sum(-math.log(t), lam, offset=1)
    return TailValue.from_log(min(lp, 0.0))


def poisson_ge_exact(mu: float, nu: float, strict: bool = False) -> TailValue:
    """P(M_mu >= M_nu) -- or P(M_mu > M_nu) when ``strict`` -- for
    independent Poisson variables with means mu and nu.

    Computed as sum_k pmf(k; nu) * P(M_mu >= k + offset) with the same
    log-domain terms and truncation rule as :func:`tail_exact`; the strict
    variant at (mu=lam, nu=-log t) reproduces that tail.
    """
    _require_mean(mu, "mu")
    _require_mean(nu, "nu")
    offset = 1 if strict else 0
    lp = _log_dual_poisson_sum(nu, mu, offset)
    return TailValue.from_log(min(lp, 0.0))


# ---------------------------------------------------------------------------
# closed-form bounds


def tail_bound_moment(t: float, lam: float, alpha: float) -> float:
    """Moment bound exp(alpha*lam/(1-alpha)) * t^alpha for alpha in (0, 1).

    Valid for every t > 0; exceeds 1 (vacuous) when t is not small.  The
    value is not clamped -- display layers clamp at 1 if desired.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if not t > 0.0:
        raise ValueError(f"t must be positive, got {t}")
    _require_rate(lam)
    log_bound = alpha * lam / (1.0 - alpha) + alpha * math.log(t)
    return math.inf if log_bound >= _MAX_EXP_ARG else math.exp(log_bound)


def optimal_alpha(t: float, lam: float) -> float:
    """The exponent minimizing the moment bound:
    (1 - sqrt(lam / (-log t)))_+, which is 0 once -log t <= lam."""
    _require_open_unit_t(t)
    _require_rate(lam)
    return max(0.0, 1.0 - math.sqrt(lam / (-math.log(t))))


def tail_bound_optimal(t: float, lam: float) -> float:
    """The optimized moment bound exp(-(sqrt(-log t) - sqrt(lam))_+^2).

    Coincides with :func:`tail_bound_moment` at the optimizing alpha when
    that is interior, and equals 1 (vacuous) when -log t <= lam.
    """
    _require_open_unit_t(t)
    _require_rate(lam)
    gap = max(0.0, math.sqrt(-math.log(t)) - math.sqrt(lam))
    return math.exp(-gap * gap)


def tail_bound_legacy(t: float) -> float:
    """The original rate-1 reference bound 6 * t^(1/4).

    Nontrivial only for t below (1/6)^4, roughly 7.7e-4; kept as the
    baseline the optimized bound is compared against.
    """
    if not t > 0.0:
        raise ValueError(f"t must be positive, got {t}")
    return 6.0 * t**0.25


def poisson_ge_bound(mu: float, nu: float) -> float:
    """Comparison bound P(M_mu >= M_nu) <= exp(-(sqrt(nu) - sqrt(mu))_+^2).

    Obtained by optimizing the product of the two moment generating
    functions; it is attained exactly at mu = 0, where both sides equal
    exp(-nu).
    """
    _require_mean(mu, "mu")
    _require_mean(nu, "nu")
    gap = max(0.0, math.sqrt(nu) - math.sqrt(mu))
    return math.exp(-gap * gap)


# ---------------------------------------------------------------------------
# explicit envelopes bracketing the exact tail


def asymptotic_lower(t: float, lam: float) -> TailValue:
    """Closed-form lower envelope for P(X <= t), valid on all of (0, 1):

        t * exp(-lam) * [ (exp(s)/2 - 1 - 2*lam*nu) / (4*sqrt(2*pi)*nu)
                          + lam ],
        nu = -log t,  s = 2*sqrt(lam*nu).

    It follows from keeping the single leading term of each inner Poisson
    tail and bounding the factorial ratio from below.  The bracket can go
    negative when lam*nu is tiny; the bound is then reported as 0 (vacuous
    but still valid).  exp(s) is never materialized outside the log domain,
    so thresholds down to t = 1e-300 are handled.
    """
    _require_open_unit_t(t)
    _require_rate(lam)
    nu = -math.log(t)
    s = 2.0 * math.sqrt(lam * nu)
    log_scale = math.log(4.0 * math.sqrt(2.0 * math.pi) * nu)
    # bracket = exp(s)/2 * (1 - rel) / scale + lam, with rel the relative
    # size of the subtracted terms
    rel = 2.0 * (1.0 + 2.0 * lam * nu) * math.exp(-s)
    if rel < 1.0:
        log_series = s - math.log(2.0) - log_scale + math.log1p(-rel)
        log_bracket = float(np.logaddexp(log_series, math.log(lam)))
    else:
        # rel >= 1 forces s small, so direct evaluation cannot overflow
        bracket = (math.exp(s) / 2.0 - 1.0 - 2.0 * lam * nu) / math.exp(log_scale) + lam
        if bracket <= 0.0:
            return TailValue(0.0, -math.inf)
        log_bracket = math.log(bracket)
    return TailValue.from_log(-nu - lam + log_bracket)


def _log_upper_high_rate(nu: float, lam: float) -> float:
    """log of the split upper envelope used for lam >= 2.

    Head: t * sum_{k<=floor(lam)} nu^k/k!, bounding each inner tail by 1.
    Tail: for k > floor(lam) the geometric upper bound on the inner Poisson
    tail applies (its ratio lam/(k+2) is below 1 there), giving the series
    t*exp(-lam) * sum nu^k lam^(k+1) / (k!(k+1)!) / (1 - lam/(k+2)), summed
    numerically under the standard truncation rule.
    """
    cutoff = int(math.floor(lam))
    head_k = np.arange(cutoff + 1)
    log_head = -nu + float(logsumexp(head_k * math.log(nu) - gammaln(head_k + 1.0)))
    log_nu = math.log(nu)
    log_lam = math.log(lam)

    def log_term(ks):
        kk = ks.astype(float)
        return (kk * log_nu + (kk + 1.0) * log_lam
                - gammaln(kk + 1.0) - gammaln(kk + 2.0)
                - np.log1p(-lam / (kk + 2.0)))

    guard = nu + 10.0 * math.sqrt(nu + 1.0)
    log_series = -nu - lam + _chunked_logsumexp(log_term, cutoff + 1, guard)
    return float(np.logaddexp(log_head, log_series))


def asymptotic_upper(t: float, lam: float) -> TailValue:
    """Explicit upper envelope for P(X <= t), valid on all of (0, 1).

    For lam < 2 the closed form

        t * exp(-lam) / (1 - lam/2) * [ sqrt(lam/(pi*nu)) * exp(s) + lam ]

    applies (nu = -log t, s = 2*sqrt(lam*nu)).  For lam >= 2 -- including
    exactly 2, where the closed form divides by zero -- the head/tail split
    of :func:`_log_upper_high_rate` is used instead.  The returned value may
    exceed 1 for t not small; report assembly clamps it for display.
    """
    _require_open_unit_t(t)
    _require_rate(lam)
    nu = -math.log(t)
    if lam < 2.0:
        s = 2.0 * math.sqrt(lam * nu)
        log_main = 0.5 * (math.log(lam) - math.log(math.pi) - math.log(nu)) + s
        log_paren = float(np.logaddexp(log_main, math.log(lam)))
        lp = -nu - lam - math.log1p(-lam / 2.0) + log_paren
    else:
        lp = _log_upper_high_rate(nu, lam)
    return TailValue.from_log(lp)


# ---------------------------------------------------------------------------
# small auxiliary inequalities


def poisson_tail_bounds(n: int, mu: float) -> PoissonTailBounds:
    """Single-term bounds for P(Y >= n), Y ~ Pois(mu):

        exp(-mu) mu^n / n!  <=  P(Y >= n)  <=  lhs / (1 - mu/(n+1)),

    the upper bound existing only for mu < n + 1 (``upper`` is None
    otherwise).  Both sides are computed via log-gamma.
    """
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    _require_mean(mu, "mu")
    if mu == 0.0:
        lower = 1.0 if n == 0 else 0.0
    else:
        lower = math.exp(n * math.log(mu) - mu - gammaln(n + 1.0))
    upper = lower / (1.0 - mu / (n + 1.0)) if mu < n + 1.0 else None
    return PoissonTailBounds(lower, upper)


def stirling_ratio_bounds(n: int) -> StirlingRatioBounds:
    """Stirling-based bounds for the factorial ratio 1/(n!(n+1)!):

        4^n / (sqrt(2*pi*n) (2n+1)!)  <=  1/(n!(n+1)!)  <=  2*sqrt(2) * lhs

    for n >= 1.  ``exact`` is the middle quantity, all three via log-gamma.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    log_lower = (2.0 * n * math.log(2.0) - 0.5 * math.log(2.0 * math.pi * n)
                 - gammaln(2.0 * n + 2.0))
    log_exact = -(gammaln(n + 1.0) + gammaln(n + 2.0))
    return StirlingRatioBounds(
        math.exp(log_lower),
        math.exp(log_lower + 1.5 * math.log(2.0)),
        math.exp(log_exact),
    )


# ---------------------------------------------------------------------------
# aggregated report


@dataclass(frozen=True)
class BoundReport:
    """Every tail quantity this module computes, evaluated at one (t, lam).

    ``bound_moment_best_alpha`` is the exponent that minimizes the moment
    bound (0 in the clamped regime -log t <= lam, where the optimized bound
    is the vacuous 1).  ``asymptotic_upper`` is clamped at probability 1;
    ``legacy_bound`` and the moment bound are reported raw since they have
    no probability interpretation once vacuous.
    """

    t: float
    lam: float
    exact: float
    log_exact: float
    bound_optimal: float
    log_bound_optimal: float
    bound_moment_best_alpha: float
    legacy_bound: float
    asymptotic_lower: float
    log_asymptotic_lower: float
    asymptotic_upper: float
    log_asymptotic_upper: float


_ORDERING_SLACK = 1e-9  # in log space, i.e. a 1e-9 relative slack


def build_bound_report(query: TailQuery) -> BoundReport:
    """Evaluate the exact tail and every bound at ``query`` and assert the
    orderings lower <= exact <= upper and exact <= optimized bound before
    returning; a violation raises :class:`InconsistentBoundsError`."""
    t, lam = query.t, query.lam
    exact = tail_exact(t, lam)
    optimal = tail_bound_optimal(t, lam)
    log_optimal = math.log(optimal)
    lower = asymptotic_lower(t, lam)
    upper = asymptotic_upper(t, lam)
    upper_prob = min(upper.prob, 1.0)
    upper_log = min(upper.log_prob, 0.0)

    if lower.log_prob > exact.log_prob + _ORDERING_SLACK:
        raise InconsistentBoundsError(
            f"lower envelope exceeds exact tail at t={t}, lam={lam}: "
            f"{lower.log_prob} > {exact.log_prob}")
    if exact.log_prob > upper_log + _ORDERING_SLACK:
        raise InconsistentBoundsError(
            f"exact tail exceeds upper envelope at t={t}, lam={lam}: "
            f"{exact.log_prob} > {upper_log}")
    if exact.log_prob > log_optimal + _ORDERING_SLACK:
        raise InconsistentBoundsError(
            f"exact tail exceeds optimized bound at t={t}, lam={lam}: "
            f"{exact.log_prob} > {log_optimal}")

    return BoundReport(
        t=t,
        lam=lam,
        exact=exact.prob,
        log_exact=exact.log_prob,
        bound_optimal=optimal,
        log_bound_optimal=log_optimal,
        bound_moment_best_alpha=optimal_alpha(t, lam),
        legacy_bound=tail_bound_legacy(t),
        asymptotic_lower=lower.prob,
        log_asymptotic_lower=lower.log_prob,
        asymptotic_upper=upper_prob,
        log_asymptotic_upper=upper_log,
    )
