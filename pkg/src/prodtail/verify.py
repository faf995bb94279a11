"""Self-verification suite.

Runs every statistical identity, bound ordering, and structural invariant
the library promises, on fixed grids with deterministic substreams and
explicit tolerances.  Each check family produces one or more records whose
``statistic`` must fall strictly below the family ``threshold``; statistics
are oriented so that 0 is "perfect", which means a threshold artificially
forced to 0 fails its family (the hook the harness tests use to prove the
suite can fail).
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import gammaln
from scipy.stats import chisquare, ks_2samp

from .config import RunConfig
from .sampling import (
    SimParams,
    moment_exact,
    sample_x_beta_batch,
    sample_x_compound_batch,
    sample_x_direct_batch,
)
from .streams import substream
from .tails import (
    asymptotic_lower,
    asymptotic_upper,
    poisson_ge_bound,
    poisson_ge_exact,
    poisson_tail_bounds,
    stirling_ratio_bounds,
    tail_bound_legacy,
    tail_bound_optimal,
    tail_exact,
)
from .trees import (
    GrowingTree,
    grow_uniform_attachment,
    log_phi_all,
    log_phi_direct,
    root_finding_trial,
    top_k_central,
)

__all__ = [
    "CheckRecord",
    "VerificationReport",
    "run_verify_suite",
    "ks_two_sample_critical",
]

# fixed grids for the checks
_SAMPLER_LAMBDAS = (0.5, 1.0, 2.0)
_MOMENT_ORDERS = (0.5, 1.0, 2.0)
_BETA_SHAPES = (1.0, 0.5)
_TAIL_LAMBDAS = (0.25, 0.5, 1.0, 1.5, 1.9, 3.0, 5.0)
_TAIL_TS = tuple(10.0**-e for e in range(1, 13))
_MC_TS = (0.5, 0.1, 0.01, 0.001)
_ALPHA_GRID = tuple(i / 100.0 for i in range(1, 100))
_POISSON_MEANS = (0.0, 0.5, 1.0, 2.0, 5.0, 10.0)
_LEGACY_TS = tuple(10.0**-e for e in range(4, 13))
_LEMMA_TAIL_MUS = (0.1, 0.5, 1.0, 2.0, 5.0)
_RESIDUAL_LAMBDAS = (0.5, 1.0, 1.9)
_RESIDUAL_TS = tuple(10.0**-e for e in range(2, 13))
_TREE_KS = (1, 5, 25, 50)

_TINY = 5e-324


@dataclass(frozen=True)
class CheckRecord:
    """One verified statement: pass iff statistic < threshold (strictly)."""

    name: str
    params: dict
    statistic: float
    threshold: float
    passed: bool


@dataclass(frozen=True)
class VerificationReport:
    """All check records of one run plus the seed and wall-clock time.

    ``overall_pass`` is true iff every record passed.  Serialization keeps
    full float precision, so a report round-trips losslessly through JSON;
    ``elapsed_seconds`` is the only field that varies between reruns with
    the same seed.
    """

    seed: int
    overall_pass: bool
    checks: tuple[CheckRecord, ...]
    elapsed_seconds: float

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "overall_pass": self.overall_pass,
            "elapsed_seconds": self.elapsed_seconds,
            "checks": [asdict(c) for c in self.checks],
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "VerificationReport":
        checks = tuple(CheckRecord(**c) for c in data["checks"])
        return cls(data["seed"], data["overall_pass"], checks,
                   data["elapsed_seconds"])

    @classmethod
    def from_json(cls, text: str) -> "VerificationReport":
        return cls.from_dict(json.loads(text))


def ks_two_sample_critical(alpha: float, n: int, m: int) -> float:
    """Asymptotic two-sample KS critical value at level ``alpha``:
    c(alpha) * sqrt((n+m)/(n*m)) with c = sqrt(-log(alpha/2)/2)."""
    c = math.sqrt(-0.5 * math.log(alpha / 2.0))
    return c * math.sqrt((n + m) / (n * m))


def _record(name, params, statistic, threshold):
    stat = float(statistic)
    return CheckRecord(name, params, stat, threshold, stat < threshold)


def _log_violation(log_low, log_high):
    # how far (in log space) the supposed lower value exceeds the higher
    return max(0.0, log_low - log_high)


# ---------------------------------------------------------------------------
# sampler checks


def _check_sampler_equivalence(config, threshold):
    records = []
    for lam in _SAMPLER_LAMBDAS:
        params = SimParams(lam=lam)
        n = config.ks_samples
        direct = sample_x_direct_batch(
            params, substream(config.seed, "ks-direct", lam), n)
        compound = sample_x_compound_batch(
            params, substream(config.seed, "ks-compound", lam), n)
        stat = float(ks_2samp(direct.log_values, compound.log_values).statistic)
        records.append(_record("sampler_equivalence_ks",
                               {"lam": lam, "n": n}, stat, threshold))
    return records


def _check_beta_reduction(config, threshold):
    records = []
    for shape in _BETA_SHAPES:
        n = config.ks_samples
        beta = sample_x_beta_batch(
            SimParams(lam=shape, beta_shape=shape),
            substream(config.seed, "ks-beta", shape), n)
        direct = sample_x_direct_batch(
            SimParams(lam=shape),
            substream(config.seed, "ks-beta-direct", shape), n)
        stat = float(ks_2samp(beta.log_values, direct.log_values).statistic)
        records.append(_record("beta_reduction_ks",
                               {"shape": shape, "n": n}, stat, threshold))
    return records


def _check_moment_match(config, threshold):
    records = []
    n = config.mc_samples
    for lam in _SAMPLER_LAMBDAS:
        batch = sample_x_direct_batch(
            SimParams(lam=lam), substream(config.seed, "moments", lam), n)
        values = batch.values
        for order in _MOMENT_ORDERS:
            powered = values**order
            mean = float(powered.mean())
            se = float(powered.std(ddof=1)) / math.sqrt(n)
            z = abs(mean - moment_exact(order, lam)) / se
            records.append(_record(
                "moment_match",
                {"lam": lam, "order": order, "n": n, "mean": mean},
                z, threshold))
    return records


def _poisson_gof_pvalue(counts: np.ndarray, lam: float) -> float:
    n = counts.size
    kmax = int(counts.max())
    observed = np.bincount(counts, minlength=kmax + 1).astype(float)
    ks = np.arange(kmax + 1)
    pmf = np.exp(ks * math.log(lam) - lam - gammaln(ks + 1.0))
    probs = pmf.copy()
    probs[-1] = max(1.0 - pmf[:-1].sum(), 0.0)  # lump the tail into the last cell
    expected = n * probs
    # merge right-hand cells until each expected count is at least 5
    while expected.size > 2 and expected[-1] < 5.0:
        expected[-2] += expected[-1]
        observed[-2] += observed[-1]
        expected = expected[:-1]
        observed = observed[:-1]
    expected *= observed.sum() / expected.sum()
    return float(chisquare(observed, expected).pvalue)


def _check_factor_count_gof(config, threshold):
    records = []
    n = config.gof_samples
    for lam in _SAMPLER_LAMBDAS:
        batch = sample_x_direct_batch(
            SimParams(lam=lam), substream(config.seed, "gof", lam), n)
        p = _poisson_gof_pvalue(batch.factor_counts, lam)
        records.append(_record("factor_count_gof",
                               {"lam": lam, "n": n, "p_value": p},
                               1.0 - p, threshold))
    return records


def _check_sample_support(config, threshold):
    n = min(config.ks_samples, 100_000)
    frac_bad = 0.0
    for lam in _SAMPLER_LAMBDAS:
        params = SimParams(lam=lam, beta_shape=min(lam, 1.0))
        rng = substream(config.seed, "support", lam)
        for batch in (sample_x_direct_batch(params, rng, n),
                      sample_x_compound_batch(params, rng, n),
                      sample_x_beta_batch(params, rng, n)):
            logs = batch.log_values
            outside = (logs > 0.0) | ~np.isfinite(logs)
            mismatched = (batch.factor_counts == 0) != (logs == 0.0)
            frac_bad = max(frac_bad,
                           float(outside.mean()), float(mismatched.mean()))
    return [_record("sample_support",
                    {"lams": list(_SAMPLER_LAMBDAS), "n": n},
                    frac_bad, threshold)]


# ---------------------------------------------------------------------------
# tail checks


def _check_dual_poisson_identity(config, threshold):
    worst = 0.0
    for lam in _TAIL_LAMBDAS:
        for t in _TAIL_TS:
            a = tail_exact(t, lam)
            b = poisson_ge_exact(lam, -math.log(t), strict=True)
            worst = max(worst, abs(a.log_prob - b.log_prob))
    return [_record("dual_poisson_identity",
                    {"lams": list(_TAIL_LAMBDAS), "n_t": len(_TAIL_TS)},
                    worst, threshold)]


def _check_tail_monte_carlo(config, threshold):
    records = []
    n = config.mc_samples
    for lam in _SAMPLER_LAMBDAS:
        batch = sample_x_direct_batch(
            SimParams(lam=lam), substream(config.seed, "mc-tail", lam), n)
        worst = 0.0
        for t in _MC_TS:
            p = tail_exact(t, lam).prob
            emp = float((batch.log_values <= math.log(t)).mean())
            se = math.sqrt(p * (1.0 - p) / n)
            worst = max(worst, abs(emp - p) / se)
        records.append(_record("tail_monte_carlo",
                               {"lam": lam, "ts": list(_MC_TS), "n": n},
                               worst, threshold))
    return records


def _check_asymptotic_sandwich(config, threshold):
    worst = 0.0
    for lam in _TAIL_LAMBDAS:
        for t in _TAIL_TS:
            exact = tail_exact(t, lam).log_prob
            low = asymptotic_lower(t, lam).log_prob
            high = asymptotic_upper(t, lam).log_prob
            worst = max(worst, _log_violation(low, exact),
                        _log_violation(exact, high))
    return [_record("asymptotic_sandwich",
                    {"lams": list(_TAIL_LAMBDAS), "n_t": len(_TAIL_TS)},
                    worst, threshold)]


def _moment_log_bounds(t, lam):
    alphas = np.asarray(_ALPHA_GRID)
    return alphas * lam / (1.0 - alphas) + alphas * math.log(t)


def _check_moment_bound_dominance(config, threshold):
    worst = 0.0
    for lam in _TAIL_LAMBDAS:
        for t in _TAIL_TS:
            log_exact = tail_exact(t, lam).log_prob
            log_opt = math.log(tail_bound_optimal(t, lam))
            worst = max(worst, _log_violation(log_exact, log_opt))
            grid = _moment_log_bounds(t, lam)
            worst = max(worst, _log_violation(log_opt, float(grid.min())))
    return [_record("moment_bound_dominance",
                    {"lams": list(_TAIL_LAMBDAS), "n_alpha": len(_ALPHA_GRID)},
                    worst, threshold)]


def _check_optimal_grid_min(config, threshold):
    # the 99-point grid minimum should sit within grid resolution of the
    # optimized bound, measured multiplicatively (in log space)
    worst = 0.0
    for lam in _TAIL_LAMBDAS:
        for t in _TAIL_TS:
            log_opt = math.log(tail_bound_optimal(t, lam))
            gap = float(_moment_log_bounds(t, lam).min()) - log_opt
            worst = max(worst, gap)
    return [_record("optimal_matches_grid_minimum",
                    {"lams": list(_TAIL_LAMBDAS), "grid_step": 0.01},
                    worst, threshold)]


def _check_poisson_comparison(config, threshold):
    worst = 0.0
    for mu in _POISSON_MEANS:
        for nu in _POISSON_MEANS:
            exact = poisson_ge_exact(mu, nu)
            bound = poisson_ge_bound(mu, nu)
            worst = max(worst,
                        _log_violation(exact.log_prob, math.log(bound)))
    equality = 0.0
    for nu in _POISSON_MEANS:
        exact = poisson_ge_exact(0.0, nu).prob
        bound = poisson_ge_bound(0.0, nu)
        equality = max(equality, abs(exact - bound) / bound)
    return [
        _record("poisson_comparison_bound",
                {"grid": list(_POISSON_MEANS), "kind": "dominance"},
                worst, threshold),
        _record("poisson_comparison_bound",
                {"grid": list(_POISSON_MEANS), "kind": "equality_at_mu_zero"},
                equality, threshold),
    ]


def _check_better_than_legacy(config, threshold):
    worst = 0.0
    for t in _LEGACY_TS:
        worst = max(worst, tail_bound_optimal(t, 1.0) / tail_bound_legacy(t))
    return [_record("better_than_legacy", {"ts": list(_LEGACY_TS), "lam": 1.0},
                    worst, threshold)]


def _brute_poisson_sf(n: int, mu: float) -> float:
    """P(Y >= n) by explicit term-by-term summation (independent oracle)."""
    term = math.exp(n * math.log(mu) - mu - math.lgamma(n + 1))
    total = 0.0
    k = n
    while True:
        total += term
        term *= mu / (k + 1)
        k += 1
        if term < total * 1e-20 and k > n + 10:
            return total


def _check_poisson_tail_ineq(config, threshold):
    worst = 0.0
    for n in range(0, 31):
        for mu in _LEMMA_TAIL_MUS:
            if not mu < n + 1:
                continue
            lower, upper = poisson_tail_bounds(n, mu)
            brute = _brute_poisson_sf(n, mu)
            worst = max(worst, (lower - brute) / brute, (brute - upper) / brute)
    return [_record("poisson_tail_inequalities",
                    {"n_max": 30, "mus": list(_LEMMA_TAIL_MUS)},
                    max(worst, 0.0), threshold)]


def _check_factorial_ratio(config, threshold):
    worst = 0.0
    for n in range(1, 51):
        bounds = stirling_ratio_bounds(n)
        # independent midpoint from exact integer factorials
        log_exact = -(math.log(math.factorial(n))
                      + math.log(math.factorial(n + 1)))
        worst = max(worst,
                    _log_violation(math.log(bounds.lower), log_exact),
                    _log_violation(log_exact, math.log(bounds.upper)),
                    abs(math.log(bounds.exact) - log_exact))
    return [_record("factorial_ratio_inequalities", {"n_max": 50},
                    worst, threshold)]


def _check_log_residual(config, threshold):
    worst = 0.0
    for lam in _RESIDUAL_LAMBDAS:
        for t in _RESIDUAL_TS:
            nu = -math.log(t)
            log_exact = tail_exact(t, lam).log_prob
            residual = abs(log_exact + (math.sqrt(nu) - math.sqrt(lam)) ** 2)
            worst = max(worst, residual / math.log(nu))
    return [_record("asymptotic_log_residual",
                    {"lams": list(_RESIDUAL_LAMBDAS), "n_t": len(_RESIDUAL_TS)},
                    worst, threshold)]


def _check_tail_monotonicity(config, threshold):
    worst = 0.0
    ts = sorted(_TAIL_TS)
    lams = sorted(_TAIL_LAMBDAS)
    for lam in lams:
        logs = [tail_exact(t, lam).log_prob for t in ts]
        for a, b in zip(logs, logs[1:]):
            worst = max(worst, _log_violation(a, b))
    for t in ts:
        logs = [tail_exact(t, lam).log_prob for lam in lams]
        for a, b in zip(logs, logs[1:]):
            worst = max(worst, _log_violation(a, b))
    return [_record("tail_monotonicity",
                    {"n_t": len(ts), "n_lam": len(lams)}, worst, threshold)]


# ---------------------------------------------------------------------------
# tree checks


def _rel_err(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(a), abs(b))


def _check_rerooting(config, threshold):
    rng = substream(config.seed, "reroot")
    worst = 0.0
    for _ in range(config.reroot_trees):
        n = int(rng.integers(1, 65))
        tree = grow_uniform_attachment(n, rng)
        table = log_phi_all(tree)
        for v in range(1, n + 1):
            worst = max(worst, _rel_err(float(table.log_phi[v]),
                                        log_phi_direct(tree, v)))
    return [_record("rerooting_consistency",
                    {"trees": config.reroot_trees, "n_max": 64},
                    worst, threshold)]


def _check_size_conservation(config, threshold):
    rng = substream(config.seed, "size-conservation")
    worst = 0
    for _ in range(50):
        n = int(rng.integers(1, 33))
        tree = grow_uniform_attachment(n, rng)
        table = log_phi_all(tree)
        depth = np.zeros(n + 1, dtype=np.int64)
        for v in range(2, n + 1):
            depth[v] = depth[tree.parent[v]] + 1
        worst = max(worst, abs(int(table.subtree_size[2:].sum())
                               - int(depth.sum())))
    return [_record("subtree_size_conservation", {"trees": 50, "n_max": 32},
                    float(worst), threshold)]


def _relabeled_copy(tree: GrowingTree, rng: np.random.Generator):
    """Relabel the tree by a breadth-first visit from a random root with
    shuffled neighbor order; the visit order is a valid arrival order, so
    the result is again a GrowingTree.  Returns (copy, old->new labels)."""
    n = tree.n
    adj = [[] for _ in range(n + 1)]
    for v in range(2, n + 1):
        p = int(tree.parent[v])
        adj[v].append(p)
        adj[p].append(v)
    root = int(rng.integers(1, n + 1))
    new_label = np.zeros(n + 1, dtype=np.int64)
    new_parent = np.zeros(n + 1, dtype=np.int64)
    new_label[root] = 1
    queue = [root]
    assigned = 1
    while queue:
        u = queue.pop(0)
        neighbors = [w for w in adj[u] if new_label[w] == 0]
        rng.shuffle(neighbors)
        for w in neighbors:
            assigned += 1
            new_label[w] = assigned
            new_parent[assigned] = new_label[u]
            queue.append(w)
    return GrowingTree(n, new_parent), new_label


def _check_relabeling(config, threshold):
    rng = substream(config.seed, "relabel")
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 65))
        tree = grow_uniform_attachment(n, rng)
        relabeled, mapping = _relabeled_copy(tree, rng)
        phi = log_phi_all(tree).log_phi
        phi2 = log_phi_all(relabeled).log_phi
        # the multiset of scores is invariant ...
        diff = np.abs(np.sort(phi[1:]) - np.sort(phi2[1:]))
        worst = max(worst, float(diff.max()))
        # ... and per-vertex scores follow the relabeling
        per_vertex = np.abs(phi[1:] - phi2[mapping[1:]])
        worst = max(worst, float(per_vertex.max()))
    return [_record("relabeling_invariance", {"trees": 50, "n_max": 64},
                    worst, threshold)]


def _check_root_monotone(config, threshold):
    results = []
    ks = [k for k in _TREE_KS if k <= config.tree_n]
    for k in ks:
        results.append(root_finding_trial(
            config.tree_n, k, config.tree_trials,
            substream(config.seed, "root-finding", k)))
    worst = 0.0
    for a, b in zip(results, results[1:]):
        drop = a.rate - b.rate
        if drop <= 0.0:
            continue
        combined = math.sqrt(a.std_error**2 + b.std_error**2)
        worst = max(worst, drop / combined if combined > 0.0 else math.inf)
    params = {"n": config.tree_n, "trials": config.tree_trials,
              "ks": ks, "rates": [r.rate for r in results]}
    return [_record("root_finding_monotone", params, worst, threshold)]


def _check_degenerate_trees(config, threshold):
    rng = substream(config.seed, "degenerate")
    failures = 0.0
    single = log_phi_all(grow_uniform_attachment(1, rng))
    if single.log_phi[1] != 0.0 or top_k_central(single, 1) != [1]:
        failures = 1.0
    pair = log_phi_all(grow_uniform_attachment(2, rng))
    if (pair.log_phi[1] != 0.0 or pair.log_phi[2] != 0.0
            or top_k_central(pair, 2) != [1, 2]):
        failures = 1.0
    trial = root_finding_trial(2, 1, 100, rng)
    if trial.rate != 1.0:  # exact tie on the 2-path, broken toward label 1
        failures = 1.0
    return [_record("degenerate_trees", {"ns": [1, 2]}, failures, threshold)]


# ---------------------------------------------------------------------------
# suite assembly

_CHECK_FAMILIES = (
    ("sampler_equivalence_ks", _check_sampler_equivalence),
    ("beta_reduction_ks", _check_beta_reduction),
    ("moment_match", _check_moment_match),
    ("factor_count_gof", _check_factor_count_gof),
    ("sample_support", _check_sample_support),
    ("dual_poisson_identity", _check_dual_poisson_identity),
    ("tail_monte_carlo", _check_tail_monte_carlo),
    ("asymptotic_sandwich", _check_asymptotic_sandwich),
    ("moment_bound_dominance", _check_moment_bound_dominance),
    ("optimal_matches_grid_minimum", _check_optimal_grid_min),
    ("poisson_comparison_bound", _check_poisson_comparison),
    ("better_than_legacy", _check_better_than_legacy),
    ("poisson_tail_inequalities", _check_poisson_tail_ineq),
    ("factorial_ratio_inequalities", _check_factorial_ratio),
    ("asymptotic_log_residual", _check_log_residual),
    ("tail_monotonicity", _check_tail_monotonicity),
    ("rerooting_consistency", _check_rerooting),
    ("subtree_size_conservation", _check_size_conservation),
    ("relabeling_invariance", _check_relabeling),
    ("root_finding_monotone", _check_root_monotone),
    ("degenerate_trees", _check_degenerate_trees),
)


def default_tolerances(config: RunConfig) -> dict[str, float]:
    ks_critical = ks_two_sample_critical(
        0.001, config.ks_samples, config.ks_samples)
    return {
        "sampler_equivalence_ks": ks_critical,
        "beta_reduction_ks": ks_critical,
        "moment_match": 4.0,
        "factor_count_gof": 0.999,  # statistic is 1 - p_value
        "sample_support": 1e-12,
        "dual_poisson_identity": 1e-12,
        "tail_monte_carlo": 4.0,
        "asymptotic_sandwich": 1e-9,
        "moment_bound_dominance": 1e-9,
        "optimal_matches_grid_minimum": 0.05,
        "poisson_comparison_bound": 1e-9,
        "better_than_legacy": 1.0,
        "poisson_tail_inequalities": 1e-9,
        "factorial_ratio_inequalities": 1e-9,
        "asymptotic_log_residual": 5.0,
        "tail_monotonicity": 1e-9,
        "rerooting_consistency": 1e-9,
        "subtree_size_conservation": 0.5,
        "relabeling_invariance": 1e-9,
        "root_finding_monotone": 2.0,
        "degenerate_trees": 0.5,
    }


def run_verify_suite(config: RunConfig | None = None) -> VerificationReport:
    """Run every check family and return the assembled report.

    Deterministic given ``config.seed``: every stochastic check draws from
    a substream keyed by its family name, so families are independent and
    reordering them cannot change any statistic.
    """
    config = config if config is not None else RunConfig()
    tolerances = default_tolerances(config)
    tolerances.update(config.tolerance_overrides)
    start = time.perf_counter()
    checks: list[CheckRecord] = []
    for name, family in _CHECK_FAMILIES:
        threshold = tolerances[name] * config.tolerance_scale
        checks.extend(family(config, threshold))
    elapsed = time.perf_counter() - start
    overall = all(record.passed for record in checks)
    return VerificationReport(config.seed, overall, tuple(checks), elapsed)
