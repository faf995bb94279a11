"""Plot-ready table emitters (CSV or JSON, stdout or atomic file write).

Probabilities are printed with 12 significant digits and always accompanied
by their natural logs, so downstream plotting can work directly in the log
domain.  A cell that cannot be computed (a grid point outside a bound's
domain) becomes a per-row ``error`` marker instead of aborting the table.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys

from .config import RunConfig
from .sampling import (
    SimParams,
    sample_x_beta_batch,
    sample_x_compound_batch,
    sample_x_direct_batch,
)
from .streams import substream
from .tails import TailQuery, build_bound_report, poisson_ge_bound, poisson_ge_exact, tail_exact
from .trees import root_finding_trial

__all__ = [
    "BOUND_COLUMNS",
    "TAIL_COLUMNS",
    "POISSON_COLUMNS",
    "TREE_COLUMNS",
    "SAMPLE_COLUMNS",
    "build_bound_rows",
    "build_tail_rows",
    "build_poisson_rows",
    "build_tree_rows",
    "build_sample_rows",
    "emit_tail_table",
    "emit_tree_experiment",
    "write_table",
]

BOUND_COLUMNS = (
    "t", "lambda", "exact", "log_exact",
    "bound_optimal", "log_bound_optimal", "bound_moment_best_alpha",
    "legacy_bound",
    "asymptotic_lower", "log_asymptotic_lower",
    "asymptotic_upper", "log_asymptotic_upper",
    "error",
)
TAIL_COLUMNS = ("t", "lambda", "exact", "log_exact", "error")
POISSON_COLUMNS = ("mu", "nu", "prob_ge", "log_prob_ge",
                   "prob_gt", "log_prob_gt", "bound", "error")
TREE_COLUMNS = ("n", "k", "trials", "successes", "rate", "std_error", "error")
SAMPLE_COLUMNS = ("index", "value", "log_value", "factor_count")


def _sig12(value):
    """Round floats to 12 significant digits so CSV and JSON emissions of
    the same run carry identical values."""
    if isinstance(value, float) and math.isfinite(value):
        return float(f"{value:.12g}")
    return value


def _row(columns, **cells) -> dict:
    return {name: _sig12(cells.get(name)) for name in columns}


def build_bound_rows(t_grid, lambda_grid) -> list[dict]:
    rows = []
    for t in t_grid:
        for lam in lambda_grid:
            try:
                rep = build_bound_report(TailQuery(t=t, lam=lam))
            except ValueError as exc:
                rows.append(_row(BOUND_COLUMNS, t=float(t), **{"lambda": float(lam)},
                                 error=str(exc)))
                continue
            rows.append(_row(
                BOUND_COLUMNS,
                t=rep.t, exact=rep.exact, log_exact=rep.log_exact,
                bound_optimal=rep.bound_optimal,
                log_bound_optimal=rep.log_bound_optimal,
                bound_moment_best_alpha=rep.bound_moment_best_alpha,
                legacy_bound=rep.legacy_bound,
                asymptotic_lower=rep.asymptotic_lower,
                log_asymptotic_lower=rep.log_asymptotic_lower,
                asymptotic_upper=rep.asymptotic_upper,
                log_asymptotic_upper=rep.log_asymptotic_upper,
                **{"lambda": rep.lam},
            ))
    return rows


def build_tail_rows(t_grid, lambda_grid) -> list[dict]:
    rows = []
    for t in t_grid:
        for lam in lambda_grid:
            try:
                value = tail_exact(t, lam)
            except ValueError as exc:
                rows.append(_row(TAIL_COLUMNS, t=float(t),
                                 **{"lambda": float(lam)}, error=str(exc)))
                continue
            rows.append(_row(TAIL_COLUMNS, t=float(t), exact=value.prob,
                             log_exact=value.log_prob, **{"lambda": float(lam)}))
    return rows


def build_poisson_rows(mu_grid, nu_grid) -> list[dict]:
    rows = []
    for mu in mu_grid:
        for nu in nu_grid:
            try:
                ge = poisson_ge_exact(mu, nu)
                gt = poisson_ge_exact(mu, nu, strict=True)
                bound = poisson_ge_bound(mu, nu)
            except ValueError as exc:
                rows.append(_row(POISSON_COLUMNS, mu=float(mu), nu=float(nu),
                                 error=str(exc)))
                continue
            rows.append(_row(POISSON_COLUMNS, mu=float(mu), nu=float(nu),
                             prob_ge=ge.prob, log_prob_ge=ge.log_prob,
                             prob_gt=gt.prob, log_prob_gt=gt.log_prob,
                             bound=bound))
    return rows


def build_tree_rows(n_grid, k_grid, trials, seed) -> list[dict]:
    rows = []
    for n in n_grid:
        for k in k_grid:
            try:
                res = root_finding_trial(int(n), int(k), trials,
                                         substream(seed, "tree", int(n), int(k)))
            except ValueError as exc:
                rows.append(_row(TREE_COLUMNS, n=int(n), k=int(k),
                                 trials=trials, error=str(exc)))
                continue
            # a rate of exactly 0 or 1 makes the binomial SE estimate
            # degenerate; emit an undefined marker instead of 0
            se = res.std_error if 0.0 < res.rate < 1.0 else None
            rows.append(_row(TREE_COLUMNS, n=res.n, k=res.k, trials=res.trials,
                             successes=res.successes, rate=res.rate,
                             std_error=se))
    return rows


def build_sample_rows(params: SimParams, method: str, count: int, seed) -> list[dict]:
    if count < 1:
        raise ValueError(f"sample count must be at least 1, got {count}")
    rng = substream(seed, "sample", method)
    if method == "direct":
        batch = sample_x_direct_batch(params, rng, count)
    elif method == "compound":
        batch = sample_x_compound_batch(params, rng, count)
    elif method == "beta":
        batch = sample_x_beta_batch(params, rng, count)
    else:
        raise ValueError(f"unknown sampling method {method!r}")
    return [
        _row(SAMPLE_COLUMNS, index=i, value=float(v), log_value=float(lv),
             factor_count=int(c))
        for i, (v, lv, c) in enumerate(
            zip(batch.values, batch.log_values, batch.factor_counts))
    ]


def emit_tail_table(config: RunConfig) -> list[dict]:
    """One row per (t, lambda) with the full set of bound columns; writes
    to ``config.output_path`` (stdout if None) and returns the rows."""
    if not config.t_grid or not config.lambda_grid:
        raise ValueError("tail tables need non-empty t and lambda grids")
    rows = build_bound_rows(config.t_grid, config.lambda_grid)
    write_table(rows, BOUND_COLUMNS, config.output_format, config.output_path)
    return rows


def emit_tree_experiment(config: RunConfig) -> list[dict]:
    """One row per (n, k): empirical root-finding success rate and SE."""
    if not config.n_grid or not config.k_grid:
        raise ValueError("tree experiments need non-empty n and k grids")
    rows = build_tree_rows(config.n_grid, config.k_grid, config.trials,
                           config.seed)
    write_table(rows, TREE_COLUMNS, config.output_format, config.output_path)
    return rows


def render_csv(rows, columns) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format_cell(row.get(name)) for name in columns])
    return buffer.getvalue()


def render_json(rows, columns) -> str:
    ordered = [{name: row.get(name) for name in columns} for row in rows]
    return json.dumps(ordered, indent=2) + "\n"


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def write_table(rows, columns, output_format="csv", path=None) -> None:
    """Render and write the table, atomically when a path is given."""
    if output_format == "csv":
        text = render_csv(rows, columns)
    elif output_format == "json":
        text = render_json(rows, columns)
    else:
        raise ValueError(f"unknown output format {output_format!r}")
    if path is None:
        sys.stdout.write(text)
        return
    tmp_path = f"{path}.tmp"
    with open(tmp_path, "w", encoding="utf-8") as handle:
        handle.write(text)
    os.replace(tmp_path, path)
