"""Run configuration shared by the CLI, the table emitters, and the
verification suite."""

from __future__ import annotations

from dataclasses import dataclass, field

DEFAULT_SEED = 20250617

__all__ = ["RunConfig", "DEFAULT_SEED"]


@dataclass
class RunConfig:
    """One harness run: which command, its grids, and reproducibility knobs.

    Verification scale knobs default to the full desk-scale suite; the CLI's
    ``--quick`` flag shrinks them for smoke runs.  ``tolerance_scale``
    multiplies every check threshold (0 artificially fails everything) and
    ``tolerance_overrides`` replaces thresholds per check family by name.
    """

    command: str = "verify"
    seed: int = DEFAULT_SEED
    t_grid: tuple[float, ...] = ()
    lambda_grid: tuple[float, ...] = ()
    mu_grid: tuple[float, ...] = ()
    nu_grid: tuple[float, ...] = ()
    n_grid: tuple[int, ...] = ()
    k_grid: tuple[int, ...] = ()
    trials: int = 200
    sample_count: int = 1000
    method: str = "direct"
    lam: float = 1.0
    beta_shape: float | None = None
    output_format: str = "csv"
    output_path: str | None = None
    # verification scale (defaults are the stated full suite)
    mc_samples: int = 1_000_000
    ks_samples: int = 100_000
    gof_samples: int = 100_000
    reroot_trees: int = 200
    tree_n: int = 1000
    tree_trials: int = 200
    tolerance_scale: float = 1.0
    tolerance_overrides: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.seed < 0 or self.seed > 2**64 - 1:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if self.output_format not in ("csv", "json"):
            raise ValueError(f"unknown output format {self.output_format!r}")
        if self.sample_count < 1:
            raise ValueError("sample_count must be at least 1")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.tolerance_scale < 0.0:
            raise ValueError("tolerance_scale must be nonnegative")
