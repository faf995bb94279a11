"""Exact samplers for the clipped partial-sum product.

The random variable of interest is

    X = prod_i min(S_i, 1),    S_i = E_1 + ... + E_i,    E_k iid Exp(rate),

so only partial sums below 1 contribute factors and the product terminates
at the first S_i >= 1.  Three equivalent constructions are implemented:

* ``sample_x_direct``   -- simulate the partial sums literally;
* ``sample_x_compound`` -- draw N ~ Pois(rate) and multiply N standard
  uniforms (the arrival times of a unit-interval Poisson process are
  distributed as uniform order statistics, and the product does not care
  about their order);
* ``sample_x_beta``     -- factors B_k ~ Beta(shape, 1) entering through
  -log B_k, which is Exp(shape); identical in law to the direct sampler
  with rate = shape.

All products are accumulated in natural-log space; ``value`` is obtained by
exponentiation on demand (X underflows in double precision for draws with
many factors).  Closed-form moments are E[X^r] = exp(-r*rate/(1+r)).

Samplers are pure given their Generator, so independent streams may be used
concurrently; a single stream must not be shared across concurrent callers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SimParams",
    "XSample",
    "XBatch",
    "sample_x_direct",
    "sample_x_compound",
    "sample_x_beta",
    "sample_x_direct_batch",
    "sample_x_compound_batch",
    "sample_x_beta_batch",
    "moment_exact",
]

_UINT64_MAX = 2**64 - 1


@dataclass(frozen=True)
class SimParams:
    """Parameters for drawing X.

    ``lam`` is the exponential rate.  ``beta_shape`` is only consulted by
    the Beta-factor sampler and must lie in (0, 1].  ``rng_seed`` is the
    master seed a harness may use to derive the stream actually passed to
    the samplers.
    """

    lam: float
    beta_shape: float | None = None
    rng_seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0.0):
            raise ValueError(f"lam must be positive and finite, got {self.lam}")
        if self.beta_shape is not None and not (0.0 < self.beta_shape <= 1.0):
            raise ValueError(
                f"beta_shape must lie in (0, 1], got {self.beta_shape}")
        if not (0 <= int(self.rng_seed) <= _UINT64_MAX):
            raise ValueError("rng_seed must fit in an unsigned 64-bit integer")


@dataclass(frozen=True)
class XSample:
    """One draw of X: its value, natural log, and number of factors."""

    value: float
    log_value: float
    factor_count: int


@dataclass(frozen=True, eq=False)
class XBatch:
    """A vector of draws, kept in the log domain."""

    log_values: np.ndarray
    factor_counts: np.ndarray

    @property
    def values(self) -> np.ndarray:
        return np.exp(self.log_values)

    def __len__(self) -> int:
        return self.log_values.size


def _exp_increment(rng: np.random.Generator, lam: float) -> float:
    # inverse transform with U = 1 - random() in (0, 1], so log never sees 0
    return -math.log1p(-rng.random()) / lam


def sample_x_direct(params: SimParams, rng: np.random.Generator) -> XSample:
    """Draw one X by simulating the exponential partial sums directly.

    Each partial sum below 1 contributes log(S_i); the first S_i >= 1 stops
    the draw, since every later factor is clipped to 1.  ``factor_count`` is
    the number of contributing sums (0 means the product is empty and X = 1).
    """
    lam = params.lam
    s = 0.0
    log_value = 0.0
    count = 0
    while True:
        s += _exp_increment(rng, lam)
        if s >= 1.0:
            break
        log_value += math.log(s)
        count += 1
    return XSample(math.exp(log_value), log_value, count)


def sample_x_compound(params: SimParams, rng: np.random.Generator) -> XSample:
    """Draw one X as a product of N ~ Pois(lam) standard uniforms."""
    n = int(rng.poisson(params.lam))
    if n == 0:
        return XSample(1.0, 0.0, 0)
    log_value = float(np.log1p(-rng.random(n)).sum())
    return XSample(math.exp(log_value), log_value, n)


def sample_x_beta(params: SimParams, rng: np.random.Generator) -> XSample:
    """Draw one X from the Beta(shape, 1) factor construction.

    B_k is drawn as U^(1/shape); the partial sums accumulate -log B_k.  A B_k
    that underflows to 0 yields an infinite increment, which is harmless: any
    increment that alone reaches 1 ends the product either way.
    """
    if params.beta_shape is None:
        raise ValueError("beta_shape is required for the Beta-factor sampler")
    inv_shape = 1.0 / params.beta_shape
    s = 0.0
    log_value = 0.0
    count = 0
    while True:
        b = (1.0 - rng.random()) ** inv_shape
        s += -math.log(b) if b > 0.0 else math.inf
        if s >= 1.0:
            break
        log_value += math.log(s)
        count += 1
    return XSample(math.exp(log_value), log_value, count)


def _partial_sum_product_batch(increments, size: int) -> XBatch:
    """Vectorized core shared by the direct and Beta batch samplers.

    ``increments(m)`` must return m fresh positive increments.  Samples stay
    active until their running sum reaches 1; active samples accumulate
    log(sum) per round.
    """
    sums = np.zeros(size)
    log_values = np.zeros(size)
    counts = np.zeros(size, dtype=np.int64)
    alive = np.arange(size)
    while alive.size:
        updated = sums[alive] + increments(alive.size)
        below = updated < 1.0
        idx = alive[below]
        log_values[idx] += np.log(updated[below])
        counts[idx] += 1
        sums[alive] = updated
        alive = idx
    return XBatch(log_values, counts)


def sample_x_direct_batch(params: SimParams, rng: np.random.Generator,
                          size: int) -> XBatch:
    """Vectorized ``sample_x_direct``: ``size`` independent draws."""
    lam = params.lam
    return _partial_sum_product_batch(
        lambda m: -np.log1p(-rng.random(m)) / lam, size)


def sample_x_beta_batch(params: SimParams, rng: np.random.Generator,
                        size: int) -> XBatch:
    """Vectorized ``sample_x_beta``."""
    if params.beta_shape is None:
        raise ValueError("beta_shape is required for the Beta-factor sampler")
    inv_shape = 1.0 / params.beta_shape

    def increments(m):
        b = (1.0 - rng.random(m)) ** inv_shape
        with np.errstate(divide="ignore"):
            return -np.log(b)

    return _partial_sum_product_batch(increments, size)


def sample_x_compound_batch(params: SimParams, rng: np.random.Generator,
                            size: int) -> XBatch:
    """Vectorized ``sample_x_compound``."""
    counts = rng.poisson(params.lam, size).astype(np.int64)
    total = int(counts.sum())
    per_draw = np.log1p(-rng.random(total))
    cums = np.concatenate(([0.0], np.cumsum(per_draw)))
    offsets = np.concatenate(([0], np.cumsum(counts)))
    log_values = cums[offsets[1:]] - cums[offsets[:-1]]
    # a sample with zero factors must be exactly log 1 = 0
    log_values[counts == 0] = 0.0
    return XBatch(log_values, counts)


def moment_exact(order: float, lam: float) -> float:
    """E[X^order] = exp(-order * lam / (1 + order)), valid for order > -1.

    ``order`` may be any real above -1 (negative moments below that diverge).
    In particular E[X] = exp(-lam/2) and Var(X) = exp(-2*lam/3) - exp(-lam).
    """
    if not order > -1.0:
        raise ValueError(f"order must exceed -1, got {order}")
    if not (math.isfinite(lam) and lam > 0.0):
        raise ValueError(f"lam must be positive and finite, got {lam}")
    return math.exp(-order * lam / (1.0 + order))
