import math

import numpy as np
import pytest
from scipy.stats import ks_2samp

from prodtail import (
    SimParams,
    moment_exact,
    sample_x_beta,
    sample_x_beta_batch,
    sample_x_compound,
    sample_x_compound_batch,
    sample_x_direct,
    sample_x_direct_batch,
    substream,
)
from prodtail.verify import ks_two_sample_critical


class ScriptedRng:
    """Feeds predetermined uniform/Poisson draws to a sampler."""

    def __init__(self, uniforms=(), poissons=()):
        self.uniforms = list(uniforms)
        self.poissons = list(poissons)

    def random(self, size=None):
        if size is None:
            return self.uniforms.pop(0)
        return np.array([self.uniforms.pop(0) for _ in range(size)])

    def poisson(self, lam):
        return self.poissons.pop(0)


def uniform_for_exponential(e, lam):
    # the sampler computes increments as -log(1 - u)/lam
    return 1.0 - math.exp(-lam * e)


def test_direct_hand_trace():
    # increments 0.5, 0.3, 0.4 at rate 2: partial sums 0.5, 0.8, 1.2
    rng = ScriptedRng([uniform_for_exponential(e, 2.0) for e in (0.5, 0.3, 0.4)])
    sample = sample_x_direct(SimParams(lam=2.0), rng)
    assert sample.factor_count == 2
    assert sample.value == pytest.approx(0.5 * 0.8, rel=1e-12)
    assert sample.log_value == pytest.approx(math.log(0.4), rel=1e-12)


def test_direct_empty_product():
    rng = ScriptedRng([uniform_for_exponential(1.2, 1.0)])
    sample = sample_x_direct(SimParams(lam=1.0), rng)
    assert sample.value == 1.0
    assert sample.log_value == 0.0
    assert sample.factor_count == 0


def test_compound_zero_factors():
    sample = sample_x_compound(SimParams(lam=1.0), ScriptedRng(poissons=[0]))
    assert sample.value == 1.0
    assert sample.factor_count == 0


def test_compound_hand_trace():
    # factors are 1 - u, so u = 0.5, 0.8 gives the product 0.5 * 0.2
    rng = ScriptedRng(uniforms=[0.5, 0.8], poissons=[2])
    sample = sample_x_compound(SimParams(lam=1.0), rng)
    assert sample.factor_count == 2
    assert sample.value == pytest.approx(0.10, rel=1e-12)


def test_beta_empty_product():
    # shape 1: first factor B with -log B = 1.5 >= 1 ends the product
    rng = ScriptedRng([1.0 - math.exp(-1.5)])
    sample = sample_x_beta(SimParams(lam=1.0, beta_shape=1.0), rng)
    assert sample.value == 1.0
    assert sample.factor_count == 0


def test_beta_hand_trace():
    # shape 0.5: -log B = -2 log(1 - u); realize increments 0.5, 0.3, 0.4
    us = [1.0 - math.exp(-e / 2.0) for e in (0.5, 0.3, 0.4)]
    sample = sample_x_beta(SimParams(lam=0.5, beta_shape=0.5), ScriptedRng(us))
    assert sample.factor_count == 2
    assert sample.value == pytest.approx(0.40, rel=1e-10)


def test_beta_requires_shape():
    with pytest.raises(ValueError):
        sample_x_beta(SimParams(lam=1.0), ScriptedRng([0.5]))
    with pytest.raises(ValueError):
        sample_x_beta_batch(SimParams(lam=1.0), substream(0, "x"), 4)


def test_params_validation():
    with pytest.raises(ValueError):
        SimParams(lam=0.0)
    with pytest.raises(ValueError):
        SimParams(lam=-1.0)
    with pytest.raises(ValueError):
        SimParams(lam=1.0, beta_shape=0.0)
    with pytest.raises(ValueError):
        SimParams(lam=1.0, beta_shape=1.5)
    with pytest.raises(ValueError):
        SimParams(lam=1.0, rng_seed=-1)
    with pytest.raises(ValueError):
        moment_exact(-1.0, 1.0)
    with pytest.raises(ValueError):
        moment_exact(1.0, 0.0)


def test_moment_exact_values():
    assert moment_exact(0.0, 1.0) == 1.0
    assert moment_exact(1.0, 1.0) == pytest.approx(math.exp(-0.5), rel=1e-14)
    assert moment_exact(2.0, 1.0) == pytest.approx(math.exp(-2.0 / 3.0), rel=1e-14)
    variance = moment_exact(2.0, 1.0) - moment_exact(1.0, 1.0) ** 2
    assert variance == pytest.approx(math.exp(-2.0 / 3.0) - math.exp(-1.0), rel=1e-12)
    # fractional and negative orders above -1 are fine
    assert moment_exact(0.5, 2.0) == pytest.approx(math.exp(-2.0 / 3.0), rel=1e-14)
    assert moment_exact(-0.5, 1.0) == pytest.approx(math.e, rel=1e-14)


def test_batch_matches_scalar_distribution():
    params = SimParams(lam=1.0)
    n = 20_000
    rng = substream(11, "scalar-batch")
    scalar = np.array([sample_x_direct(params, rng).log_value for _ in range(n)])
    batch = sample_x_direct_batch(params, substream(11, "vector-batch"), n)
    stat = ks_2samp(scalar, batch.log_values).statistic
    assert stat < ks_two_sample_critical(0.001, n, n)


@pytest.mark.parametrize("sampler", [
    sample_x_direct_batch, sample_x_compound_batch, sample_x_beta_batch])
def test_batch_support_and_flags(sampler):
    params = SimParams(lam=2.0, beta_shape=1.0)
    batch = sampler(params, substream(7, sampler.__name__), 50_000)
    logs = batch.log_values
    assert np.isfinite(logs).all()
    assert (logs <= 0.0).all()
    np.testing.assert_array_equal(batch.factor_counts == 0, logs == 0.0)
    assert np.allclose(batch.values, np.exp(logs), rtol=0, atol=0)
    assert (batch.factor_counts >= 0).all()
    assert len(batch) == 50_000


def test_compound_batch_zero_heavy():
    batch = sample_x_compound_batch(SimParams(lam=0.05), substream(3, "zeros"), 10_000)
    zero = batch.factor_counts == 0
    assert zero.mean() > 0.9
    assert (batch.log_values[zero] == 0.0).all()


def test_substream_determinism():
    a = substream(42, "exp", 1).random(8)
    b = substream(42, "exp", 1).random(8)
    c = substream(42, "exp", 2).random(8)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
