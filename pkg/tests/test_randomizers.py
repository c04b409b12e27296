"""Randomizing densities: normalization, sampling, antithetic pairing."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from kernelgreeks import (
    OffsetSample,
    OutsideSupport,
    antithetic_of,
    gauss_legendre_integral,
    truncexp_randomizer,
    uniform_randomizer,
)


def test_constructor_validation():
    with pytest.raises(ValueError):
        uniform_randomizer(0.0)
    with pytest.raises(ValueError):
        truncexp_randomizer(-1.0, 0.5)
    with pytest.raises(ValueError):
        from kernelgreeks import Randomizer

        Randomizer(kind="gauss", epsilon=1.0)
    with pytest.raises(ValueError):
        from kernelgreeks import Randomizer

        Randomizer(kind="uniform", epsilon=1.0, theta=0.3)


def test_uniform_density():
    r = uniform_randomizer(0.5)
    assert r.density(0.1) == 1.0
    assert r.density(0.5) == 1.0  # closed support
    assert r.density(0.500001) == 0.0
    vals = r.density(np.array([-0.6, 0.0, 0.6]))
    assert list(vals) == [0.0, 1.0, 0.0]


def test_truncexp_density_at_zero():
    r = truncexp_randomizer(0.5, 1.0)
    assert r.density_at_zero() == pytest.approx(0.9595173756674719, rel=1e-15)
    assert r.density(0.0) == r.density_at_zero()
    assert uniform_randomizer(2.0).density_at_zero() == 0.25


def test_density_integrates_to_one():
    for r in (
        uniform_randomizer(0.5),
        truncexp_randomizer(0.5, 1.0),
        truncexp_randomizer(0.8, -2.0),
        truncexp_randomizer(1.5, 5.0),
    ):
        mass = gauss_legendre_integral(r.density, -r.epsilon, r.epsilon)
        assert mass == pytest.approx(1.0, abs=1e-12)


def test_theta_zero_recovers_uniform():
    u = uniform_randomizer(0.7)
    t = truncexp_randomizer(0.7, 0.0)
    grid = np.linspace(-0.7, 0.7, 41)
    assert np.max(np.abs(t.density(grid) - u.density(grid))) < 1e-12
    probe = np.linspace(0.0, 1.0, 17, endpoint=False)
    assert np.array_equal(t.sample_offsets(probe), u.sample_offsets(probe))


def test_small_theta_is_continuous():
    # the series branch and the sinh branch must agree at the crossover
    eps = 0.5
    below = truncexp_randomizer(eps, 0.999999e-6 / eps)
    above = truncexp_randomizer(eps, 1.000001e-6 / eps)
    assert below.density_at_zero() == pytest.approx(above.density_at_zero(), rel=1e-10)
    tiny = truncexp_randomizer(eps, 1e-8)
    grid = np.linspace(-eps, eps, 101)
    assert np.max(np.abs(tiny.density(grid) - 1.0)) <= 1e-6


def test_grad_log_density():
    assert uniform_randomizer(1.0).grad_log_density(0.3) == 0.0
    r = truncexp_randomizer(1.0, 2.5)
    assert r.grad_log_density(0.0) == 2.5
    assert np.all(r.grad_log_density(np.array([-1.0, 0.2, 1.0])) == 2.5)
    with pytest.raises(OutsideSupport):
        r.grad_log_density(1.0001)


def test_inverse_cdf_values():
    assert uniform_randomizer(0.5).sample_offsets(0.25) == pytest.approx(-0.25, abs=1e-15)
    assert uniform_randomizer(0.5).sample_offsets(0.0) == -0.5
    r = truncexp_randomizer(0.5, 1.0)
    assert r.sample_offsets(0.5) == pytest.approx(0.12011450695827745, rel=1e-14)


def test_inverse_cdf_monotone_and_clipped():
    r = truncexp_randomizer(0.5, 3.0)
    u = np.linspace(0.0, 1.0 - 1e-16, 1001)
    l = r.sample_offsets(u)
    assert np.all(np.diff(l) >= 0.0)
    assert l[0] == -0.5 and l[-1] <= 0.5


def test_uniforms_out_of_range_rejected():
    r = uniform_randomizer(1.0)
    with pytest.raises(ValueError):
        r.sample_offsets(1.0)
    with pytest.raises(ValueError):
        r.sample_offsets(-0.1)


def test_cdf_round_trip():
    rng = np.random.default_rng(7)
    u = rng.random(1000)
    for r in (uniform_randomizer(0.4), truncexp_randomizer(0.4, 1.7), truncexp_randomizer(2.0, -0.9)):
        assert np.max(np.abs(r.cdf(r.sample_offsets(u)) - u)) < 1e-12


def test_sample_offset_packages_shift():
    r = truncexp_randomizer(0.5, 1.0)
    s = r.sample_offset(0.5, 120.0)
    assert isinstance(s, OffsetSample)
    assert s.lam == 120.0 - s.offset


@pytest.mark.parametrize(
    "randomizer",
    [
        uniform_randomizer(0.5),
        truncexp_randomizer(0.5, 1.0),
        truncexp_randomizer(0.5, -2.0),
    ],
    ids=["uniform", "theta=1", "theta=-2"],
)
def test_sampled_offsets_match_analytic_cdf(randomizer):
    rng = np.random.default_rng(20260814)
    draws = randomizer.sample_offsets(rng.random(100_000))
    ks = stats.kstest(draws, randomizer.cdf).statistic
    assert ks < 0.01


def test_antithetic_example():
    s = OffsetSample(offset=0.25, lam=119.75)
    mirror = antithetic_of(s, 120.0)
    assert mirror == OffsetSample(offset=-0.25, lam=120.25)


def test_antithetic_is_involution():
    s = OffsetSample(offset=-0.4, lam=100.4)
    assert antithetic_of(antithetic_of(s, 100.0), 100.0) == s


@settings(max_examples=100, deadline=None)
@given(
    st.floats(0.01, 10.0),
    st.floats(-20.0, 20.0),
    st.floats(0.0, 1.0, exclude_max=True),
    st.floats(-1e4, 1e4),
)
def test_draws_stay_inside_support(eps, theta, u, lambda0):
    r = truncexp_randomizer(eps, theta)
    s = r.sample_offset(u, lambda0)
    assert abs(s.offset) <= eps
    assert s.lam == lambda0 - s.offset
    pair = antithetic_of(s, lambda0)
    assert (s.lam + pair.lam) / 2.0 == pytest.approx(lambda0, rel=1e-12, abs=1e-12)
