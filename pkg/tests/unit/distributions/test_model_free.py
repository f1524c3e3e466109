import math

import numpy as np
import pytest
from scipy import special, stats

from advdrop.core.exceptions import ArgumentError, DomainError
from advdrop.services.distributions import (
    ModelFreeDist,
    cdf,
    dropout_rate,
    logit,
    mask_kl,
    mean_mask,
    normalization,
    pdf,
    sample_mask,
    seed_normalization,
)


def test_sigma_is_clamped_to_floor():
    assert ModelFreeDist(mu=0.0, sigma=1e-9).sigma == pytest.approx(1e-4)


def test_sigma_must_be_positive():
    with pytest.raises(ValueError):
        ModelFreeDist(mu=0.0, sigma=0.0)


def test_pdf_at_half():
    d = ModelFreeDist(mu=0.0, sigma=1.0)
    assert pdf(d, 0.5) == pytest.approx(4.0 / math.sqrt(2.0 * math.pi), abs=1e-6)
    assert pdf(d, 0.5) == pytest.approx(1.595769, abs=1e-6)


def test_pdf_outside_open_interval():
    with pytest.raises(DomainError):
        pdf(ModelFreeDist(mu=0.0, sigma=1.0), np.array([0.5, 1.0]))


def test_cdf_is_symmetric_at_half():
    assert cdf(ModelFreeDist(mu=0.0, sigma=2.0), 0.5) == pytest.approx(0.5)


def test_logit_is_clamped():
    assert np.isfinite(logit(0.0))
    assert logit(0.5) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("mu", [-3.0, 0.0, 3.0])
@pytest.mark.parametrize("sigma", [0.5, 1.0, 3.0])
def test_pdf_integrates_to_one(mu, sigma):
    assert normalization(ModelFreeDist(mu=mu, sigma=sigma)) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("mu", [-3.0, 0.0, 3.0])
@pytest.mark.parametrize("sigma", [0.5, 1.0, 3.0, 150.0])
def test_density_integrates_to_one_over_the_seed(mu, sigma):
    # Integrates in seed space r, m = sigmoid(r); at sigma=150 the masks round to 0 or 1.
    assert seed_normalization(ModelFreeDist(mu=mu, sigma=sigma)) == pytest.approx(1.0, abs=1e-6)


def _bin_fractions(mu, sigma, seed):
    samples = sample_mask(ModelFreeDist(mu=mu, sigma=sigma), 200_000, np.random.default_rng(seed))
    counts, _ = np.histogram(samples, bins=10, range=(0.0, 1.0))
    return counts / counts.sum()


def test_wide_seed_gives_u_shape():
    fractions = _bin_fractions(0.0, 3.0, 10)
    center = fractions[4:6].mean()
    assert fractions[0] > 3 * center and fractions[-1] > 3 * center
    assert fractions[1] > center and fractions[-2] > center


def test_moderate_seed_is_nearly_uniform():
    fractions = _bin_fractions(0.0, 1.6, 11)
    assert np.all((fractions > 0.075) & (fractions < 0.125))


def test_huge_seed_is_bernoulli_like():
    fractions = _bin_fractions(0.0, 150.0, 12)
    assert fractions[0] > 0.48 and fractions[-1] > 0.48
    assert fractions[1:-1].sum() < 0.03


def test_unit_seed_is_bell_shaped():
    fractions = _bin_fractions(0.0, 1.0, 13)
    assert int(np.argmax(fractions)) in (4, 5)
    assert fractions[0] < 0.25 * fractions[4] and fractions[-1] < 0.25 * fractions[5]


def test_shifted_seed_is_skewed_bell():
    fractions = _bin_fractions(-1.0, 1.0, 14)
    assert int(np.argmax(fractions)) == 1
    assert fractions[0] > fractions[-1]
    assert fractions[-1] < 0.01


def test_degenerate_seed_samples_near_half():
    samples = sample_mask(ModelFreeDist(mu=0.0, sigma=1e-9), 100, np.random.default_rng(0))
    np.testing.assert_allclose(samples, 0.5, atol=1e-3)


def test_samples_stay_in_open_interval():
    samples = sample_mask(ModelFreeDist(mu=0.0, sigma=150.0), 10_000, np.random.default_rng(0))
    assert np.all(samples > 0) and np.all(samples < 1)


def test_sample_count_must_be_positive():
    with pytest.raises(ArgumentError):
        sample_mask(ModelFreeDist(mu=0.0, sigma=1.0), 0, np.random.default_rng(0))


def test_sample_mean_for_low_rate_setting():
    samples = sample_mask(ModelFreeDist(mu=10.0, sigma=4.0), 200_000, np.random.default_rng(1))
    assert samples.mean() == pytest.approx(0.975, abs=0.01)


def test_samples_match_pdf():
    d = ModelFreeDist(mu=0.5, sigma=1.2)
    samples = sample_mask(d, 100_000, np.random.default_rng(2))
    edges = np.linspace(0.0, 1.0, 51)
    observed, _ = np.histogram(samples, bins=edges)
    expected = np.diff(cdf(d, np.clip(edges, 1e-12, 1 - 1e-12))) * len(samples)
    statistic, p_value = stats.chisquare(observed, expected * observed.sum() / expected.sum())
    assert p_value > 0.001


@pytest.mark.parametrize("mu, sigma, expected", [(3.0, 4.0, 0.752), (-1.0, 4.0, 0.408)])
def test_mean_mask_reference_values(mu, sigma, expected):
    assert mean_mask(mu, sigma) == pytest.approx(expected, abs=1e-3)


@pytest.mark.parametrize("mu, rate", [(10.0, 0.025), (3.0, 0.25), (-1.0, 0.6)])
def test_dropout_rate_reference_values(mu, rate):
    assert dropout_rate(mu, 4.0) == pytest.approx(rate, abs=0.01)


def test_mean_mask_monotone_in_mu():
    values = mean_mask(np.linspace(-5, 5, 21), np.full(21, 2.0))
    assert np.all(np.diff(values) > 0)


# Largest gaps of the closed form on the grid; everywhere else it stays within 0.01.
MEAN_MASK_WIDE_POINTS = {(-10.0, 4.0), (10.0, 4.0), (-10.0, 6.0), (10.0, 6.0)}


@pytest.fixture(scope="module")
def seed_noise():
    return np.random.default_rng(3).standard_normal(1_000_000)


@pytest.mark.parametrize("mu", [-10.0, -3.0, -1.0, 0.0, 1.0, 3.0, 10.0])
@pytest.mark.parametrize("sigma", [0.1, 1.0, 2.0, 3.0, 4.0, 6.0])
def test_mean_mask_close_to_monte_carlo(seed_noise, mu, sigma):
    empirical = float(np.mean(special.expit(mu + sigma * seed_noise)))
    gap = abs(mean_mask(mu, sigma) - empirical)
    if (mu, sigma) in MEAN_MASK_WIDE_POINTS:
        assert 0.01 < gap <= 0.02
    else:
        assert gap <= 0.01


def test_mean_mask_rejects_non_positive_sigma():
    with pytest.raises(DomainError):
        mean_mask(0.0, 0.0)


def test_mask_kl_identity_and_asymmetry():
    p = ModelFreeDist(mu=0.0, sigma=1.0)
    q = ModelFreeDist(mu=1.0, sigma=2.0)
    assert mask_kl(p, p) == 0.0
    assert mask_kl(p, q) > 0.0
    assert mask_kl(p, q) != pytest.approx(mask_kl(q, p))
