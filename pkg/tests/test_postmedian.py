import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import norm

from pensparse.exceptions import NumericalError
from pensparse.postmedian import (BRANCH_NEGATIVE, BRANCH_POSITIVE,
                                  BRANCH_ZERO_BY_ODDS,
                                  BRANCH_ZERO_CENTERED_SLAB, GridCdf,
                                  Normal, PosteriorMixture, SpikeSlabPrior,
                                  analytic_median, bisection_median,
                                  double_shrinkage_median, marginal_posterior,
                                  posterior_odds, threshold_vector,
                                  zero_odds_threshold)


def bayes_quadrature(pi, sigma, tau, y, lo=-20.0, hi=20.0, num=200_001):
    """Brute-force posterior for y|b ~ N(b, sigma^2), b ~ pi d0 + (1-pi) N(0, tau^2):
    atom mass plus mean/variance of the continuous part, by trapezoid."""
    beta = np.linspace(lo, hi, num)
    w = (1.0 - pi) * norm.pdf(y, loc=beta, scale=sigma) * norm.pdf(beta, 0.0, tau)
    atom_raw = pi * norm.pdf(y, 0.0, sigma)
    cont_raw = np.trapezoid(w, beta)
    pi_y = atom_raw / (atom_raw + cont_raw)
    mean_c = np.trapezoid(beta * w, beta) / cont_raw
    var_c = np.trapezoid(beta * beta * w, beta) / cont_raw - mean_c ** 2
    return pi_y, mean_c, var_c


def random_mixture(rng):
    pi_y = float(rng.uniform(0.0, 1.0))
    m = float(rng.uniform(-3.0, 3.0))
    s = float(rng.uniform(0.1, 3.0))
    return PosteriorMixture(atom_prob=pi_y, continuous=Normal(m, s))


# ------------------------------------------------------ marginal posterior

def test_marginal_posterior_no_atom_prior():
    prior = SpikeSlabPrior(atom_prob=0.0, slab=Normal(0.0, 2.0))
    mix = marginal_posterior(prior, 1.5, 1.0)
    assert mix.atom_prob == 0.0
    assert mix.continuous.mean == pytest.approx(1.5 * 4.0 / 5.0)
    assert mix.continuous.sd == pytest.approx(math.sqrt(4.0 / 5.0))


def test_marginal_posterior_degenerate_prior():
    prior = SpikeSlabPrior(atom_prob=1.0, slab=Normal(0.0, 1.0))
    for y in (-5.0, 0.0, 3.0):
        assert marginal_posterior(prior, y, 1.0).atom_prob == 1.0


def test_marginal_posterior_halfway_example():
    prior = SpikeSlabPrior(atom_prob=0.5, slab=Normal(0.0, 1.0))
    mix = marginal_posterior(prior, 0.0, 1.0)
    expected = math.sqrt(2.0) / (math.sqrt(2.0) + 1.0)
    assert mix.atom_prob == pytest.approx(expected, rel=1e-12)
    pi_q, _, _ = bayes_quadrature(0.5, 1.0, 1.0, 0.0)
    assert mix.atom_prob == pytest.approx(pi_q, rel=1e-9)


def test_marginal_posterior_against_quadrature_oracle():
    rng = np.random.default_rng(101)
    for _ in range(50):
        pi = float(rng.uniform(0.05, 0.95))
        sigma = float(rng.uniform(0.5, 2.0))
        tau = float(rng.uniform(0.5, 2.0))
        y = float(rng.uniform(-4.0, 4.0))
        mix = marginal_posterior(SpikeSlabPrior(pi, Normal(0.0, tau)), y, sigma)
        pi_q, mean_q, var_q = bayes_quadrature(pi, sigma, tau, y)
        assert mix.atom_prob == pytest.approx(pi_q, rel=1e-6)
        assert mix.continuous.mean == pytest.approx(mean_q, rel=1e-6, abs=1e-9)
        assert mix.continuous.sd ** 2 == pytest.approx(var_q, rel=1e-6)


def test_marginal_posterior_survives_huge_observations():
    prior = SpikeSlabPrior(atom_prob=0.9, slab=Normal(0.0, 1.0))
    mix = marginal_posterior(prior, 40.0, 1.0)
    assert 0.0 <= mix.atom_prob < 1e-6


def test_marginal_posterior_validation():
    prior = SpikeSlabPrior(atom_prob=0.5, slab=Normal(0.0, 1.0))
    with pytest.raises(ValueError):
        marginal_posterior(prior, 0.0, 0.0)
    grid_slab = GridCdf([-1.0, 0.0, 1.0], [0.2, 0.5, 0.8])
    with pytest.raises(ValueError):
        marginal_posterior(SpikeSlabPrior(0.5, grid_slab), 0.0, 1.0)


# ------------------------------------------------------------- odds, delta

def test_posterior_odds_values():
    fc = Normal(0.0, 1.0)
    assert posterior_odds(PosteriorMixture(0.5, fc)) == 1.0
    assert posterior_odds(PosteriorMixture(1.0 / 6.0, fc)) == pytest.approx(0.2)
    assert posterior_odds(PosteriorMixture(0.0, fc)) == 0.0
    assert posterior_odds(PosteriorMixture(1.0, fc)) == math.inf


def test_zero_odds_threshold_values():
    assert zero_odds_threshold(PosteriorMixture(0.3, Normal(0.0, 17.0))) == 0.0
    got = zero_odds_threshold(PosteriorMixture(0.3, Normal(1.0, 1.0)))
    assert got == pytest.approx(0.6826894921370859, abs=1e-12)
    got2 = zero_odds_threshold(PosteriorMixture(0.3, Normal(-2.0, 1.0)))
    assert got2 == pytest.approx(0.9544997361036416, abs=1e-12)
    # quadrature cross-check of the cdf behind the threshold
    mass, err = quad(lambda b: norm.pdf(b, 1.0, 1.0), -np.inf, 0.0)
    assert err < 1e-9
    assert got == pytest.approx(abs(1.0 - 2.0 * mass), abs=1e-9)


# --------------------------------------------------------- analytic median

def test_analytic_median_positive_branch_example():
    mix = PosteriorMixture(1.0 / 6.0, Normal(1.0, 1.0))
    res = analytic_median(mix)
    assert res.branch == BRANCH_POSITIVE
    assert res.sign == 1
    assert res.median == pytest.approx(0.7466528968642003, abs=1e-12)
    assert abs(res.median - bisection_median(mix, tol=1e-12)) <= 1e-10


def test_centered_slab_forces_zero_for_any_odds():
    for pi_y in (0.0, 0.2, 0.49, 0.7):
        mix = PosteriorMixture(pi_y, Normal(0.0, 5.0))
        res = analytic_median(mix)
        assert res.median == 0.0
        assert res.branch == BRANCH_ZERO_CENTERED_SLAB


def test_majority_atom_forces_zero():
    mix = PosteriorMixture(0.5, Normal(3.0, 1.0))
    res = analytic_median(mix)
    assert res.median == 0.0
    assert res.branch == BRANCH_ZERO_BY_ODDS
    assert res.delta < 1.0 <= res.odds


def test_boundary_odds_belong_to_zero_branch():
    delta = abs(1.0 - 2.0 * norm.cdf(0.0, 1.0, 1.0))
    pi_y = delta / (1.0 + delta)
    if pi_y / (1.0 - pi_y) < delta:  # guard the rounding of pi/(1-pi)
        pi_y = np.nextafter(pi_y, 1.0)
    mix = PosteriorMixture(pi_y, Normal(1.0, 1.0))
    res = analytic_median(mix)
    assert res.odds >= res.delta
    assert res.median == 0.0
    assert res.branch == BRANCH_ZERO_BY_ODDS
    assert bisection_median(mix, tol=1e-12) == 0.0


def test_atom_mass_one_never_touches_continuous():
    class Explosive:
        def cdf(self, x):
            raise AssertionError("F_c must not be evaluated")

        def quantile(self, q):
            raise AssertionError("F_c must not be evaluated")

    mix = PosteriorMixture(1.0, Explosive())
    res = analytic_median(mix)
    assert res.median == 0.0
    assert res.odds == math.inf
    assert bisection_median(mix) == 0.0


def test_negative_branch_mirror():
    mix = PosteriorMixture(1.0 / 6.0, Normal(-1.0, 1.0))
    res = analytic_median(mix)
    assert res.branch == BRANCH_NEGATIVE
    assert res.sign == -1
    assert res.median == pytest.approx(-0.7466528968642003, abs=1e-12)
    assert abs(res.median - bisection_median(mix, tol=1e-12)) <= 1e-10


# -------------------------------------------------------- double shrinkage

def test_double_shrinkage_matches_analytic_median():
    mix = PosteriorMixture(1.0 / 6.0, Normal(1.0, 1.0))
    res = analytic_median(mix)
    got = double_shrinkage_median(1.0, 1.0, Normal(0.0, 1.0).quantile,
                                  res.odds, res.delta)
    assert got == pytest.approx(res.median, abs=1e-10)


def test_double_shrinkage_zero_odds_keeps_continuous_median():
    for med_c in (2.5, -0.7):
        got = double_shrinkage_median(med_c, 1.3, Normal(0.0, 1.0).quantile,
                                      0.0, 0.9)
        assert got == med_c


def test_double_shrinkage_negative_mirror():
    mix = PosteriorMixture(1.0 / 6.0, Normal(-1.0, 1.0))
    res = analytic_median(mix)
    got = double_shrinkage_median(-1.0, 1.0, Normal(0.0, 1.0).quantile,
                                  res.odds, res.delta)
    assert got == pytest.approx(-0.7466528968642003, abs=1e-10)
    assert got == pytest.approx(bisection_median(mix, tol=1e-12), abs=1e-9)


def test_double_shrinkage_contract_violation():
    with pytest.raises(ValueError):
        double_shrinkage_median(1.0, 1.0, Normal(0.0, 1.0).quantile, 0.9, 0.5)
    with pytest.raises(ValueError):
        double_shrinkage_median(0.0, 1.0, Normal(0.0, 1.0).quantile, 0.1, 0.5)
    with pytest.raises(ValueError):
        double_shrinkage_median(1.0, 0.0, Normal(0.0, 1.0).quantile, 0.1, 0.5)


# ------------------------------------------------------------- oracle agree

def test_bisection_median_pure_continuous():
    mix = PosteriorMixture(0.0, Normal(2.0, 1.0))
    assert bisection_median(mix, tol=1e-10) == pytest.approx(2.0, abs=1e-9)


def test_bisection_median_majority_atom_is_exact_zero():
    rng = np.random.default_rng(55)
    for _ in range(25):
        mix = PosteriorMixture(float(rng.uniform(0.5, 1.0)),
                               Normal(float(rng.uniform(-3, 3)),
                                      float(rng.uniform(0.1, 3.0))))
        assert bisection_median(mix) == 0.0


def test_oracle_contract_on_random_mixtures():
    rng = np.random.default_rng(77)
    for _ in range(300):
        mix = random_mixture(rng)
        ana = analytic_median(mix).median
        assert abs(ana - bisection_median(mix, tol=1e-10)) <= 1e-8


def test_bisection_rejects_bad_tol():
    with pytest.raises(ValueError):
        bisection_median(PosteriorMixture(0.1, Normal(0.0, 1.0)), tol=0.0)


# ----------------------------------------------------------------- shapes

def test_zero_region_iff_odds_reach_threshold():
    rng = np.random.default_rng(88)
    for _ in range(300):
        mix = random_mixture(rng)
        res = analytic_median(mix)
        if res.median == 0.0:
            assert res.odds >= res.delta
        else:
            assert res.odds < res.delta


def test_shrinkage_dominance_and_sign():
    rng = np.random.default_rng(99)
    for _ in range(300):
        mix = random_mixture(rng)
        res = analytic_median(mix)
        med_c = mix.continuous.quantile(0.5)
        assert abs(res.median) <= abs(med_c) + 1e-12
        if res.median != 0.0:
            assert np.sign(res.median) == res.sign


def test_monotone_shrinkage_in_odds():
    fc = Normal(1.0, 1.0)
    delta = zero_odds_threshold(PosteriorMixture(0.0, fc))
    odds_grid = np.linspace(0.0, 1.5 * delta, 40)
    meds = []
    for odds in odds_grid:
        pi_y = odds / (1.0 + odds)
        meds.append(analytic_median(PosteriorMixture(pi_y, fc)).median)
    meds = np.array(meds)
    assert np.all(np.diff(meds) <= 1e-12)
    assert np.all(meds[odds_grid >= delta + 1e-12] == 0.0)


def test_monotone_shrinkage_in_scale():
    odds = 0.3
    pi_y = odds / (1.0 + odds)
    meds = []
    for s in np.linspace(0.2, 6.0, 30):
        meds.append(analytic_median(PosteriorMixture(pi_y, Normal(1.0, s))).median)
    meds = np.array(meds)
    assert np.all(np.diff(meds) <= 1e-12)
    assert meds[-1] == 0.0  # large scale: median no longer trustworthy


# ----------------------------------------------------------------- vector

def test_threshold_vector_all_zero():
    prior = SpikeSlabPrior(atom_prob=0.6, slab=Normal(0.0, 1.0))
    medians, support = threshold_vector(prior, np.zeros(5), 1.0)
    assert np.all(medians == 0.0)
    assert support == ()


def test_threshold_vector_strong_signal_survives():
    prior = SpikeSlabPrior(atom_prob=0.9, slab=Normal(0.0, 1.0))
    y = np.array([0.1, 10.0, -0.2])
    medians, support = threshold_vector(prior, y, 1.0)
    assert support == (1,)
    mix = marginal_posterior(prior, 10.0, 1.0)
    assert medians[1] == pytest.approx(bisection_median(mix, tol=1e-12), abs=1e-9)


def test_threshold_vector_support_shrinks_with_atom_mass():
    rng = np.random.default_rng(111)
    y = rng.normal(0.0, 2.0, size=12)
    sizes = []
    for pi in (0.1, 0.3, 0.5, 0.7, 0.9):
        prior = SpikeSlabPrior(atom_prob=pi, slab=Normal(0.0, 1.0))
        _, support = threshold_vector(prior, y, 1.0)
        sizes.append(len(support))
    assert all(a >= b for a, b in zip(sizes, sizes[1:]))


def test_threshold_vector_per_coordinate_atom_masses():
    prior = SpikeSlabPrior(atom_prob=np.array([0.05, 0.99]),
                           slab=Normal(0.0, 1.0))
    medians, support = threshold_vector(prior, np.array([2.0, 2.0]), 1.0)
    assert support == (0,)
    assert medians[1] == 0.0


# ----------------------------------------------------------------- GridCdf

def test_grid_cdf_slab_against_oracle():
    # stay inside ~5 sd so the tabulated cdf is strictly increasing in doubles
    pts = np.linspace(-5.0, 6.0, 4001)
    vals = norm.cdf(pts, loc=0.8, scale=1.1)
    fc = GridCdf(pts, vals)
    mix = PosteriorMixture(0.25, fc)
    ana = analytic_median(mix).median
    assert abs(ana - bisection_median(mix, tol=1e-10)) <= 1e-8


def test_grid_cdf_validation():
    with pytest.raises(ValueError):
        GridCdf([0.0, 1.0, 2.0], [0.2, 0.2, 0.8])  # flat region
    with pytest.raises(ValueError):
        GridCdf([0.0, 1.0], [0.0, 0.9])  # touches 0
    with pytest.raises(ValueError):
        GridCdf([1.0, 0.0], [0.2, 0.8])
    fc = GridCdf([0.0, 1.0], [0.3, 0.7])
    with pytest.raises(ValueError):
        fc.quantile(0.1)


def test_prior_validation():
    with pytest.raises(ValueError):
        SpikeSlabPrior(atom_prob=1.2, slab=Normal(0.0, 1.0))
    with pytest.raises(ValueError):
        Normal(0.0, 0.0)
    with pytest.raises(ValueError):
        PosteriorMixture(-0.1, Normal(0.0, 1.0))
