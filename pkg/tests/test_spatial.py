"""Point-process generators and the close-pair statistics behind them."""

import numpy as np
import pytest

from rcdp import gen_matern, gen_strauss, gen_uniform
from rcdp.spatial import close_pair_probability, n_close_pairs, nearest_neighbor_dists

BOUNDS = ((0.0, 80.0), (0.0, 30.0))


def test_close_pair_probability_frozen_value():
    # 80 x 30 rectangle, distance 7: the analytic pair probability
    assert close_pair_probability(80.0, 30.0, 7.0) == pytest.approx(
        0.0556155, abs=1e-6)


def test_n_close_pairs_is_strict():
    pts = np.array([[0.0, 0.0], [7.0, 0.0], [7.0, 6.9]])
    assert n_close_pairs(pts, 7.0) == 1  # the exact-distance pair is out
    assert n_close_pairs(pts, 7.01) == 2
    assert n_close_pairs(pts[:1], 7.0) == 0
    assert n_close_pairs(pts[:0], 7.0) == 0


def test_nearest_neighbor_dists():
    pts = np.array([[0.0, 0.0], [3.0, 0.0], [3.0, 4.0]])
    np.testing.assert_allclose(nearest_neighbor_dists(pts), [3.0, 3.0, 4.0])


def test_uniform_within_bounds_and_deterministic():
    pts = gen_uniform(200, np.random.default_rng(1), BOUNDS)
    assert pts.shape == (200, 2)
    assert (pts[:, 0] >= 0).all() and (pts[:, 0] <= 80).all()
    assert (pts[:, 1] >= 0).all() and (pts[:, 1] <= 30).all()
    again = gen_uniform(200, np.random.default_rng(1), BOUNDS)
    np.testing.assert_array_equal(pts, again)


def test_strauss_gamma_one_matches_uniform_pair_rate():
    """With gamma = 1 every configuration is equally likely, so the mean
    close-pair count must sit at the binomial expectation n-choose-2 * p."""
    n, r = 20, 7.0
    p = close_pair_probability(80.0, 30.0, r)
    expect = n * (n - 1) / 2 * p
    rng = np.random.default_rng(42)
    counts = [
        n_close_pairs(gen_strauss(n, rng, BOUNDS, inhibition=r, gamma=1.0,
                                  sweeps=40), r)
        for _ in range(500)
    ]
    mean = np.mean(counts)
    se = np.std(counts, ddof=1) / np.sqrt(len(counts))
    assert abs(mean - expect) < 3.0 * se + 0.05


def test_strauss_inhibition_reduces_close_pairs():
    n, r = 25, 7.0
    rng = np.random.default_rng(7)
    soft = np.mean([
        n_close_pairs(gen_strauss(n, rng, BOUNDS, inhibition=r, gamma=1.0,
                                  sweeps=50), r)
        for _ in range(120)
    ])
    hard = np.mean([
        n_close_pairs(gen_strauss(n, rng, BOUNDS, inhibition=r, gamma=0.5,
                                  sweeps=300), r)
        for _ in range(120)
    ])
    assert hard < 0.75 * soft


def test_strauss_stays_in_bounds():
    pts = gen_strauss(30, np.random.default_rng(3), BOUNDS, sweeps=100)
    assert (pts[:, 0] >= 0).all() and (pts[:, 0] <= 80).all()
    assert (pts[:, 1] >= 0).all() and (pts[:, 1] <= 30).all()


def test_matern_single_parent_concentrates():
    pts = gen_matern(15, np.random.default_rng(0), BOUNDS, n_parents=1,
                     cluster_radius=5.0)
    diff = pts[:, None, :] - pts[None, :, :]
    dmax = np.sqrt((diff ** 2).sum(axis=2)).max()
    assert dmax <= 10.0 + 1e-9  # everyone within one disk diameter


def test_matern_is_clustered_relative_to_uniform():
    """Variance-to-mean ratio of quadrat counts: clustering pushes it above
    the Poisson value of 1, uniform stays near it."""
    rng = np.random.default_rng(11)

    def vmr(gen):
        counts = []
        for _ in range(60):
            pts = gen()
            hist, _, _ = np.histogram2d(
                pts[:, 0], pts[:, 1], bins=(8, 3),
                range=((0, 80), (0, 30)))
            counts.extend(hist.ravel().tolist())
        counts = np.array(counts)
        return counts.var() / counts.mean()

    v_mat = vmr(lambda: gen_matern(40, rng, BOUNDS, cluster_radius=5.0))
    v_uni = vmr(lambda: gen_uniform(40, rng, BOUNDS))
    assert v_mat > 1.5
    assert v_uni < 1.5


def test_matern_empty_and_exact_count():
    assert gen_matern(0, np.random.default_rng(0), BOUNDS).shape == (0, 2)
    pts = gen_matern(37, np.random.default_rng(1), BOUNDS)
    assert pts.shape == (37, 2)
    assert (pts[:, 0] >= 0).all() and (pts[:, 0] <= 80).all()


def test_generators_deterministic_per_seed():
    for gen in (gen_strauss, gen_matern):
        a = gen(12, np.random.default_rng(99), BOUNDS)
        b = gen(12, np.random.default_rng(99), BOUNDS)
        np.testing.assert_array_equal(a, b)
