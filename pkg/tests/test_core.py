import numpy as np
import pytest

import oracles as O
from npstationarity.core import (
    ArgumentError,
    DataError,
    EmbeddingConfig,
    Series,
    autocopula_eval,
    check_ties,
    embed,
    le2_matrix,
    marginal_edf,
    pseudo_observations,
)


def test_marginal_edf_examples():
    assert marginal_edf(Series([3, 1, 2, 5]), 1, 3, 1, 2) == pytest.approx(2 / 3)
    s = Series([0.5, 0.1, 0.9, 0.3])
    assert marginal_edf(s, 1, 3, 2, 0.5) == 0.75
    assert marginal_edf(s, 1, 3, 2, np.inf) == 1.0


@pytest.mark.parametrize("k,l", [(0, 2), (2, 1), (1, 4)])
def test_marginal_edf_range(k, l):
    with pytest.raises(ArgumentError):
        marginal_edf(Series([0.5, 0.1, 0.9, 0.3]), k, l, 2, 0.0)


def test_marginal_edf_monotone(rng):
    s = Series(rng.standard_normal(30))
    grid = np.linspace(-3, 3, 50)
    vals = [marginal_edf(s, 4, 20, 3, g) for g in grid]
    assert np.all(np.diff(vals) >= 0)


def test_embed_examples():
    assert embed(Series([1, 2, 3, 4]), 2).tolist() == [[1, 2], [2, 3], [3, 4]]
    pair = embed(Series([1, 2, 3, 4]), EmbeddingConfig(3, (3,)))
    assert pair.tolist() == [[[1, 3], [2, 4]]]
    x = [1.0, 5.0, 2.0, 7.0]
    assert embed(Series(x), 1)[:, 0].tolist() == x
    with pytest.raises(ArgumentError):
        embed(Series(x), 5)


def test_embedding_config_validation():
    with pytest.raises(ArgumentError):
        EmbeddingConfig(3, (4,))
    with pytest.raises(ArgumentError):
        EmbeddingConfig(3, (1,))
    with pytest.raises(ArgumentError):
        EmbeddingConfig(0)


def test_series_validation():
    with pytest.raises(DataError, match="position 3"):
        Series([1.0, 2.0, np.nan, 4.0])
    with pytest.raises(DataError):
        Series([1.0, 2.0, 3.0])
    with pytest.raises(DataError):
        Series(np.ones((4, 2)))
    s = Series([1, 2, 3, 4, 5])
    assert s.N == 5 and s.effective_n(2) == 4
    with pytest.raises(ValueError):
        s.values[0] = 3.0


def test_ties_modes():
    s = Series([1.0, 2.0, 2.0, 3.0])
    assert s.has_ties
    assert check_ties(s, "midrank")
    with pytest.raises(DataError):
        check_ties(s, "strict")
    with pytest.raises(ArgumentError):
        check_ties(s, "bogus")


def test_le2_matrix_without_ties_is_doubled_indicator(rng):
    x = rng.standard_normal(15)
    assert np.array_equal(le2_matrix(x), 2 * (x[:, None] <= x[None, :]))


def test_le2_matrix_midranks():
    x = np.array([1.0, 2.0, 2.0, 3.0])
    ranks2 = le2_matrix(x).sum(axis=0)
    assert ranks2.tolist() == [2, 5, 5, 8]  # doubled mid-ranks 1, 2.5, 2.5, 4


def test_autocopula_trivial_points(rng):
    s = Series(rng.standard_normal(20))
    assert autocopula_eval(s, 2, 15, 3, np.ones(3)) == 1.0
    assert autocopula_eval(s, 2, 15, 3, np.array([1.0, 0.0, 1.0])) == 0.0
    assert autocopula_eval(s, 5, 4, 3, np.ones(3)) == 0.0
    with pytest.raises(ArgumentError):
        autocopula_eval(s, 1, 5, 2, np.array([1.2, 0.5]))


def test_autocopula_example_matches_enumeration():
    x = [0.1, 0.9, 0.2, 0.8]
    # G over all four values: 0.1 -> 1/4, 0.9 -> 1, 0.2 -> 1/2, 0.8 -> 3/4, so the
    # pseudo-points are (1/4, 1), (1, 1/2), (1/2, 3/4) and none lies below (1/2, 1/2)
    val = autocopula_eval(Series(x), 1, 3, 2, np.array([0.5, 0.5]))
    assert val == O.autocopula(x, 1, 3, 2, [0.5, 0.5])
    assert val == 0.0
    assert autocopula_eval(Series(x), 1, 3, 2, np.array([0.5, 1.0])) == 2 / 3


def test_autocopula_margins(rng):
    x = rng.standard_normal(25)
    s = Series(x)
    k, l, h = 3, 18, 3
    for j in range(h):
        for uj in (0.2, 0.5, 0.9):
            u = np.ones(h)
            u[j] = uj
            expect = np.mean(
                [marginal_edf(s, k, l, h, x[i + j - 1]) <= uj for i in range(k, l + 1)]
            )
            assert autocopula_eval(s, k, l, h, u) == expect


def test_autocopula_monotone_in_u(rng):
    s = Series(rng.standard_normal(20))
    base = rng.random(2)
    for j in range(2):
        vals = []
        for t in np.linspace(0, 1, 21):
            u = base.copy()
            u[j] = t
            vals.append(autocopula_eval(s, 1, 19, 2, u))
        assert np.all(np.diff(vals) >= 0)


def test_autocopula_rank_invariance(rng):
    x = rng.standard_normal(22)
    for _ in range(20):
        u = rng.random(3)
        a = autocopula_eval(Series(x), 2, 17, 3, u)
        assert a == autocopula_eval(Series(np.exp(x) * 3 + 1), 2, 17, 3, u)
        assert a == autocopula_eval(Series(x**3), 2, 17, 3, u)


@pytest.mark.parametrize("h", [1, 2, 3])
def test_autocopula_brute_force(rng, h):
    for _ in range(5):
        N = int(rng.integers(8, 31))
        x = rng.standard_normal(N)
        n = N - h + 1
        k = int(rng.integers(1, n))
        l = int(rng.integers(k, n + 1))
        pts = pseudo_observations(Series(x), h).points
        for u in pts[::3]:
            assert autocopula_eval(Series(x), k, l, h, u) == O.autocopula(list(x), k, l, h, list(u))


def test_pseudo_observations_are_scaled_ranks(rng):
    x = rng.standard_normal(40)
    h = 3
    ps = pseudo_observations(Series(x), h)
    D = x.size
    assert ps.points.shape == (38, 3)
    assert np.all((ps.points > 0) & (ps.points <= 1))
    ranks = np.argsort(np.argsort(x)) + 1
    for j in range(h):
        assert np.array_equal(ps.points[:, j] * D, ranks[j : j + 38].astype(float))
