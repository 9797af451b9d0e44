"""Marginal/pairwise means, top-k lists, and the Dunnett top group."""

from __future__ import annotations

import numpy as np
import pytest

from gridsankey.errors import (
    DataError,
    HiddenLevelError,
    InsufficientTopicsError,
    UnknownAxisError,
    UnknownLevelError,
)
from gridsankey.grid import GridView, apply_filter, default_view
from gridsankey.ingest import AXES, SystemConfig
from gridsankey.stats import (
    CriticalValueCache,
    dunnett_critical_value,
    dunnett_for_view,
    dunnett_top_group,
    marginal_mean,
    marginal_means,
    pair_mean,
    pair_means,
    require_visible,
    systems_matching,
    top_systems,
)

from . import oracles
from .conftest import make_synthetic_grid


def all_visible(grid):
    return {axis: set(grid.manifest.axes[axis]) for axis in AXES}


# --- marginal and pairwise means ----------------------------------------------


def test_marginal_mean_matches_brute_force_exactly(toy_grid):
    view = default_view(toy_grid, "AP")
    visible = all_visible(toy_grid)
    for axis in AXES:
        for level in toy_grid.manifest.axes[axis]:
            expected, n = oracles.brute_marginal_mean(toy_grid, visible, "AP", None, axis, level)
            stat = marginal_mean(view, axis, level)
            assert stat.mean == expected
            assert stat.n_systems == n == 9


def test_marginal_means_follow_manifest_order(toy_grid):
    view = default_view(toy_grid, "AP")
    stats = marginal_means(view, "stemmer")
    assert [s.level for s in stats] == ["nolug", "porter", "krovetz"]
    assert all(s.axis == "stemmer" for s in stats)


def test_marginal_means_respect_filters(toy_grid):
    view = apply_filter(default_view(toy_grid, "AP"), "stemmer", "porter", False)
    stats = marginal_means(view, "stemmer")
    assert [s.level for s in stats] == ["nolug", "krovetz"]
    # hiding a stemmer shrinks every stoplist marginal to 6 systems
    assert all(s.n_systems == 6 for s in marginal_means(view, "stoplist"))


def test_marginal_mean_single_topic_mode(toy_grid):
    view = default_view(toy_grid, "P@10", topic_id="303")
    expected, _ = oracles.brute_marginal_mean(
        toy_grid, all_visible(toy_grid), "P@10", "303", "model", "tfidf"
    )
    assert marginal_mean(view, "model", "tfidf").mean == expected


def test_marginal_mean_requires_loaded_data(toy_manifest):
    mask = np.ones(27, dtype=bool)
    mask[9:18] = False  # every stoplist=indri system
    grid = make_synthetic_grid(toy_manifest, loaded=mask)
    view = default_view(grid, "AP")
    with pytest.raises(DataError, match="no loaded systems use stoplist='indri'"):
        marginal_mean(view, "stoplist", "indri")
    assert [s.level for s in marginal_means(view, "stoplist")] == ["nostop", "lucene"]


def test_require_visible_error_paths(toy_grid):
    view = apply_filter(default_view(toy_grid, "AP"), "model", "tfidf", False)
    with pytest.raises(UnknownAxisError, match="unknown axis"):
        require_visible(view, "reranker", "x")
    with pytest.raises(UnknownLevelError, match="unknown model level"):
        require_visible(view, "model", "mystery")
    with pytest.raises(HiddenLevelError, match="model level 'tfidf' is hidden"):
        require_visible(view, "model", "tfidf")


def test_pair_mean_matches_brute_force_exactly(toy_grid):
    view = default_view(toy_grid, "P@10")
    visible = all_visible(toy_grid)
    for level_a in toy_grid.manifest.axes["stoplist"]:
        for level_b in toy_grid.manifest.axes["stemmer"]:
            expected, n = oracles.brute_pair_mean(
                toy_grid, visible, "P@10", None, "stoplist", level_a, "stemmer", level_b
            )
            stat = pair_mean(view, ("stoplist", level_a), ("stemmer", level_b))
            assert stat.mean == expected
            assert stat.n_systems == n == 3


def test_pair_mean_rejects_same_axis(toy_grid):
    view = default_view(toy_grid, "AP")
    with pytest.raises(UnknownAxisError, match="must be distinct"):
        pair_mean(view, ("model", "bm25"), ("model", "tfidf"))


def test_pair_means_enumerates_level_combinations(toy_grid):
    view = default_view(toy_grid, "AP")
    stats = pair_means(view, "stemmer", "model")
    assert len(stats) == 9
    assert [(s.level_a, s.level_b) for s in stats[:3]] == [
        ("nolug", "bm25"),
        ("nolug", "tfidf"),
        ("nolug", "dirichletlm"),
    ]
    assert all(s.n_systems == 3 for s in stats)


def test_pair_means_per_stage_weights_cover_the_grid(toy_grid):
    view = default_view(toy_grid, "AP")
    stats = pair_means(view, "stoplist", "stemmer")
    assert sum(s.n_systems for s in stats) == 27


def test_systems_matching_constraint(toy_grid):
    view = default_view(toy_grid, "AP")
    hits = systems_matching(view, {"stoplist": "indri", "model": "bm25"})
    assert len(hits) == 3
    assert all(c.stoplist == "indri" and c.model == "bm25" for c in hits)
    with pytest.raises(HiddenLevelError):
        systems_matching(
            apply_filter(view, "model", "bm25", False), {"model": "bm25"}
        )


# --- top systems ---------------------------------------------------------------


def make_scored_grid(toy_manifest, assignments, default=0.1):
    """Grid whose per-system average equals the assigned constant."""
    scores = np.full((27, 1, 4), default)
    for idx, value in assignments.items():
        scores[idx, 0, :] = value
    return make_grid_from_scores(toy_manifest, scores)


def make_grid_from_scores(manifest, scores):
    from gridsankey.grid import ScoreGrid

    return ScoreGrid(manifest, ("AP",), scores, np.ones(scores.shape[0], dtype=bool))


def test_top_systems_ordering_and_tie_break(toy_manifest):
    grid = make_scored_grid(toy_manifest, {0: 0.5, 1: 0.5, 2: 0.9})
    view = default_view(grid, "AP")
    top = top_systems(view, k=3)
    assert [t.system_id for t in top] == [
        "nostop_nolug_dirichletlm",  # 0.9
        "nostop_nolug_bm25",  # 0.5, id before the tied tfidf
        "nostop_nolug_tfidf",
    ]
    assert top[0].score == 0.9
    assert top[0].config == SystemConfig("nostop", "nolug", "dirichletlm")


def test_top_systems_k_clamps_to_population(toy_grid):
    view = default_view(toy_grid, "AP")
    assert len(top_systems(view, k=500)) == 27
    with pytest.raises(ValueError, match="k must be >= 1"):
        top_systems(view, k=0)


def test_top_systems_where_constraint(toy_grid):
    view = default_view(toy_grid, "AP")
    top = top_systems(view, where={"model": "tfidf"}, k=100)
    assert len(top) == 9
    assert all(t.config.model == "tfidf" for t in top)
    scores = [t.score for t in top]
    assert scores == sorted(scores, reverse=True)


def test_top_systems_hidden_constraint_rejected(toy_grid):
    view = apply_filter(default_view(toy_grid, "AP"), "model", "tfidf", False)
    with pytest.raises(HiddenLevelError):
        top_systems(view, where={"model": "tfidf"})


# --- Dunnett critical values -----------------------------------------------------


def test_critical_value_is_deterministic():
    a = dunnett_critical_value(5, 30, replicates=20_000)
    b = dunnett_critical_value(5, 30, replicates=20_000)
    assert a == b and a > 0


def test_critical_value_grows_with_k():
    small = dunnett_critical_value(2, 30, replicates=50_000)
    mid = dunnett_critical_value(5, 30, replicates=50_000)
    large = dunnett_critical_value(16, 30, replicates=50_000)
    assert small < mid < large


def test_critical_value_shrinks_with_df_and_alpha():
    tight_df = dunnett_critical_value(5, 30, replicates=50_000)
    loose_df = dunnett_critical_value(5, 98, replicates=50_000)
    assert loose_df < tight_df
    strict = dunnett_critical_value(5, 30, alpha=0.01, replicates=50_000)
    lax = dunnett_critical_value(5, 30, alpha=0.2, replicates=50_000)
    assert lax < strict


@pytest.mark.parametrize(
    "kwargs",
    [
        {"k": 0, "df": 30},
        {"k": 2, "df": 1},
        {"k": 2, "df": 30, "alpha": 0.0},
        {"k": 2, "df": 30, "alpha": 1.0},
        {"k": 2, "df": 30, "rho": 1.0},
        {"k": 2, "df": 30, "replicates": 0},
    ],
)
def test_critical_value_rejects_bad_parameters(kwargs):
    with pytest.raises(ValueError):
        dunnett_critical_value(**kwargs)


def test_critical_value_cache_memoizes():
    cache = CriticalValueCache(replicates=5_000)
    first = cache.get(3, 20)
    assert len(cache) == 1
    assert cache.get(3, 20) == first
    assert len(cache) == 1
    assert first == dunnett_critical_value(3, 20, replicates=5_000)
    cache.get(3, 20, alpha=0.01)
    assert len(cache) == 2


# --- Dunnett top group -----------------------------------------------------------


def rows_with_offsets(offsets, n=10, spread=0.04):
    """Per-topic rows: identical within-system deviations so pooled
    variance is known and means equal the offsets exactly."""
    dev = np.linspace(-spread, spread, n)
    dev -= dev.mean()  # exact zero-mean deviations
    return np.array([off + dev for off in offsets])


def test_dunnett_identical_systems_all_in_top_group():
    rows = rows_with_offsets([0.5, 0.5, 0.5], n=8)
    result = dunnett_top_group(["s1", "s2", "s3"], rows, cache=CriticalValueCache(replicates=5_000))
    assert result.top_group == ("s1", "s2", "s3")
    assert all(not e.significant for e in result.entries)
    assert all(e.t == 0.0 for e in result.entries)
    assert result.df == 3 * 7
    assert result.n_topics == 8


def test_dunnett_control_is_best_mean_with_ascending_id_ties():
    rows = rows_with_offsets([0.5, 0.7, 0.7], n=6)
    result = dunnett_top_group(["zz", "mm", "aa"], rows, cache=CriticalValueCache(replicates=5_000))
    assert result.control == "aa"
    assert result.entries[0].system_id == "aa" and result.entries[0].is_control
    assert result.entries[1].system_id == "mm"


def test_dunnett_zero_variance_distinct_means():
    rows = np.array([[0.4] * 5, [0.2] * 5])
    result = dunnett_top_group(["hi", "lo"], rows, cache=CriticalValueCache(replicates=5_000))
    assert result.control == "hi"
    low = result.entries[1]
    assert low.t == np.inf and low.significant
    assert result.top_group == ("hi",)


def test_dunnett_single_system_degenerates():
    rows = np.array([[0.3, 0.4, 0.5]])
    result = dunnett_top_group(["only"], rows)
    assert result.critical_value is None
    assert result.control == "only"
    assert result.top_group == ("only",)
    assert result.df == 2


def test_dunnett_requires_two_topics():
    with pytest.raises(InsufficientTopicsError, match="insufficient topics"):
        dunnett_top_group(["a", "b"], np.array([[0.5], [0.4]]))


def test_dunnett_validates_inputs():
    rows = rows_with_offsets([0.5, 0.4], n=4)
    with pytest.raises(ValueError, match="alpha"):
        dunnett_top_group(["a", "b"], rows, alpha=0.0)
    with pytest.raises(ValueError, match="rows"):
        dunnett_top_group(["a", "b", "c"], rows)


def test_dunnett_means_are_sequential_topic_sums():
    rng = np.random.default_rng(21)
    rows = rng.random((4, 7))
    result = dunnett_top_group(
        ["a", "b", "c", "d"], rows, cache=CriticalValueCache(replicates=5_000)
    )
    by_id = {e.system_id: e for e in result.entries}
    for i, system_id in enumerate(["a", "b", "c", "d"]):
        acc = 0.0
        for t in range(7):
            acc += float(rows[i, t])
        assert by_id[system_id].mean == acc / 7


def test_dunnett_t_statistics_are_nonnegative():
    rng = np.random.default_rng(33)
    rows = rng.random((6, 9))
    result = dunnett_top_group(
        [f"s{i}" for i in range(6)], rows, cache=CriticalValueCache(replicates=5_000)
    )
    assert all(e.t >= 0.0 for e in result.entries)
    controls = [e for e in result.entries if e.is_control]
    assert len(controls) == 1 and controls[0].t == 0.0 and not controls[0].significant


def test_dunnett_entries_sorted_by_descending_mean():
    rng = np.random.default_rng(8)
    rows = rng.random((5, 6))
    result = dunnett_top_group(
        [f"s{i}" for i in range(5)], rows, cache=CriticalValueCache(replicates=5_000)
    )
    means = [e.mean for e in result.entries]
    assert means == sorted(means, reverse=True)


def test_dunnett_result_ignores_input_order():
    rng = np.random.default_rng(13)
    rows = rng.random((5, 8))
    ids = [f"s{i}" for i in range(5)]
    cache = CriticalValueCache(replicates=10_000)
    forward = dunnett_top_group(ids, rows, cache=cache)
    perm = [3, 0, 4, 1, 2]
    shuffled = dunnett_top_group([ids[i] for i in perm], rows[perm], cache=cache)
    assert shuffled.control == forward.control
    assert shuffled.top_group == forward.top_group
    assert shuffled.critical_value == forward.critical_value
    assert {e.system_id: e.significant for e in shuffled.entries} == {
        e.system_id: e.significant for e in forward.entries
    }


def test_dunnett_stricter_alpha_grows_the_top_group():
    # middle system sits between the lax and strict thresholds
    rows = rows_with_offsets([0.6, 0.565, 0.3], n=10)
    cache = CriticalValueCache(replicates=50_000)
    strict = dunnett_top_group(["best", "mid", "far"], rows, alpha=0.001, cache=cache)
    lax = dunnett_top_group(["best", "mid", "far"], rows, alpha=0.30, cache=cache)
    assert strict.top_group == ("best", "mid")
    assert lax.top_group == ("best",)
    assert set(lax.top_group) <= set(strict.top_group)


def test_dunnett_alpha_monotonicity_on_random_rows():
    cache = CriticalValueCache(replicates=20_000)
    for seed in (1, 2, 3, 4, 5):
        rows = np.random.default_rng(seed).random((5, 8))
        ids = [f"s{i}" for i in range(5)]
        strict = set(dunnett_top_group(ids, rows, alpha=0.01, cache=cache).top_group)
        lax = set(dunnett_top_group(ids, rows, alpha=0.2, cache=cache).top_group)
        assert lax <= strict


def test_dunnett_for_view_ignores_topic_mode(toy_grid):
    cache = CriticalValueCache(replicates=10_000)
    configs = systems_matching(default_view(toy_grid, "AP"), {"stoplist": "indri"})
    averaged = dunnett_for_view(default_view(toy_grid, "AP"), configs, cache=cache)
    single = dunnett_for_view(
        default_view(toy_grid, "AP", topic_id="302"), configs, cache=cache
    )
    assert averaged == single
    assert averaged.n_topics == 4
    assert averaged.df == len(configs) * 3


def test_dunnett_for_view_needs_systems(toy_grid):
    with pytest.raises(DataError, match="no systems"):
        dunnett_for_view(default_view(toy_grid, "AP"), [])
