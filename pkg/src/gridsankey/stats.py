"""Marginal / pairwise means, top-k lists, and the Dunnett top group.

Everything here is computed fresh from a GridView, so a filter change is
reflected immediately.  Means are accumulated in a fixed order (systems
row-major, topics ascending — the grid storage order), which lets the
test suite compare against brute-force enumeration with ``==`` instead
of tolerances.

The Dunnett many-to-one test treats the empirically best system as the
control: two-sided, equal group sizes (one score per topic), pooled
within-system variance, equicorrelation 0.5.  Critical values are
estimated by seeded Monte Carlo and memoized per (k, df, alpha).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DataError,
    HiddenLevelError,
    InsufficientTopicsError,
    UnknownAxisError,
    UnknownLevelError,
)
from .grid import GridView, score_vector, topic_rows
from .ingest import AXES, SystemConfig

DEFAULT_ALPHA = 0.05
DEFAULT_RHO = 0.5
DEFAULT_REPLICATES = 200_000
DEFAULT_SEED = 42
_MC_CHUNK = 50_000  # fixed chunk size keeps the RNG stream deterministic


@dataclass(frozen=True)
class MarginalStat:
    """Mean of the current score vector over systems sharing one level."""

    axis: str
    level: str
    mean: float
    n_systems: int


@dataclass(frozen=True)
class PairStat:
    """Mean over systems sharing a level on each of two axes."""

    axis_a: str
    level_a: str
    axis_b: str
    level_b: str
    mean: float
    n_systems: int


@dataclass(frozen=True)
class TopSystem:
    config: SystemConfig
    system_id: str
    score: float


def require_visible(view: GridView, axis: str, level: str) -> None:
    """Raise if the level is unknown on the axis or filtered out."""
    if axis not in AXES:
        raise UnknownAxisError(f"unknown axis: {axis!r}", field="axis")
    if level not in view.grid.manifest.axes[axis]:
        raise UnknownLevelError(f"unknown {axis} level: {level!r}", field=axis)
    if level not in view.visible[axis]:
        raise HiddenLevelError(f"{axis} level {level!r} is hidden", field=axis)


def systems_matching(
    view: GridView, where: Mapping[str, str] | None = None
) -> list[SystemConfig]:
    """Visible systems carrying every (axis, level) constraint, row-major."""
    if where:
        for axis, level in where.items():
            require_visible(view, axis, level)
    vector = score_vector(view)
    out = []
    for config in vector:
        if where and any(config.level(a) != lv for a, lv in where.items()):
            continue
        out.append(config)
    return out


def _sequential_mean(values: Sequence[float]) -> float:
    acc = 0.0
    for v in values:
        acc += v
    return acc / len(values)


def marginal_mean(view: GridView, axis: str, level: str) -> MarginalStat:
    """Mean score over visible systems using ``level`` on ``axis``."""
    require_visible(view, axis, level)
    vector = score_vector(view)
    values = [s for cfg, s in vector.items() if cfg.level(axis) == level]
    if not values:
        raise DataError(f"no loaded systems use {axis}={level!r}", field=axis)
    return MarginalStat(axis=axis, level=level, mean=_sequential_mean(values), n_systems=len(values))


def marginal_means(view: GridView, axis: str) -> tuple[MarginalStat, ...]:
    """Marginal stats for every visible level of the axis, manifest order.

    Levels with no loaded system are skipped (they have no data to show).
    """
    if axis not in AXES:
        raise UnknownAxisError(f"unknown axis: {axis!r}", field="axis")
    vector = score_vector(view)
    by_level: dict[str, list[float]] = {}
    for cfg, s in vector.items():
        by_level.setdefault(cfg.level(axis), []).append(s)
    out = []
    for level in view.visible_levels(axis):
        values = by_level.get(level)
        if not values:
            continue
        out.append(MarginalStat(axis, level, _sequential_mean(values), len(values)))
    return tuple(out)


def pair_mean(
    view: GridView, a: tuple[str, str], b: tuple[str, str]
) -> PairStat:
    """Mean over visible systems having both levels; axes must differ."""
    axis_a, level_a = a
    axis_b, level_b = b
    if axis_a == axis_b:
        raise UnknownAxisError("pair axes must be distinct", field="axis")
    require_visible(view, axis_a, level_a)
    require_visible(view, axis_b, level_b)
    vector = score_vector(view)
    values = [
        s
        for cfg, s in vector.items()
        if cfg.level(axis_a) == level_a and cfg.level(axis_b) == level_b
    ]
    if not values:
        raise DataError(
            f"no loaded systems use {axis_a}={level_a!r} and {axis_b}={level_b!r}",
            field=axis_a,
        )
    return PairStat(axis_a, level_a, axis_b, level_b, _sequential_mean(values), len(values))


def pair_means(view: GridView, axis_a: str, axis_b: str) -> tuple[PairStat, ...]:
    """PairStats for every visible level combination with data, ordered
    by manifest level order on axis_a then axis_b."""
    if axis_a == axis_b:
        raise UnknownAxisError("pair axes must be distinct", field="axis")
    vector = score_vector(view)
    by_pair: dict[tuple[str, str], list[float]] = {}
    for cfg, s in vector.items():
        by_pair.setdefault((cfg.level(axis_a), cfg.level(axis_b)), []).append(s)
    out = []
    for level_a in view.visible_levels(axis_a):
        for level_b in view.visible_levels(axis_b):
            values = by_pair.get((level_a, level_b))
            if not values:
                continue
            out.append(
                PairStat(axis_a, level_a, axis_b, level_b, _sequential_mean(values), len(values))
            )
    return tuple(out)


def top_systems(
    view: GridView, where: Mapping[str, str] | None = None, k: int = 5
) -> list[TopSystem]:
    """Best-scoring visible systems under the constraint, descending
    score with ties broken by ascending system id."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if where:
        for axis, level in where.items():
            require_visible(view, axis, level)
    fmt = view.grid.manifest.format_system_id
    vector = score_vector(view)
    rows = [
        TopSystem(cfg, fmt(cfg), s)
        for cfg, s in vector.items()
        if not where or all(cfg.level(a) == lv for a, lv in where.items())
    ]
    rows.sort(key=lambda r: (-r.score, r.system_id))
    return rows[:k]


# --- Dunnett many-to-one test -------------------------------------------------


def dunnett_critical_value(
    k: int,
    df: int,
    alpha: float = DEFAULT_ALPHA,
    *,
    rho: float = DEFAULT_RHO,
    replicates: int = DEFAULT_REPLICATES,
    seed: int = DEFAULT_SEED,
) -> float:
    """Monte Carlo (1-alpha) quantile of max|T_i| over k equicorrelated
    t variates with df degrees of freedom.

    The equicorrelated normals are built from a shared component:
    Z_i = sqrt(rho)*Z0 + sqrt(1-rho)*X_i, then studentized by a common
    chi-square draw.  Deterministic for a fixed seed.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if df < 2:
        raise ValueError("df must be >= 2")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if not 0.0 <= rho < 1.0:
        raise ValueError("rho must lie in [0, 1)")
    if replicates < 1:
        raise ValueError("replicates must be >= 1")

    rng = np.random.default_rng(seed)
    sq_rho = math.sqrt(rho)
    sq_com = math.sqrt(1.0 - rho)
    maxima = np.empty(replicates)
    pos = 0
    while pos < replicates:
        n = min(_MC_CHUNK, replicates - pos)
        z0 = rng.standard_normal((n, 1))
        x = rng.standard_normal((n, k))
        w = rng.chisquare(df, size=(n, 1))
        t = (sq_rho * z0 + sq_com * x) / np.sqrt(w / df)
        maxima[pos : pos + n] = np.abs(t).max(axis=1)
        pos += n
    return float(np.quantile(maxima, 1.0 - alpha))


class CriticalValueCache:
    """Insert-only memo of critical values keyed by (k, df, alpha).

    Entries never change after insertion, so concurrent readers need no
    lock; the lock only serializes inserts.  A losing racer recomputes
    the same deterministic value, which is harmless.
    """

    def __init__(
        self,
        *,
        rho: float = DEFAULT_RHO,
        replicates: int = DEFAULT_REPLICATES,
        seed: int = DEFAULT_SEED,
    ):
        self.rho = rho
        self.replicates = replicates
        self.seed = seed
        self._values: dict[tuple[int, int, float], float] = {}
        self._lock = threading.Lock()

    def get(self, k: int, df: int, alpha: float = DEFAULT_ALPHA) -> float:
        key = (k, df, alpha)
        value = self._values.get(key)
        if value is None:
            value = dunnett_critical_value(
                k, df, alpha, rho=self.rho, replicates=self.replicates, seed=self.seed
            )
            with self._lock:
                self._values.setdefault(key, value)
        return value

    def __len__(self) -> int:
        return len(self._values)


@dataclass(frozen=True)
class DunnettEntry:
    system_id: str
    mean: float
    t: float  # 0.0 for the control; may be inf under zero pooled variance
    significant: bool
    is_control: bool


@dataclass(frozen=True)
class DunnettResult:
    control: str  # system id
    alpha: float
    df: int
    n_topics: int
    critical_value: float | None  # None when there is nothing to compare
    entries: tuple[DunnettEntry, ...]  # descending mean, ties ascending id

    @property
    def top_group(self) -> tuple[str, ...]:
        """Control plus every system not significantly below it,
        descending mean."""
        return tuple(e.system_id for e in self.entries if e.is_control or not e.significant)


def dunnett_top_group(
    system_ids: Sequence[str],
    rows: np.ndarray,
    alpha: float = DEFAULT_ALPHA,
    *,
    cache: CriticalValueCache | None = None,
    rho: float = DEFAULT_RHO,
    replicates: int = DEFAULT_REPLICATES,
    seed: int = DEFAULT_SEED,
) -> DunnettResult:
    """Compare every system against the best one (many-to-one, two-sided).

    ``rows`` is a (systems x topics) array of per-topic scores.  The
    control is the system with the highest mean (ties: ascending id);
    t_i = (mean_control - mean_i) / (s * sqrt(2/n)) with s^2 the pooled
    within-system variance and df = k_total * (n - 1).  Zero pooled
    variance makes every unequal mean significant by convention.
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] != len(system_ids):
        raise ValueError("rows must be a (len(system_ids) x topics) array")
    k_total, n = rows.shape
    if k_total < 1:
        raise ValueError("need at least one system")
    if n < 2:
        raise InsufficientTopicsError(
            f"insufficient topics: Dunnett needs >= 2 per-topic scores, got {n}"
        )
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")

    # Means and pooled variance in the documented order: per system the
    # topics accumulate ascending, systems contribute in input order.
    acc = np.zeros(k_total)
    for t_idx in range(n):
        acc += rows[:, t_idx]
    means = acc / n

    ss = 0.0
    for i in range(k_total):
        m = means[i]
        for t_idx in range(n):
            d = rows[i, t_idx] - m
            ss += d * d
    df = k_total * (n - 1)
    s2 = ss / df

    best = min(range(k_total), key=lambda i: (-means[i], system_ids[i]))
    control_id = system_ids[best]

    if k_total == 1:
        entry = DunnettEntry(control_id, float(means[0]), 0.0, False, True)
        return DunnettResult(control_id, alpha, df, n, None, (entry,))

    if cache is not None:
        critical = cache.get(k_total - 1, df, alpha)
    else:
        critical = dunnett_critical_value(
            k_total - 1, df, alpha, rho=rho, replicates=replicates, seed=seed
        )

    se = math.sqrt(s2 * 2.0 / n)
    entries = []
    for i in range(k_total):
        if i == best:
            entries.append(DunnettEntry(control_id, float(means[i]), 0.0, False, True))
            continue
        diff = float(means[best] - means[i])
        if se == 0.0:
            t = 0.0 if diff == 0.0 else math.inf
        else:
            t = diff / se
        entries.append(
            DunnettEntry(system_ids[i], float(means[i]), t, abs(t) > critical, False)
        )
    entries.sort(key=lambda e: (-e.mean, e.system_id))
    return DunnettResult(control_id, alpha, df, n, critical, tuple(entries))


def dunnett_for_view(
    view: GridView,
    configs: Sequence[SystemConfig],
    alpha: float = DEFAULT_ALPHA,
    *,
    cache: CriticalValueCache | None = None,
) -> DunnettResult:
    """Dunnett top group for a set of grid systems.

    Always uses the full per-topic score rows under the view's measure —
    a single-topic view changes which scores the diagram shows, but the
    significance test still needs per-topic replicates.
    """
    if not configs:
        raise DataError("no systems to compare")
    fmt = view.grid.manifest.format_system_id
    ids = [fmt(c) for c in configs]
    rows = topic_rows(view, configs)
    return dunnett_top_group(ids, rows, alpha, cache=cache)
