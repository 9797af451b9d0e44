"""Per-topic effectiveness measures and the measure registry.

All measure functions take a ranking (doc ids, best first) and a
topic-local judgment mapping ``doc -> grade`` (missing docs count as
grade 0, i.e. not relevant) and return a value in [0, 1].  Binary
relevance means grade >= 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .errors import UnknownMeasureError
from .ingest import Qrels

Ranking = Sequence[str]
Judgments = Mapping[str, int]

DEFAULT_RBP_P = 0.8


def average_precision(ranking: Ranking, judgments: Judgments, n_relevant: int) -> float:
    """Mean of precision at each relevant rank, divided by the number of
    relevant documents.  ``n_relevant == 0`` gives 0 by convention."""
    if n_relevant <= 0:
        return 0.0
    hits = 0
    total = 0.0
    for i, doc in enumerate(ranking, start=1):
        if judgments.get(doc, 0) >= 1:
            hits += 1
            total += hits / i
    return total / n_relevant


def precision_at(k: int, ranking: Ranking, judgments: Judgments) -> float:
    """Fraction of the top k that is relevant; short rankings pad with
    non-relevant documents."""
    if k < 1:
        raise ValueError("k must be >= 1")
    hits = sum(1 for doc in ranking[:k] if judgments.get(doc, 0) >= 1)
    return hits / k


def r_precision(ranking: Ranking, judgments: Judgments, n_relevant: int) -> float:
    """Precision at rank R where R is the number of relevant documents."""
    if n_relevant <= 0:
        return 0.0
    return precision_at(n_relevant, ranking, judgments)


def rank_biased_precision(p: float, ranking: Ranking, judgments: Judgments) -> float:
    """(1-p) * sum_i rel_i * p^(i-1) over the (truncated) ranking."""
    if not 0.0 < p < 1.0:
        raise ValueError("persistence p must lie in (0, 1)")
    total = 0.0
    weight = 1.0
    for doc in ranking:
        if judgments.get(doc, 0) >= 1:
            total += weight
        weight *= p
    return (1.0 - p) * total


def ndcg_at(k: int | None, ranking: Ranking, judgments: Judgments) -> float:
    """Normalized DCG with gain = grade and discount 1/log2(rank+1).

    The ideal ranking sorts the judged documents by descending grade;
    ``k=None`` means no cutoff.  IDCG = 0 gives 0 by convention.
    """
    if k is not None and k < 1:
        raise ValueError("k must be >= 1")
    cut = ranking if k is None else ranking[:k]
    dcg = sum(
        judgments.get(doc, 0) / math.log2(i + 1)
        for i, doc in enumerate(cut, start=1)
        if judgments.get(doc, 0) > 0
    )
    ideal = sorted((g for g in judgments.values() if g > 0), reverse=True)
    if k is not None:
        ideal = ideal[:k]
    idcg = sum(g / math.log2(i + 1) for i, g in enumerate(ideal, start=1))
    if idcg == 0.0:
        return 0.0
    return dcg / idcg


def err(ranking: Ranking, judgments: Judgments, g_max: int) -> float:
    """Expected reciprocal rank with satisfaction probability
    (2^g - 1) / 2^g_max at each rank."""
    if g_max < 1:
        raise ValueError("no graded scale: g_max must be >= 1")
    denom = 2.0 ** g_max
    total = 0.0
    p_continue = 1.0
    for i, doc in enumerate(ranking, start=1):
        grade = judgments.get(doc, 0)
        if grade > 0:
            r = (2.0 ** grade - 1.0) / denom
            total += p_continue * r / i
            p_continue *= 1.0 - r
    return total


# --- registry ----------------------------------------------------------------

# scorer(ranking, judgments, n_relevant) -> value in [0, 1]
TopicScorer = Callable[[Ranking, Judgments, int], float]


@dataclass(frozen=True)
class TopicScore:
    topic_id: str
    value: float


class MeasureRegistry:
    """Name -> scorer registry with a reserved slot for measures the
    grid declares but this package does not implement (Twist)."""

    RESERVED_IDS = ("Twist",)

    def __init__(self):
        self._scorers: dict[str, tuple[str, TopicScorer]] = {}

    def register(self, measure_id: str, scorer: TopicScorer) -> None:
        key = measure_id.casefold()
        if key in self._scorers:
            raise ValueError(f"measure {measure_id!r} already registered")
        self._scorers[key] = (measure_id, scorer)

    def get(self, measure_id: str) -> TopicScorer:
        entry = self._scorers.get(measure_id.casefold())
        if entry is None:
            raise UnknownMeasureError(f"unknown measure: {measure_id}", field="measure_id")
        return entry[1]

    def canonical_id(self, measure_id: str) -> str:
        entry = self._scorers.get(measure_id.casefold())
        if entry is None:
            raise UnknownMeasureError(f"unknown measure: {measure_id}", field="measure_id")
        return entry[0]

    def ids(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self._scorers.values())

    def slot_count(self) -> int:
        """Implemented measures plus reserved-but-unimplemented slots."""
        reserved = sum(
            1 for name in self.RESERVED_IDS if name.casefold() not in self._scorers
        )
        return len(self._scorers) + reserved


def default_registry(*, rbp_p: float = DEFAULT_RBP_P, max_grade: int = 1) -> MeasureRegistry:
    """The standard measure suite: AP, P@10, Rprec, RBP, nDCG, nDCG@20, ERR."""
    reg = MeasureRegistry()
    reg.register("AP", lambda r, j, n: average_precision(r, j, n))
    reg.register("P@10", lambda r, j, n: precision_at(10, r, j))
    reg.register("Rprec", lambda r, j, n: r_precision(r, j, n))
    reg.register("RBP", lambda r, j, n: rank_biased_precision(rbp_p, r, j))
    reg.register("nDCG", lambda r, j, n: ndcg_at(None, r, j))
    reg.register("nDCG@20", lambda r, j, n: ndcg_at(20, r, j))
    reg.register("ERR", lambda r, j, n: err(r, j, max_grade))
    return reg


def evaluate_run(
    run: Mapping[str, Ranking],
    qrels: Qrels,
    measure_id: str,
    topic_ids: Sequence[str],
    registry: MeasureRegistry,
) -> list[TopicScore]:
    """Score one run on every topic; topics missing from the run get the
    measure's empty-ranking value."""
    scorer = registry.get(measure_id)
    out = []
    for topic in topic_ids:
        ranking = run.get(topic, ())
        value = scorer(ranking, qrels.topic_judgments(topic), qrels.relevant_count(topic))
        out.append(TopicScore(topic_id=topic, value=value))
    return out
