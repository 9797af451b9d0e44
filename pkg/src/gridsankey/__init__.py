"""Interactive exploration of factorial IR system grids.

Ingests TREC runs and qrels for a stoplist x stemmer x model grid,
computes an effectiveness-score tensor, and serves Sankey diagram
documents plus marginal/Dunnett statistics over an HTTP JSON API.
"""

__version__ = "0.1.0"

from .errors import GridSankeyError
from .ingest import (
    AXES,
    CollectionManifest,
    LoadedCollection,
    Qrels,
    SystemConfig,
    load_collection,
    load_manifest,
    parse_qrels,
    parse_run,
)
from .measures import MeasureRegistry, TopicScore, default_registry, evaluate_run
from .grid import (
    GridView,
    ScoreGrid,
    apply_filter,
    build_grid,
    default_view,
    export_scores,
    import_scores,
    score_vector,
)
from .stats import (
    CriticalValueCache,
    DunnettResult,
    MarginalStat,
    PairStat,
    dunnett_critical_value,
    dunnett_top_group,
    marginal_mean,
    pair_mean,
    top_systems,
)
from .sankey import (
    DisplayOptions,
    SankeyDoc,
    bin_index,
    build_diagram,
    canonical_json,
    doc_to_dict,
    scaling_range,
)
from .config import ServiceConfig, load_config

__all__ = [
    "AXES",
    "CollectionManifest",
    "CriticalValueCache",
    "DisplayOptions",
    "DunnettResult",
    "GridSankeyError",
    "GridView",
    "LoadedCollection",
    "MarginalStat",
    "MeasureRegistry",
    "PairStat",
    "Qrels",
    "SankeyDoc",
    "ScoreGrid",
    "ServiceConfig",
    "SystemConfig",
    "TopicScore",
    "apply_filter",
    "bin_index",
    "build_diagram",
    "build_grid",
    "canonical_json",
    "default_registry",
    "default_view",
    "doc_to_dict",
    "dunnett_critical_value",
    "dunnett_top_group",
    "evaluate_run",
    "export_scores",
    "import_scores",
    "load_collection",
    "load_config",
    "load_manifest",
    "marginal_mean",
    "pair_mean",
    "parse_qrels",
    "parse_run",
    "scaling_range",
    "score_vector",
    "top_systems",
    "__version__",
]
