"""Cell-level table attribution: tables, filters, metrics, pipeline, scoring."""

import json as _json

from ._tabattr import (
    AggregateScore,
    AttributionResult,
    ChatRequest,
    DatasetStats,
    Fact,
    FactAlignmentCounts,
    FairScore,
    Gateway,
    PRScore,
    QAInstance,
    TabAttrError,
    Table,
    aggregate,
    align_facts,
    argmax_rows,
    canonical_filter,
    cell_prf,
    col_prf,
    dataset_stats,
    fairscore,
    filter_rows,
    instance_from_json,
    load_dataset,
    row_prf,
    run_batch,
    run_pipeline,
    save_dataset,
    template_facts,
)
from ._tabattr import evaluate_json as _evaluate_json
from ._tabattr import fairscore_json as _fairscore_json

__all__ = [
    "AggregateScore",
    "AttributionResult",
    "ChatRequest",
    "DatasetStats",
    "Fact",
    "FactAlignmentCounts",
    "FairScore",
    "Gateway",
    "PRScore",
    "QAInstance",
    "TabAttrError",
    "Table",
    "aggregate",
    "align_facts",
    "argmax_rows",
    "canonical_filter",
    "cell_prf",
    "col_prf",
    "dataset_stats",
    "evaluate",
    "fairscore",
    "fairscore_report",
    "filter_rows",
    "instance_from_json",
    "load_dataset",
    "row_prf",
    "run_batch",
    "run_pipeline",
    "save_dataset",
    "template_facts",
]


def evaluate(results, instances):
    """Precision/recall report (row, col, cell granularity) as a dict."""
    return _json.loads(_evaluate_json(results, instances))


def fairscore_report(results, instances, facts="template", judge="contains", gateway=None):
    """Reference-less attribution quality report as a dict."""
    return _json.loads(_fairscore_json(results, instances, facts, judge, gateway))
