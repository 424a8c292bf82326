#pragma once

#include <vector>

#include "tabattr/table.hpp"

namespace tabattr {

struct PRScore {
    double precision = 0.0;
    double recall = 0.0;
    std::size_t pred_size = 0;
    std::size_t gold_size = 0;
    std::size_t intersection = 0;
};

// Exact set overlap at cell granularity.
// Edge cases: both empty -> P=R=1; pred empty, gold non-empty -> P=R=0;
// pred non-empty, gold empty -> P=0, R=1.
PRScore cell_prf(const AttributionSet& pred, const AttributionSet& gold);

// Sets are projected to row (resp. column) index sets before overlap.
PRScore row_prf(const AttributionSet& pred, const AttributionSet& gold);
PRScore col_prf(const AttributionSet& pred, const AttributionSet& gold);

struct AggregateScore {
    double precision = 0.0;
    double recall = 0.0;
    std::size_t n = 0;
};

// Macro average: unweighted mean of per-instance precision and recall.
AggregateScore aggregate(const std::vector<PRScore>& scores);

// Auxiliary diagnostic: fraction of predicted alignments whose (phrase, cells)
// pair exactly matches a gold alignment group.
double phrase_alignment_match_rate(const std::vector<PhraseAlignment>& pred,
                                   const std::vector<GoldGroup>& gold);

}  // namespace tabattr
