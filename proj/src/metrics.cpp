#include "tabattr/metrics.hpp"

#include <algorithm>

#include "tabattr/errors.hpp"

namespace tabattr {

namespace {

PRScore overlap_score(std::size_t pred_size, std::size_t gold_size, std::size_t inter) {
    PRScore s;
    s.pred_size = pred_size;
    s.gold_size = gold_size;
    s.intersection = inter;
    if (pred_size == 0 && gold_size == 0) {
        s.precision = s.recall = 1.0;
    } else if (pred_size == 0) {
        s.precision = 0.0;
        s.recall = 0.0;
    } else if (gold_size == 0) {
        s.precision = 0.0;
        s.recall = 1.0;
    } else {
        s.precision = static_cast<double>(inter) / static_cast<double>(pred_size);
        s.recall = static_cast<double>(inter) / static_cast<double>(gold_size);
    }
    return s;
}

template <typename T>
PRScore set_overlap(const std::set<T>& pred, const std::set<T>& gold) {
    std::size_t inter = 0;
    for (const auto& p : pred) inter += gold.count(p);
    return overlap_score(pred.size(), gold.size(), inter);
}

std::set<int> project_rows(const AttributionSet& cells) {
    std::set<int> out;
    for (const auto& c : cells) out.insert(c.row);
    return out;
}

std::set<int> project_cols(const AttributionSet& cells) {
    std::set<int> out;
    for (const auto& c : cells) out.insert(c.col);
    return out;
}

}  // namespace

PRScore cell_prf(const AttributionSet& pred, const AttributionSet& gold) {
    return set_overlap(pred, gold);
}

PRScore row_prf(const AttributionSet& pred, const AttributionSet& gold) {
    return set_overlap(project_rows(pred), project_rows(gold));
}

PRScore col_prf(const AttributionSet& pred, const AttributionSet& gold) {
    return set_overlap(project_cols(pred), project_cols(gold));
}

AggregateScore aggregate(const std::vector<PRScore>& scores) {
    if (scores.empty()) throw Error("aggregate over empty score list");
    AggregateScore out;
    for (const auto& s : scores) {
        out.precision += s.precision;
        out.recall += s.recall;
    }
    out.n = scores.size();
    out.precision /= static_cast<double>(scores.size());
    out.recall /= static_cast<double>(scores.size());
    return out;
}

double phrase_alignment_match_rate(const std::vector<PhraseAlignment>& pred,
                                   const std::vector<GoldGroup>& gold) {
    if (pred.empty()) return gold.empty() ? 1.0 : 0.0;
    std::size_t hits = 0;
    for (const auto& p : pred) {
        for (const auto& g : gold) {
            if (g.phrase && g.phrase->text == p.phrase.text && g.cells == p.cells) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

}  // namespace tabattr
