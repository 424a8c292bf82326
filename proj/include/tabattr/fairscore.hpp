#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tabattr/agents.hpp"
#include "tabattr/gateway.hpp"
#include "tabattr/table.hpp"

namespace tabattr {

struct Fact {
    enum class Origin { Cell, Answer };
    std::string text;
    Origin origin = Origin::Answer;
    std::optional<CellRef> source;  // set for cell facts
    bool missing = false;           // empty cell value; excluded from alignment
};

// The (a, b, c, d) quadruple: a+b = answer facts, c+d = cell facts.
struct FactAlignmentCounts {
    std::size_t a = 0;  // answer facts supported by >= 1 cell fact
    std::size_t b = 0;  // unsupported answer facts
    std::size_t c = 0;  // cell facts matching >= 1 answer fact
    std::size_t d = 0;  // cell facts matching none
};

struct FairScore {
    double precision = 1.0;  // c / (c + d)
    double recall = 1.0;     // a / (a + b)
    bool precision_vacuous = false;
    bool recall_vacuous = false;
};

// Recall = a/(a+b), Precision = c/(c+d); a vacuous side scores 1 and is flagged.
FairScore fairscore(const FactAlignmentCounts& counts);

// Deterministic zero-LLM fact templates: "<row key>'s <header> is <value>."
// Empty cells yield facts flagged missing.
std::vector<Fact> cells_to_facts_template(const Table& table, const AttributionSet& cells);

// LLM-backed cell-to-fact conversion (one fact per cell, header + row key context).
std::vector<Fact> cells_to_facts(const Table& table, const AttributionSet& cells,
                                 Gateway& gateway, const AgentConfig& cfg,
                                 std::vector<std::string>* diagnostics = nullptr);

// LLM answer decomposition into atomic facts; zero facts fall back to the
// whole answer with a diagnostic.
std::vector<Fact> answer_to_facts(const std::string& answer, Gateway& gateway,
                                  const AgentConfig& cfg,
                                  std::vector<std::string>* diagnostics = nullptr);

// Pairwise support decision: does `cell_fact` support `answer_fact`?
using SupportJudge = std::function<bool(const Fact& cell_fact, const Fact& answer_fact)>;

// Scripted judges for offline use.
SupportJudge equality_judge();  // exact text equality
SupportJudge contains_judge();  // answer fact appears within cell fact (case-insensitive)

// LLM judge; pairs are batched up to 16 per request.
SupportJudge llm_support_judge(Gateway& gateway, const AgentConfig& cfg,
                               std::vector<std::string>* diagnostics = nullptr);

// Exhaustive pairwise alignment; missing-flagged cell facts are excluded.
FactAlignmentCounts align_facts(const std::vector<Fact>& cell_facts,
                                const std::vector<Fact>& answer_facts,
                                const SupportJudge& judge);

// LLM alignment over both fact lists with batched pair judging.
FactAlignmentCounts align_facts_llm(const std::vector<Fact>& cell_facts,
                                    const std::vector<Fact>& answer_facts, Gateway& gateway,
                                    const AgentConfig& cfg,
                                    std::vector<std::string>* diagnostics = nullptr);

}  // namespace tabattr
