#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tabattr/gateway.hpp"
#include "tabattr/prompts.hpp"
#include "tabattr/table.hpp"

namespace tabattr {

struct ColumnSelection {
    std::set<int> explicit_cols;  // values appear in the answer
    std::set<int> implicit_cols;  // needed for intermediate computation

    std::set<int> all() const {
        std::set<int> u = explicit_cols;
        u.insert(implicit_cols.begin(), implicit_cols.end());
        return u;
    }
};

struct SubQuestion {
    std::string text;
    std::string derived_fact;  // declarative restatement for the entailment gate
    bool verified = false;
};

struct SubAttribution {
    SubQuestion sub_question;
    AttributionSet cells;  // original table coordinates
};

enum class PipelineVariant { Standard, DecomposeBeforePrune, PerSubquery, NoPruning, NoDecomposition };

std::string to_string(PipelineVariant v);
PipelineVariant variant_from_string(const std::string& s);

struct AttributionResult {
    std::string instance_id;
    AttributionSet final_cells;
    std::vector<PhraseAlignment> phrase_alignments;
    ColumnSelection columns;
    std::string filter_text;
    std::set<int> kept_rows;
    std::vector<SubAttribution> sub_attributions;
    PipelineVariant variant = PipelineVariant::Standard;
    std::vector<std::string> diagnostics;
};

struct Judgment {
    bool entailed = false;
    double score = 0.0;
};

class EntailmentJudge {
public:
    virtual ~EntailmentJudge() = default;
    virtual Judgment judge(const std::string& premise, const std::string& hypothesis) = 0;
};

// Default backend: a yes/no prompt through the gateway.
class LlmEntailmentJudge : public EntailmentJudge {
public:
    LlmEntailmentJudge(Gateway& gateway, std::string model, const PromptLibrary& prompts);
    Judgment judge(const std::string& premise, const std::string& hypothesis) override;

private:
    Gateway& gateway_;
    std::string model_;
    const PromptLibrary& prompts_;
};

struct AgentConfig {
    std::string model = "gpt-4o";
    double temperature = 0.0;
    PromptLibrary prompts = PromptLibrary::builtin();
    bool drop_unverified_subquestions = false;
};

enum class AttributionMode { Joint, PerSubquery };

// Agent 1: column relevance identification.
ColumnSelection select_columns(const Table& table, const std::string& question,
                               const std::string& answer, Gateway& gateway,
                               const AgentConfig& cfg,
                               std::vector<std::string>* diagnostics = nullptr);

struct EvidenceRows {
    std::string filter_text;
    std::set<int> rows;
};

// Agent 2: filter generation + deterministic evaluation, with LLM row-listing
// fallback when the filter cannot be parsed or evaluated.
EvidenceRows extract_evidence_rows(const Table& table, const ColumnSelection& cols,
                                   const std::string& question, const std::string& answer,
                                   Gateway& gateway, const AgentConfig& cfg,
                                   std::vector<std::string>* diagnostics = nullptr);

// Agent 3: query decomposition with the NLI entailment gate.
std::vector<SubQuestion> decompose_query(const PrunedTable& pruned, const std::string& question,
                                         const std::string& answer, Gateway& gateway,
                                         EntailmentJudge& judge, const AgentConfig& cfg,
                                         std::vector<std::string>* diagnostics = nullptr);

// Agent 4: sub-query attribution. Returned coordinates are always mapped back
// to the original table; out-of-view coordinates are dropped with a diagnostic.
std::vector<SubAttribution> attribute_subqueries(const PrunedTable& pruned,
                                                 const std::vector<SubQuestion>& subqs,
                                                 const std::string& question,
                                                 const std::string& answer, Gateway& gateway,
                                                 AttributionMode mode, const AgentConfig& cfg,
                                                 std::vector<std::string>* diagnostics = nullptr);

struct Finalization {
    AttributionSet final_cells;
    std::vector<PhraseAlignment> alignments;
};

// Agent 5: phrase-to-cell alignment over the union of sub-attributions.
Finalization finalize(const Table& table, const std::string& answer,
                      const std::vector<SubAttribution>& sub_attrs, Gateway& gateway,
                      const AgentConfig& cfg,
                      std::vector<std::string>* diagnostics = nullptr);

// Full pipeline with, per variant, reordered or skipped stages.
AttributionResult run_pipeline(const QAInstance& instance, PipelineVariant variant,
                               Gateway& gateway, EntailmentJudge& judge,
                               const AgentConfig& cfg);

}  // namespace tabattr
