#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabattr/agents.hpp"
#include "tabattr/datasets.hpp"
#include "tabattr/fairscore.hpp"
#include "tabattr/metrics.hpp"

namespace tabattr {

nlohmann::json result_to_json(const AttributionResult& result);
AttributionResult result_from_json(const nlohmann::json& j);

void save_results(const std::string& path, const std::vector<AttributionResult>& results);
std::vector<AttributionResult> load_results(const std::string& path);

struct InstanceFailure {
    std::string instance_id;
    std::string message;
};

struct BatchOutcome {
    std::vector<AttributionResult> results;  // sorted by instance id
    std::vector<InstanceFailure> failures;
};

// Runs the pipeline over all instances with a bounded worker pool. Instance
// failures are recorded; the batch continues.
BatchOutcome run_batch(const std::vector<QAInstance>& instances, PipelineVariant variant,
                       Gateway& gateway, EntailmentJudge& judge, const AgentConfig& cfg,
                       int jobs = 4);

struct GranularityBlock {
    AggregateScore row;
    AggregateScore col;
    AggregateScore cell;
    std::size_t n = 0;
};

struct EvaluationReport {
    std::map<std::string, GranularityBlock> per_dataset;
    GranularityBlock overall;
    std::vector<std::string> warnings;  // id mismatches etc.
    std::string averaging = "macro";
};

// Joins results with gold instances by id; unmatched results are warned about
// and excluded.
EvaluationReport evaluate_results(const std::vector<AttributionResult>& results,
                                  const std::vector<QAInstance>& instances);

nlohmann::json evaluation_to_json(const EvaluationReport& report);
std::string evaluation_to_text(const EvaluationReport& report);

enum class FactsMode { Template, Llm };
enum class JudgeMode { Equality, Contains, Llm };

FactsMode facts_mode_from_string(const std::string& s);
JudgeMode judge_mode_from_string(const std::string& s);

struct FairScoreRecord {
    std::string instance_id;
    FactAlignmentCounts counts;
    FairScore score;
    std::vector<std::string> diagnostics;
};

struct FairScoreReport {
    std::vector<FairScoreRecord> records;  // sorted by instance id
    std::map<std::string, AggregateScore> per_dataset;  // macro means
    AggregateScore overall;
    // Calibration vs gold cell-level scores, when gold labels exist:
    // per-dataset {pred_p, actual_p, delta_p, pred_r, actual_r, delta_r}.
    nlohmann::json calibration;
    std::vector<std::string> warnings;
};

struct FairScoreConfig {
    FactsMode facts = FactsMode::Template;
    JudgeMode judge = JudgeMode::Contains;
    AgentConfig agent;
};

// gateway may be null when both facts and judge modes are offline.
FairScoreReport fairscore_results(const std::vector<AttributionResult>& results,
                                  const std::vector<QAInstance>& instances,
                                  const FairScoreConfig& cfg, Gateway* gateway);

nlohmann::json fairscore_to_json(const FairScoreReport& report);
std::string fairscore_to_text(const FairScoreReport& report);

}  // namespace tabattr
