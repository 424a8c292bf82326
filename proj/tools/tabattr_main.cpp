// tabattr: attribution runs, evaluation, FAIRScore, ablations, dataset
// management, and LLM cache/transcript inspection.
//
// Exit codes: 0 success, 1 partial failures, 2 usage/config error.
#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "tabattr/datasets.hpp"
#include "tabattr/report.hpp"

using namespace tabattr;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunConfig {
    std::string data_path;
    std::string split = "gold";
    std::string variant = "Standard";
    std::string mode = "replay";  // live | cache | replay
    std::string transcript;
    std::string cache_dir;
    std::string record;
    std::string output;
    std::string prompts_dir;
    std::string model;
    std::string base_url;
    double temperature = 0.0;
    int jobs = 4;
    int limit = 0;  // 0 = all
    unsigned seed = 20240817;
};

json config_to_json(const RunConfig& cfg) {
    return {{"data", cfg.data_path},     {"split", cfg.split},
            {"variant", cfg.variant},    {"mode", cfg.mode},
            {"transcript", cfg.transcript}, {"cache_dir", cfg.cache_dir},
            {"model", cfg.model},        {"base_url", cfg.base_url},
            {"temperature", cfg.temperature}, {"jobs", cfg.jobs},
            {"limit", cfg.limit},        {"seed", cfg.seed},
            {"prompts", cfg.prompts_dir}};
}

void add_run_options(CLI::App* cmd, RunConfig& cfg, bool with_variant = true) {
    cmd->add_option("--data", cfg.data_path, "Dataset JSON-lines file")->required();
    cmd->add_option("--split", cfg.split, "Instance split: gold, silver, all");
    if (with_variant) {
        cmd->add_option("--variant", cfg.variant,
                        "Pipeline variant: Standard, DecomposeBeforePrune, PerSubquery, "
                        "NoPruning, NoDecomposition");
    }
    cmd->add_option("--mode", cfg.mode, "Gateway mode: live, cache, replay");
    cmd->add_option("--transcript", cfg.transcript, "Replay transcript (JSON-lines)");
    cmd->add_option("--cache-dir", cfg.cache_dir, "Response cache directory (cache mode)");
    cmd->add_option("--record", cfg.record, "Record every exchange to this transcript");
    cmd->add_option("--output", cfg.output, "Results file (JSON-lines)");
    cmd->add_option("--prompts", cfg.prompts_dir, "Prompt template directory");
    cmd->add_option("--model", cfg.model, "Model name (default: LLM_MODEL env or gpt-4o)");
    cmd->add_option("--base-url", cfg.base_url,
                    "API base URL (default: LLM_BASE_URL env or https://api.openai.com)");
    cmd->add_option("--temperature", cfg.temperature, "Sampling temperature");
    cmd->add_option("--jobs", cfg.jobs, "Worker pool size")->check(CLI::PositiveNumber);
    cmd->add_option("--limit", cfg.limit, "Random sample size (0 = all instances)");
    cmd->add_option("--seed", cfg.seed, "Sampling seed");
}

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v && *v ? v : fallback;
}

Gateway make_gateway(const RunConfig& cfg) {
    if (cfg.mode == "replay") {
        if (cfg.transcript.empty()) {
            throw UsageError("replay mode requires --transcript; pass the recorded JSON-lines "
                             "file or switch to --mode live");
        }
        return Gateway::replay(cfg.transcript);
    }
    if (cfg.mode != "live" && cfg.mode != "cache") {
        throw UsageError("unknown --mode '" + cfg.mode + "' (expected live, cache, replay)");
    }
    std::string key = env_or("LLM_API_KEY", "");
    if (key.empty()) {
        throw UsageError("live/cache mode requires the LLM_API_KEY environment variable; "
                         "export it or use --mode replay with a transcript");
    }
    std::string base = cfg.base_url.empty() ? env_or("LLM_BASE_URL", "https://api.openai.com")
                                            : cfg.base_url;
    auto backend = std::make_shared<HttpBackend>(base, key);
    Gateway gw = Gateway::live(backend, cfg.mode == "cache" ? cfg.cache_dir : "");
    return gw;
}

AgentConfig make_agent_config(const RunConfig& cfg) {
    AgentConfig agent;
    agent.model = cfg.model.empty() ? env_or("LLM_MODEL", "gpt-4o") : cfg.model;
    agent.temperature = cfg.temperature;
    if (!cfg.prompts_dir.empty()) agent.prompts = PromptLibrary::from_dir(cfg.prompts_dir);
    return agent;
}

std::vector<QAInstance> load_instances(const RunConfig& cfg) {
    LoadResult res = load_dataset(cfg.data_path, split_filter_from_string(cfg.split));
    for (const auto& e : res.errors) {
        std::cerr << "warning: " << cfg.data_path << ":" << e.line << ": " << e.message << "\n";
    }
    if (res.instances.empty()) throw UsageError("no usable instances in " + cfg.data_path);
    if (cfg.limit > 0 && static_cast<std::size_t>(cfg.limit) < res.instances.size()) {
        std::mt19937 rng(cfg.seed);
        std::shuffle(res.instances.begin(), res.instances.end(), rng);
        res.instances.erase(res.instances.begin() + cfg.limit, res.instances.end());
        std::sort(res.instances.begin(), res.instances.end(),
                  [](const QAInstance& a, const QAInstance& b) { return a.id < b.id; });
    }
    return res.instances;
}

int run_attribute_once(const RunConfig& cfg, PipelineVariant variant,
                       const std::vector<QAInstance>& instances,
                       std::vector<AttributionResult>* results_out) {
    Gateway gw = make_gateway(cfg);
    if (!cfg.record.empty()) gw.record_to(cfg.record);
    AgentConfig agent = make_agent_config(cfg);
    LlmEntailmentJudge judge(gw, agent.model, agent.prompts);

    BatchOutcome batch = run_batch(instances, variant, gw, judge, agent, cfg.jobs);
    for (const auto& f : batch.failures) {
        std::cerr << "failure: " << f.instance_id << ": " << f.message << "\n";
    }
    if (!cfg.output.empty()) save_results(cfg.output, batch.results);
    if (results_out) *results_out = batch.results;
    std::cerr << batch.results.size() << " instances attributed, " << batch.failures.size()
              << " failures (" << gw.requests_served() << " gateway requests)\n";
    return batch.failures.empty() ? 0 : 1;
}

int cmd_import(const std::string& format, const std::string& input, const std::string& output,
               const std::string& split_str) {
    Split split = split_str == "silver" ? Split::Silver : Split::Gold;
    std::vector<QAInstance> instances;
    if (format == "totto") instances = import_totto(input, split);
    else if (format == "fetaqa") instances = import_fetaqa(input, split);
    else if (format == "aitqa") instances = import_aitqa(input);
    else throw UsageError("unknown --format '" + format + "' (expected totto, fetaqa, aitqa)");
    if (instances.empty()) throw UsageError("no instances imported from " + input);
    save_dataset(output, instances);

    std::size_t gold = 0;
    for (const auto& inst : instances) gold += inst.split == Split::Gold;
    std::cout << "imported " << instances.size() << " instances (" << gold << " gold, "
              << instances.size() - gold << " silver) -> " << output << "\n";
    return 0;
}

int cmd_stats(const std::string& data_path, const std::string& split, bool as_json) {
    LoadResult res = load_dataset(data_path, split_filter_from_string(split));
    for (const auto& e : res.errors) {
        std::cerr << "warning: line " << e.line << ": " << e.message << "\n";
    }
    auto all = stats(res.instances);
    if (as_json) {
        json out = json::array();
        for (const auto& s : all) {
            out.push_back({{"dataset", s.name},
                           {"total", s.total},
                           {"gold", s.gold},
                           {"silver", s.silver},
                           {"rows", {{"min", s.rows.min}, {"max", s.rows.max},
                                     {"mean", s.rows.mean}}},
                           {"cols", {{"min", s.cols.min}, {"max", s.cols.max},
                                     {"mean", s.cols.mean}}},
                           {"answer_bytes", {{"min", s.answer_length.min},
                                             {"max", s.answer_length.max},
                                             {"mean", s.answer_length.mean}}}});
        }
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "dataset\ttotal\tgold\tsilver\trows(min/mean/max)\tcols(min/mean/max)\n";
        for (const auto& s : all) {
            std::cout << s.name << "\t" << s.total << "\t" << s.gold << "\t" << s.silver << "\t"
                      << s.rows.min << "/" << s.rows.mean << "/" << s.rows.max << "\t"
                      << s.cols.min << "/" << s.cols.mean << "/" << s.cols.max << "\n";
        }
    }
    return res.errors.empty() ? 0 : 1;
}

int cmd_evaluate(const std::string& results_path, const std::string& data_path, bool as_json) {
    std::vector<AttributionResult> results = load_results(results_path);
    if (results.empty()) throw UsageError("empty results file: " + results_path);
    LoadResult data = load_dataset(data_path, SplitFilter::All);
    EvaluationReport report = evaluate_results(results, data.instances);
    std::cout << (as_json ? evaluation_to_json(report).dump(2) + "\n"
                          : evaluation_to_text(report));
    return report.warnings.empty() ? 0 : 1;
}

int cmd_fairscore(const std::string& results_path, const std::string& data_path,
                  const std::string& facts, const std::string& judge, bool as_json,
                  const RunConfig& run) {
    std::vector<AttributionResult> results = load_results(results_path);
    if (results.empty()) throw UsageError("empty results file: " + results_path);
    LoadResult data = load_dataset(data_path, SplitFilter::All);

    FairScoreConfig cfg;
    cfg.facts = facts_mode_from_string(facts);
    cfg.judge = judge_mode_from_string(judge);
    cfg.agent = make_agent_config(run);

    bool needs_llm = cfg.facts == FactsMode::Llm || cfg.judge == JudgeMode::Llm;
    if (needs_llm) {
        Gateway gw = make_gateway(run);
        if (!run.record.empty()) gw.record_to(run.record);
        FairScoreReport report = fairscore_results(results, data.instances, cfg, &gw);
        std::cout << (as_json ? fairscore_to_json(report).dump(2) + "\n"
                              : fairscore_to_text(report));
        return report.warnings.empty() ? 0 : 1;
    }
    FairScoreReport report = fairscore_results(results, data.instances, cfg, nullptr);
    std::cout << (as_json ? fairscore_to_json(report).dump(2) + "\n"
                          : fairscore_to_text(report));
    return report.warnings.empty() ? 0 : 1;
}

int cmd_ablate(const RunConfig& cfg, bool as_json) {
    std::vector<QAInstance> instances = load_instances(cfg);
    const PipelineVariant variants[] = {
        PipelineVariant::Standard, PipelineVariant::DecomposeBeforePrune,
        PipelineVariant::PerSubquery, PipelineVariant::NoPruning,
        PipelineVariant::NoDecomposition};

    int exit_code = 0;
    json table = json::array();
    std::cout << (as_json ? "" : "variant\trow P\trow R\tcol P\tcol R\tcell P\tcell R\n");
    for (PipelineVariant v : variants) {
        RunConfig per = cfg;
        if (!cfg.output.empty()) {
            fs::path base(cfg.output);
            per.output = (base.parent_path() /
                          (base.stem().string() + "." + to_string(v) + base.extension().string()))
                             .string();
        }
        std::vector<AttributionResult> results;
        exit_code = std::max(exit_code, run_attribute_once(per, v, instances, &results));
        EvaluationReport report = evaluate_results(results, instances);
        if (as_json) {
            json row = {{"variant", to_string(v)},
                        {"evaluation", evaluation_to_json(report)}};
            table.push_back(row);
        } else {
            char line[256];
            std::snprintf(line, sizeof(line), "%s\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\n",
                          to_string(v).c_str(), report.overall.row.precision,
                          report.overall.row.recall, report.overall.col.precision,
                          report.overall.col.recall, report.overall.cell.precision,
                          report.overall.cell.recall);
            std::cout << line;
        }
    }
    if (as_json) {
        std::cout << json{{"config", config_to_json(cfg)}, {"variants", table}}.dump(2) << "\n";
    }
    return exit_code;
}

int cmd_cache_inspect(const std::string& cache_dir) {
    if (!fs::is_directory(cache_dir)) throw UsageError("not a cache directory: " + cache_dir);
    std::size_t entries = 0, bytes = 0;
    std::map<std::string, std::size_t> by_tag;
    for (const auto& entry : fs::directory_iterator(cache_dir)) {
        if (entry.path().extension() != ".json") continue;
        ++entries;
        bytes += static_cast<std::size_t>(entry.file_size());
        std::ifstream in(entry.path());
        json j = json::parse(in, nullptr, false);
        if (!j.is_discarded()) by_tag[j.value("tag", "unknown")]++;
    }
    std::cout << entries << " cached responses, " << bytes << " bytes\n";
    for (const auto& [tag, n] : by_tag) std::cout << "  " << tag << ": " << n << "\n";
    return 0;
}

int cmd_cache_gc(const std::string& cache_dir, int max_age_days) {
    if (!fs::is_directory(cache_dir)) throw UsageError("not a cache directory: " + cache_dir);
    auto now = fs::file_time_type::clock::now();
    std::size_t removed = 0;
    for (const auto& entry : fs::directory_iterator(cache_dir)) {
        if (entry.path().extension() != ".json") continue;
        if (max_age_days > 0) {
            auto age = now - entry.last_write_time();
            if (age < std::chrono::hours(24) * max_age_days) continue;
        }
        fs::remove(entry.path());
        ++removed;
    }
    std::cout << "removed " << removed << " cache entries\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cell-level attribution toolkit for table question answering"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Config file (INI key=value; flags override)");

    // import
    std::string imp_format, imp_input, imp_output, imp_split = "gold";
    auto* imp = app.add_subcommand("import", "Convert a source dataset to the canonical schema");
    imp->add_option("--format", imp_format, "Source format: totto, fetaqa, aitqa")->required();
    imp->add_option("--input", imp_input, "Source JSON-lines file")->required();
    imp->add_option("--output", imp_output, "Canonical JSON-lines output")->required();
    imp->add_option("--split", imp_split, "Split label for imported instances: gold, silver");

    // stats
    std::string stats_data, stats_split = "all";
    bool stats_json = false;
    auto* st = app.add_subcommand("stats", "Describe a canonical dataset");
    st->add_option("--data", stats_data, "Dataset JSON-lines file")->required();
    st->add_option("--split", stats_split, "Split filter: gold, silver, all");
    st->add_flag("--json", stats_json, "Emit JSON instead of text");

    // attribute
    RunConfig att_cfg;
    auto* att = app.add_subcommand("attribute", "Run the attribution pipeline over a dataset");
    add_run_options(att, att_cfg);

    // evaluate
    std::string ev_results, ev_data;
    bool ev_json = false;
    auto* ev = app.add_subcommand("evaluate", "Score results against gold attributions");
    ev->add_option("--results", ev_results, "Results JSON-lines file")->required();
    ev->add_option("--data", ev_data, "Gold dataset JSON-lines file")->required();
    ev->add_flag("--json", ev_json, "Emit JSON instead of text");

    // fairscore
    std::string fs_results, fs_data, fs_facts = "template", fs_judge = "contains";
    bool fs_json = false;
    RunConfig fs_cfg;
    auto* fsc = app.add_subcommand("fairscore", "Reference-less attribution scoring");
    fsc->add_option("--results", fs_results, "Results JSON-lines file")->required();
    fsc->add_option("--data", fs_data, "Dataset JSON-lines file")->required();
    fsc->add_option("--facts", fs_facts, "Cell-fact source: template, llm");
    fsc->add_option("--judge", fs_judge, "Support judge: equality, contains, llm");
    fsc->add_flag("--json", fs_json, "Emit JSON instead of text");
    fsc->add_option("--mode", fs_cfg.mode, "Gateway mode: live, cache, replay");
    fsc->add_option("--transcript", fs_cfg.transcript, "Replay transcript");
    fsc->add_option("--cache-dir", fs_cfg.cache_dir, "Response cache directory");
    fsc->add_option("--record", fs_cfg.record, "Record exchanges to this transcript");
    fsc->add_option("--model", fs_cfg.model, "Model name");
    fsc->add_option("--base-url", fs_cfg.base_url, "API base URL");
    fsc->add_option("--temperature", fs_cfg.temperature, "Sampling temperature");
    fsc->add_option("--prompts", fs_cfg.prompts_dir, "Prompt template directory");

    // ablate
    RunConfig abl_cfg;
    bool abl_json = false;
    auto* abl = app.add_subcommand("ablate", "Run and score all five pipeline variants");
    add_run_options(abl, abl_cfg, /*with_variant=*/false);
    abl->add_flag("--json", abl_json, "Emit JSON instead of text");

    // cache
    auto* cache = app.add_subcommand("cache", "Response cache management");
    cache->require_subcommand(1);
    std::string cache_dir;
    int gc_days = 0;
    auto* gc = cache->add_subcommand("gc", "Delete cache entries");
    gc->add_option("--cache-dir", cache_dir, "Cache directory")->required();
    gc->add_option("--max-age-days", gc_days, "Only delete entries older than N days");
    auto* inspect = cache->add_subcommand("inspect", "Summarize cache contents");
    inspect->add_option("--cache-dir", cache_dir, "Cache directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*imp) return cmd_import(imp_format, imp_input, imp_output, imp_split);
        if (*st) return cmd_stats(stats_data, stats_split, stats_json);
        if (*att) {
            std::vector<QAInstance> instances = load_instances(att_cfg);
            return run_attribute_once(att_cfg, variant_from_string(att_cfg.variant), instances,
                                      nullptr);
        }
        if (*ev) return cmd_evaluate(ev_results, ev_data, ev_json);
        if (*fsc) {
            fs_cfg.data_path = fs_data;
            return cmd_fairscore(fs_results, fs_data, fs_facts, fs_judge, fs_json, fs_cfg);
        }
        if (*abl) return cmd_ablate(abl_cfg, abl_json);
        if (*gc) return cmd_cache_gc(cache_dir, gc_days);
        if (*inspect) return cmd_cache_inspect(cache_dir);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
