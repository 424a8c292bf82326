// Regenerates the committed fixtures: prompt template files, the figure-1
// replay corpus, the 20-instance lookup corpus, their recorded transcripts,
// and the dataset manifest. Run from the repository root:
//
//   make_fixtures [output_root]
//
// Output is deterministic; re-running must leave the tree unchanged.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include "tabattr/agents.hpp"
#include "tabattr/datasets.hpp"
#include "tabattr/prompts.hpp"

using namespace tabattr;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

Table energy_table() {
    return Table({"Source", "Cost", "Efficiency", "Scalability"},
                 {{"Solar Power", "30–50", "15–20", "4"},
                  {"Wind Power", "20–40", "30–45", "5"},
                  {"Hydropower", "40–70", "70–90", "3"},
                  {"Geothermal", "50–80", "90+", "2"}});
}

QAInstance energy_instance() {
    QAInstance inst{"energy-0001",
                    Dataset::Other,
                    energy_table(),
                    "Among renewable sources costing <= 50/MWh and scalability >= 3, which is "
                    "most efficient, and what is its efficiency?",
                    "Wind Power, 30–45% efficiency.",
                    {},
                    Split::Gold};
    GoldGroup wind;
    wind.phrase = PhraseSpan{0, 10, "Wind Power"};
    wind.cells = {{1, 0}};
    GoldGroup eff;
    eff.phrase = PhraseSpan{12, 20, "30–45%"};
    eff.cells = {{1, 2}};
    GoldGroup implicit;
    implicit.cells = {{0, 1}, {1, 1}, {0, 3}, {1, 3}};
    inst.gold = {wind, eff, implicit};
    return inst;
}

std::string energy_script(const ChatRequest& req) {
    if (req.tag == "column_relevance") {
        return R"({"explicit": [0, 2], "implicit": [1, 3]})";
    }
    if (req.tag == "evidence_span") {
        return R"({"filter": "WHERE Cost <= 50 AND Scalability >= 3"})";
    }
    if (req.tag == "query_decomposition") {
        return R"({"subquestions": [
            {"question": "Which sources cost at most 50/MWh?",
             "fact": "The answer concerns sources costing at most 50/MWh."},
            {"question": "Which sources have scalability at least 3?",
             "fact": "The answer concerns sources with scalability at least 3."},
            {"question": "Which remaining source has the highest efficiency?",
             "fact": "Wind Power has the highest efficiency, 30–45%."}]})";
    }
    if (req.tag == "subquery_attribution") {
        return R"({"attributions": [
            {"subquestion": 0, "cells": [[0, 1], [1, 1]]},
            {"subquestion": 1, "cells": [[0, 3], [1, 3]]},
            {"subquestion": 2, "cells": [[1, 0], [1, 2]]}]})";
    }
    if (req.tag == "final_attribution") {
        return R"({"alignments": [
            {"phrase": "Wind Power", "cells": [[1, 0]]},
            {"phrase": "30–45%", "cells": [[1, 2]]}]})";
    }
    if (req.tag == "entailment") {
        return R"({"entailed": true, "score": 0.95})";
    }
    return "{}";
}

// One lookup instance: "What is the <col-1 header> of <key>?" answered from a
// small synthetic table. Gold: the value cell (explicit) + the key cell
// (implicit).
struct LookupSpec {
    QAInstance instance;
    std::string key;    // unique row key, used to dispatch scripted replies
    std::string value;  // answer phrase
    int row = 0;
};

std::vector<LookupSpec> lookup_corpus() {
    // deterministic LCG so the corpus is stable across rebuilds
    unsigned long state = 20240817u;
    auto next = [&state]() {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        return static_cast<unsigned>(state >> 33);
    };

    const std::vector<std::pair<Dataset, std::string>> plan = {
        {Dataset::FetaQA, "fetaqa"}, {Dataset::FetaQA, "fetaqa"}, {Dataset::FetaQA, "fetaqa"},
        {Dataset::FetaQA, "fetaqa"}, {Dataset::FetaQA, "fetaqa"}, {Dataset::FetaQA, "fetaqa"},
        {Dataset::FetaQA, "fetaqa"}, {Dataset::FetaQA, "fetaqa"}, {Dataset::FetaQA, "fetaqa"},
        {Dataset::FetaQA, "fetaqa"}, {Dataset::ToTTo, "totto"},   {Dataset::ToTTo, "totto"},
        {Dataset::ToTTo, "totto"},   {Dataset::ToTTo, "totto"},   {Dataset::ToTTo, "totto"},
        {Dataset::AITQA, "aitqa"},   {Dataset::AITQA, "aitqa"},   {Dataset::AITQA, "aitqa"},
        {Dataset::AITQA, "aitqa"},   {Dataset::AITQA, "aitqa"},
    };

    const std::vector<std::string> value_headers = {"Capacity", "Score", "Budget", "Length"};
    const std::vector<std::string> extra_headers = {"Region", "Status", "Notes"};

    std::vector<LookupSpec> out;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "%s-%04zu", plan[i].second.c_str(), i + 1);
        int n_rows = 2 + static_cast<int>(next() % 4);
        int target = static_cast<int>(next() % static_cast<unsigned>(n_rows));
        std::string value_header = value_headers[next() % value_headers.size()];
        std::string extra_header = extra_headers[next() % extra_headers.size()];

        std::vector<std::vector<std::string>> rows;
        std::string key, value;
        for (int r = 0; r < n_rows; ++r) {
            char keybuf[32], valbuf[32];
            std::snprintf(keybuf, sizeof(keybuf), "entry-%02zu-%d", i + 1, r);
            std::snprintf(valbuf, sizeof(valbuf), "%u", 10 + next() % 90);
            std::string extra = (r % 2 == 0) ? "north" : "south";
            rows.push_back({keybuf, valbuf, extra});
            if (r == target) {
                key = keybuf;
                value = valbuf;
            }
        }

        std::string question = "What is the " + value_header + " of " + key + "?";
        std::string answer = "The " + value_header + " of " + key + " is " + value + ".";
        QAInstance inst{idbuf,
                        plan[i].first,
                        Table({"Name", value_header, extra_header}, rows),
                        question,
                        answer,
                        {},
                        Split::Gold};
        int start = static_cast<int>(answer.size() - value.size() - 1);
        GoldGroup explicit_group;
        explicit_group.phrase = PhraseSpan{start, start + static_cast<int>(value.size()), value};
        explicit_group.cells = {{target, 1}};
        GoldGroup implicit_group;
        implicit_group.cells = {{target, 0}};
        inst.gold = {explicit_group, implicit_group};

        out.push_back(LookupSpec{std::move(inst), key, value, target});
    }
    return out;
}

// Index of the target row within whichever sub-table view the prompt shows.
// Non-target row keys only appear in the prompt when their row survived
// pruning; the target key is always present (it is part of the question).
int view_row(const LookupSpec& spec, const std::string& prompt) {
    int vr = 0;
    for (int r = 0; r < spec.row; ++r) {
        if (prompt.find(spec.instance.table.cell(r, 0)) != std::string::npos) ++vr;
    }
    return vr;
}

ScriptedBackend::Fn lookup_script(const std::vector<LookupSpec>& corpus) {
    return [&corpus](const ChatRequest& req) -> std::string {
        const LookupSpec* spec = nullptr;
        for (const auto& s : corpus) {
            if (req.user_prompt.find(s.key) != std::string::npos) {
                spec = &s;
                break;
            }
        }
        if (!spec) return "{}";
        const QAInstance& inst = spec->instance;
        if (req.tag == "column_relevance") {
            return R"({"explicit": [1], "implicit": [0]})";
        }
        if (req.tag == "evidence_span") {
            return json{{"filter", "WHERE Name = '" + spec->key + "'"}}.dump();
        }
        if (req.tag == "query_decomposition") {
            return json{{"subquestions",
                         json::array({{{"question", inst.question}, {"fact", inst.answer}}})}}
                .dump();
        }
        if (req.tag == "entailment") {
            return R"({"entailed": true, "score": 1.0})";
        }
        if (req.tag == "subquery_attribution") {
            int vr = view_row(*spec, req.user_prompt);
            json cells = json::array({json::array({vr, 0}), json::array({vr, 1})});
            // joint mode reads "attributions", single-sub-question mode "cells"
            return json{{"attributions",
                         json::array({{{"subquestion", 0}, {"cells", cells}}})},
                        {"cells", cells}}
                .dump();
        }
        if (req.tag == "final_attribution") {
            json cells = json::array({json::array({spec->row, 1})});
            return json{{"alignments",
                         json::array({{{"phrase", spec->value}, {"cells", cells}}})}}
                .dump();
        }
        return "{}";
    };
}

void record_corpus(const std::vector<QAInstance>& instances, ScriptedBackend::Fn script,
                   const std::string& transcript_path,
                   const std::vector<PipelineVariant>& variants) {
    fs::remove(transcript_path);
    // cache mode dedupes: identical requests across variants record once
    std::string tmp_cache = transcript_path + ".cache.tmp";
    fs::remove_all(tmp_cache);
    Gateway gw = Gateway::live(std::make_shared<ScriptedBackend>(std::move(script)), tmp_cache);
    gw.record_to(transcript_path);
    AgentConfig cfg;
    LlmEntailmentJudge judge(gw, cfg.model, cfg.prompts);
    for (PipelineVariant variant : variants) {
        for (const auto& inst : instances) {
            AttributionResult res = run_pipeline(inst, variant, gw, judge, cfg);
            if (res.final_cells != inst.gold_cells()) {
                std::cerr << "warning: " << inst.id << " (" << to_string(variant)
                          << ") scripted run does not match gold\n";
            }
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    fs::path root = argc > 1 ? fs::path(argv[1]) : fs::current_path();

    fs::create_directories(root / "prompts");
    PromptLibrary library = PromptLibrary::builtin();
    for (const auto& [name, text] : library.all()) {
        std::ofstream out(root / "prompts" / (name + ".txt"));
        out << text;
    }

    fs::create_directories(root / "data" / "transcripts");

    const std::vector<PipelineVariant> all_variants = {
        PipelineVariant::Standard, PipelineVariant::DecomposeBeforePrune,
        PipelineVariant::PerSubquery, PipelineVariant::NoPruning,
        PipelineVariant::NoDecomposition};

    QAInstance fig1 = energy_instance();
    save_dataset((root / "data" / "fig1.jsonl").string(), {fig1});
    record_corpus({fig1}, energy_script, (root / "data" / "transcripts" / "fig1.jsonl").string(),
                  {PipelineVariant::Standard});

    std::vector<LookupSpec> corpus = lookup_corpus();
    std::vector<QAInstance> instances;
    for (const auto& s : corpus) instances.push_back(s.instance);
    save_dataset((root / "data" / "corpus20.jsonl").string(), instances);
    record_corpus(instances, lookup_script(corpus),
                  (root / "data" / "transcripts" / "corpus20.jsonl").string(), all_variants);

    json manifest = json::array(
        {{{"name", "fig1"},
          {"path", "data/fig1.jsonl"},
          {"gold_count", 1},
          {"silver_count", 0},
          {"note", "renewable-energy walkthrough instance"}},
         {{"name", "corpus20"},
          {"path", "data/corpus20.jsonl"},
          {"gold_count", 20},
          {"silver_count", 0},
          {"note", "synthetic lookup corpus with recorded transcripts"}}});
    std::ofstream mf(root / "data" / "manifest.json");
    mf << manifest.dump(2) << "\n";

    std::cout << "fixtures written under " << root << "\n";
    return 0;
}
