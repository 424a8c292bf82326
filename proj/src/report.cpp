#include "tabattr/report.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <thread>

namespace tabattr {

using nlohmann::json;

namespace {

json cells_to_json(const AttributionSet& cells) {
    json out = json::array();
    for (const auto& c : cells) out.push_back(json::array({c.row, c.col}));
    return out;
}

AttributionSet cells_from_json(const json& arr) {
    AttributionSet out;
    for (const auto& c : arr) out.insert(CellRef{c[0].get<int>(), c[1].get<int>()});
    return out;
}

std::string format_score(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

}  // namespace

json result_to_json(const AttributionResult& result) {
    json alignments = json::array();
    for (const auto& pa : result.phrase_alignments) {
        alignments.push_back({{"phrase",
                               {{"start", pa.phrase.start},
                                {"end", pa.phrase.end},
                                {"text", pa.phrase.text}}},
                              {"cells", cells_to_json(pa.cells)}});
    }
    json sub_attrs = json::array();
    for (const auto& sa : result.sub_attributions) {
        sub_attrs.push_back({{"question", sa.sub_question.text},
                             {"fact", sa.sub_question.derived_fact},
                             {"verified", sa.sub_question.verified},
                             {"cells", cells_to_json(sa.cells)}});
    }
    return json{{"instance_id", result.instance_id},
                {"final_cells", cells_to_json(result.final_cells)},
                {"phrase_alignments", alignments},
                {"columns",
                 {{"explicit", result.columns.explicit_cols},
                  {"implicit", result.columns.implicit_cols}}},
                {"filter_text", result.filter_text},
                {"kept_rows", result.kept_rows},
                {"sub_attributions", sub_attrs},
                {"variant", to_string(result.variant)},
                {"diagnostics", result.diagnostics}};
}

AttributionResult result_from_json(const json& j) {
    AttributionResult r;
    r.instance_id = j.at("instance_id").get<std::string>();
    r.final_cells = cells_from_json(j.value("final_cells", json::array()));
    for (const auto& pa_j : j.value("phrase_alignments", json::array())) {
        PhraseAlignment pa;
        const json& p = pa_j.at("phrase");
        pa.phrase = PhraseSpan{p.at("start").get<int>(), p.at("end").get<int>(),
                               p.at("text").get<std::string>()};
        pa.cells = cells_from_json(pa_j.value("cells", json::array()));
        r.phrase_alignments.push_back(std::move(pa));
    }
    if (j.contains("columns")) {
        for (int c : j["columns"].value("explicit", std::vector<int>{}))
            r.columns.explicit_cols.insert(c);
        for (int c : j["columns"].value("implicit", std::vector<int>{}))
            r.columns.implicit_cols.insert(c);
    }
    r.filter_text = j.value("filter_text", "");
    for (int row : j.value("kept_rows", std::vector<int>{})) r.kept_rows.insert(row);
    for (const auto& sa_j : j.value("sub_attributions", json::array())) {
        SubAttribution sa;
        sa.sub_question.text = sa_j.value("question", "");
        sa.sub_question.derived_fact = sa_j.value("fact", "");
        sa.sub_question.verified = sa_j.value("verified", false);
        sa.cells = cells_from_json(sa_j.value("cells", json::array()));
        r.sub_attributions.push_back(std::move(sa));
    }
    r.variant = variant_from_string(j.value("variant", "Standard"));
    r.diagnostics = j.value("diagnostics", std::vector<std::string>{});
    return r;
}

void save_results(const std::string& path, const std::vector<AttributionResult>& results) {
    std::ofstream out(path);
    if (!out) throw UsageError("cannot write results file: " + path);
    for (const auto& r : results) out << result_to_json(r).dump() << "\n";
}

std::vector<AttributionResult> load_results(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open results file: " + path);
    std::vector<AttributionResult> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(result_from_json(json::parse(line)));
    }
    return out;
}

BatchOutcome run_batch(const std::vector<QAInstance>& instances, PipelineVariant variant,
                       Gateway& gateway, EntailmentJudge& judge, const AgentConfig& cfg,
                       int jobs) {
    BatchOutcome out;
    if (instances.empty()) return out;
    jobs = std::max(1, jobs);

    std::vector<std::optional<AttributionResult>> slots(instances.size());
    std::vector<std::optional<InstanceFailure>> fails(instances.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= instances.size()) break;
            try {
                slots[i] = run_pipeline(instances[i], variant, gateway, judge, cfg);
            } catch (const std::exception& e) {
                fails[i] = InstanceFailure{instances[i].id, e.what()};
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    for (auto& s : slots) {
        if (s) out.results.push_back(std::move(*s));
    }
    for (auto& f : fails) {
        if (f) out.failures.push_back(std::move(*f));
    }
    std::sort(out.results.begin(), out.results.end(),
              [](const auto& a, const auto& b) { return a.instance_id < b.instance_id; });
    std::sort(out.failures.begin(), out.failures.end(),
              [](const auto& a, const auto& b) { return a.instance_id < b.instance_id; });
    return out;
}

EvaluationReport evaluate_results(const std::vector<AttributionResult>& results,
                                  const std::vector<QAInstance>& instances) {
    if (results.empty()) throw Error("empty results input");
    std::map<std::string, const QAInstance*> by_id;
    for (const auto& inst : instances) by_id[inst.id] = &inst;

    EvaluationReport report;
    struct Triple {
        std::vector<PRScore> row, col, cell;
    };
    std::map<std::string, Triple> per_dataset;
    Triple overall;

    for (const auto& r : results) {
        auto it = by_id.find(r.instance_id);
        if (it == by_id.end()) {
            report.warnings.push_back("no gold instance for result id '" + r.instance_id +
                                      "', excluded");
            continue;
        }
        AttributionSet gold = it->second->gold_cells();
        PRScore row = row_prf(r.final_cells, gold);
        PRScore col = col_prf(r.final_cells, gold);
        PRScore cell = cell_prf(r.final_cells, gold);
        auto& t = per_dataset[to_string(it->second->dataset)];
        t.row.push_back(row);
        t.col.push_back(col);
        t.cell.push_back(cell);
        overall.row.push_back(row);
        overall.col.push_back(col);
        overall.cell.push_back(cell);
    }
    if (overall.cell.empty()) throw Error("no result matched a gold instance");

    auto to_block = [](const Triple& t) {
        GranularityBlock b;
        b.row = aggregate(t.row);
        b.col = aggregate(t.col);
        b.cell = aggregate(t.cell);
        b.n = t.cell.size();
        return b;
    };
    for (const auto& [name, t] : per_dataset) report.per_dataset[name] = to_block(t);
    report.overall = to_block(overall);
    return report;
}

namespace {

json block_to_json(const GranularityBlock& b) {
    auto agg = [](const AggregateScore& s) {
        return json{{"precision", s.precision}, {"recall", s.recall}};
    };
    return json{{"row", agg(b.row)}, {"column", agg(b.col)}, {"cell", agg(b.cell)},
                {"n", b.n}};
}

}  // namespace

json evaluation_to_json(const EvaluationReport& report) {
    json per_dataset;
    for (const auto& [name, b] : report.per_dataset) per_dataset[name] = block_to_json(b);
    return json{{"averaging", report.averaging},
                {"per_dataset", per_dataset},
                {"overall", block_to_json(report.overall)},
                {"warnings", report.warnings}};
}

std::string evaluation_to_text(const EvaluationReport& report) {
    std::string out = "averaging\t" + report.averaging + "\n";
    out += "dataset\tn\trow_p\trow_r\tcol_p\tcol_r\tcell_p\tcell_r\n";
    auto line = [&](const std::string& name, const GranularityBlock& b) {
        out += name + "\t" + std::to_string(b.n) + "\t" + format_score(b.row.precision) + "\t" +
               format_score(b.row.recall) + "\t" + format_score(b.col.precision) + "\t" +
               format_score(b.col.recall) + "\t" + format_score(b.cell.precision) + "\t" +
               format_score(b.cell.recall) + "\n";
    };
    for (const auto& [name, b] : report.per_dataset) line(name, b);
    line("ALL", report.overall);
    return out;
}

FactsMode facts_mode_from_string(const std::string& s) {
    if (s == "template") return FactsMode::Template;
    if (s == "llm") return FactsMode::Llm;
    throw UsageError("unknown facts mode '" + s + "' (expected template, llm)");
}

JudgeMode judge_mode_from_string(const std::string& s) {
    if (s == "equality") return JudgeMode::Equality;
    if (s == "contains") return JudgeMode::Contains;
    if (s == "llm") return JudgeMode::Llm;
    throw UsageError("unknown judge mode '" + s + "' (expected equality, contains, llm)");
}

FairScoreReport fairscore_results(const std::vector<AttributionResult>& results,
                                  const std::vector<QAInstance>& instances,
                                  const FairScoreConfig& cfg, Gateway* gateway) {
    if ((cfg.facts == FactsMode::Llm || cfg.judge == JudgeMode::Llm) && gateway == nullptr) {
        throw UsageError("LLM facts/judge modes require a gateway");
    }
    std::map<std::string, const QAInstance*> by_id;
    for (const auto& inst : instances) by_id[inst.id] = &inst;

    FairScoreReport report;
    struct CaliAcc {
        std::vector<PRScore> actual;
        std::vector<FairScore> predicted;
    };
    std::map<std::string, CaliAcc> calibration;
    std::map<std::string, std::vector<FairScore>> per_dataset;
    std::vector<FairScore> overall;

    for (const auto& r : results) {
        auto it = by_id.find(r.instance_id);
        if (it == by_id.end()) {
            report.warnings.push_back("no instance for result id '" + r.instance_id +
                                      "', excluded");
            continue;
        }
        const QAInstance& inst = *it->second;
        FairScoreRecord rec;
        rec.instance_id = r.instance_id;

        std::vector<Fact> cell_facts =
            cfg.facts == FactsMode::Template
                ? cells_to_facts_template(inst.table, r.final_cells)
                : cells_to_facts(inst.table, r.final_cells, *gateway, cfg.agent,
                                 &rec.diagnostics);
        std::vector<Fact> answer_facts;
        if (cfg.facts == FactsMode::Llm) {
            answer_facts = answer_to_facts(inst.answer, *gateway, cfg.agent, &rec.diagnostics);
        } else {
            answer_facts.push_back(
                Fact{inst.answer, Fact::Origin::Answer, std::nullopt, false});
        }

        switch (cfg.judge) {
            case JudgeMode::Equality:
                rec.counts = align_facts(cell_facts, answer_facts, equality_judge());
                break;
            case JudgeMode::Contains:
                rec.counts = align_facts(cell_facts, answer_facts, contains_judge());
                break;
            case JudgeMode::Llm:
                rec.counts = align_facts_llm(cell_facts, answer_facts, *gateway, cfg.agent,
                                             &rec.diagnostics);
                break;
        }
        rec.score = fairscore(rec.counts);

        per_dataset[to_string(inst.dataset)].push_back(rec.score);
        overall.push_back(rec.score);
        if (!inst.gold.empty()) {
            auto& acc = calibration[to_string(inst.dataset)];
            acc.actual.push_back(cell_prf(r.final_cells, inst.gold_cells()));
            acc.predicted.push_back(rec.score);
        }
        report.records.push_back(std::move(rec));
    }

    std::sort(report.records.begin(), report.records.end(),
              [](const auto& a, const auto& b) { return a.instance_id < b.instance_id; });

    auto mean_scores = [](const std::vector<FairScore>& scores) {
        AggregateScore s;
        for (const auto& f : scores) {
            s.precision += f.precision;
            s.recall += f.recall;
        }
        if (!scores.empty()) {
            s.precision /= static_cast<double>(scores.size());
            s.recall /= static_cast<double>(scores.size());
        }
        s.n = scores.size();
        return s;
    };
    for (const auto& [name, scores] : per_dataset) report.per_dataset[name] = mean_scores(scores);
    report.overall = mean_scores(overall);

    json cali = json::object();
    for (const auto& [name, acc] : calibration) {
        double pred_p = 0, pred_r = 0, act_p = 0, act_r = 0;
        for (const auto& f : acc.predicted) {
            pred_p += f.precision;
            pred_r += f.recall;
        }
        for (const auto& s : acc.actual) {
            act_p += s.precision;
            act_r += s.recall;
        }
        auto n = static_cast<double>(acc.actual.size());
        pred_p /= n;
        pred_r /= n;
        act_p /= n;
        act_r /= n;
        cali[name] = {{"pred_p", pred_p},    {"actual_p", act_p},
                      {"delta_p", pred_p - act_p}, {"pred_r", pred_r},
                      {"actual_r", act_r},  {"delta_r", pred_r - act_r},
                      {"n", acc.actual.size()}};
    }
    report.calibration = cali;
    return report;
}

json fairscore_to_json(const FairScoreReport& report) {
    json records = json::array();
    for (const auto& r : report.records) {
        records.push_back({{"instance_id", r.instance_id},
                           {"a", r.counts.a},
                           {"b", r.counts.b},
                           {"c", r.counts.c},
                           {"d", r.counts.d},
                           {"precision", r.score.precision},
                           {"recall", r.score.recall},
                           {"precision_vacuous", r.score.precision_vacuous},
                           {"recall_vacuous", r.score.recall_vacuous},
                           {"diagnostics", r.diagnostics}});
    }
    json per_dataset = json::object();
    for (const auto& [name, s] : report.per_dataset) {
        per_dataset[name] = {{"precision", s.precision}, {"recall", s.recall}, {"n", s.n}};
    }
    return json{{"records", records},
                {"per_dataset", per_dataset},
                {"overall",
                 {{"precision", report.overall.precision},
                  {"recall", report.overall.recall},
                  {"n", report.overall.n}}},
                {"calibration", report.calibration},
                {"warnings", report.warnings}};
}

std::string fairscore_to_text(const FairScoreReport& report) {
    std::string out = "dataset\tn\tprecision\trecall\n";
    for (const auto& [name, s] : report.per_dataset) {
        out += name + "\t" + std::to_string(s.n) + "\t" + format_score(s.precision) + "\t" +
               format_score(s.recall) + "\n";
    }
    out += "ALL\t" + std::to_string(report.overall.n) + "\t" +
           format_score(report.overall.precision) + "\t" + format_score(report.overall.recall) +
           "\n";
    if (!report.calibration.empty()) {
        out += "calibration dataset\tpred_p\tactual_p\tdelta_p\tpred_r\tactual_r\tdelta_r\n";
        for (const auto& [name, c] : report.calibration.items()) {
            out += name + "\t" + format_score(c["pred_p"].get<double>()) + "\t" +
                   format_score(c["actual_p"].get<double>()) + "\t" +
                   format_score(c["delta_p"].get<double>()) + "\t" +
                   format_score(c["pred_r"].get<double>()) + "\t" +
                   format_score(c["actual_r"].get<double>()) + "\t" +
                   format_score(c["delta_r"].get<double>()) + "\n";
        }
    }
    return out;
}

}  // namespace tabattr
