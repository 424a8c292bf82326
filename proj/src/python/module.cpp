// Python bindings for the tabattr core. Cell coordinates cross the boundary
// as (row, col) tuples; report-shaped results cross as JSON strings that the
// package glue decodes into dicts.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tabattr/agents.hpp"
#include "tabattr/datasets.hpp"
#include "tabattr/errors.hpp"
#include "tabattr/fairscore.hpp"
#include "tabattr/filter.hpp"
#include "tabattr/gateway.hpp"
#include "tabattr/metrics.hpp"
#include "tabattr/prompts.hpp"
#include "tabattr/report.hpp"
#include "tabattr/table.hpp"

namespace py = pybind11;
using namespace tabattr;

namespace {

using CellTuple = std::pair<int, int>;

AttributionSet to_cells(const std::set<CellTuple>& tuples) {
    AttributionSet out;
    for (const auto& [r, c] : tuples) out.insert(CellRef{r, c});
    return out;
}

std::set<CellTuple> from_cells(const AttributionSet& cells) {
    std::set<CellTuple> out;
    for (const auto& cell : cells) out.emplace(cell.row, cell.col);
    return out;
}

AgentConfig make_config(const std::string& model, double temperature,
                        const std::string& prompt_dir, bool drop_unverified) {
    AgentConfig cfg;
    cfg.model = model;
    cfg.temperature = temperature;
    if (!prompt_dir.empty()) cfg.prompts = PromptLibrary::from_dir(prompt_dir);
    cfg.drop_unverified_subquestions = drop_unverified;
    return cfg;
}

SupportJudge named_judge(const std::string& name) {
    if (name == "equality") return equality_judge();
    if (name == "contains") return contains_judge();
    throw Error("unknown judge '" + name + "' (expected equality or contains)");
}

}  // namespace

PYBIND11_MODULE(_tabattr, m) {
    m.doc() = "Cell-level table attribution: tables, filters, metrics, "
              "pipeline, and reference-less scoring";

    py::register_exception<Error>(m, "TabAttrError");

    // ---- tables ----
    py::class_<Table>(m, "Table")
        .def(py::init<std::vector<std::string>, std::vector<std::vector<std::string>>,
                      std::map<std::string, std::string>>(),
             py::arg("headers"), py::arg("cells"),
             py::arg("metadata") = std::map<std::string, std::string>{})
        .def_property_readonly("n_rows", &Table::n_rows)
        .def_property_readonly("n_cols", &Table::n_cols)
        .def_property_readonly("headers", &Table::headers)
        .def_property_readonly("rows", &Table::rows)
        .def_property_readonly("metadata", &Table::metadata)
        .def("cell",
             [](const Table& t, int row, int col) { return t.cell(row, col); },
             py::arg("row"), py::arg("col"))
        .def("find_column", &Table::find_column, py::arg("name"))
        .def("render",
             [](const Table& t, const std::string& format) {
                 RenderFormat f = format == "delimited" ? RenderFormat::Delimited
                                                        : RenderFormat::Markdown;
                 return render_table(t, f);
             },
             py::arg("format") = "markdown");

    py::class_<QAInstance>(m, "QAInstance")
        .def_readonly("id", &QAInstance::id)
        .def_property_readonly("dataset",
                               [](const QAInstance& i) { return to_string(i.dataset); })
        .def_readonly("table", &QAInstance::table)
        .def_readonly("question", &QAInstance::question)
        .def_readonly("answer", &QAInstance::answer)
        .def_property_readonly("split",
                               [](const QAInstance& i) { return to_string(i.split); })
        .def("gold_cells",
             [](const QAInstance& i) { return from_cells(i.gold_cells()); })
        .def("to_json", &serialize_instance);

    m.def("instance_from_json",
          [](const std::string& text) {
              return instance_from_json(nlohmann::json::parse(text));
          },
          py::arg("text"), "Parse one canonical-schema JSON line into a QAInstance.");

    // ---- filters ----
    m.def("canonical_filter",
          [](const std::string& text) { return print_filter(parse_filter(text)); },
          py::arg("text"), "Parse a WHERE-style condition and print it canonically.");
    m.def("filter_rows",
          [](const Table& table, const std::string& text) {
              return evaluate_filter(parse_filter(text), table);
          },
          py::arg("table"), py::arg("text"),
          "Rows of the table satisfying the condition.");
    m.def("argmax_rows",
          [](const Table& table, const std::set<int>& rows, const std::string& column) {
              return argmax_rows(table, rows, column);
          },
          py::arg("table"), py::arg("rows"), py::arg("column"));

    // ---- metrics ----
    py::class_<PRScore>(m, "PRScore")
        .def_readonly("precision", &PRScore::precision)
        .def_readonly("recall", &PRScore::recall)
        .def_readonly("pred_size", &PRScore::pred_size)
        .def_readonly("gold_size", &PRScore::gold_size)
        .def_readonly("intersection", &PRScore::intersection)
        .def("__repr__", [](const PRScore& s) {
            return "PRScore(precision=" + std::to_string(s.precision) +
                   ", recall=" + std::to_string(s.recall) + ")";
        });

    py::class_<AggregateScore>(m, "AggregateScore")
        .def_readonly("precision", &AggregateScore::precision)
        .def_readonly("recall", &AggregateScore::recall)
        .def_readonly("n", &AggregateScore::n);

    m.def("cell_prf",
          [](const std::set<CellTuple>& pred, const std::set<CellTuple>& gold) {
              return cell_prf(to_cells(pred), to_cells(gold));
          },
          py::arg("pred"), py::arg("gold"));
    m.def("row_prf",
          [](const std::set<CellTuple>& pred, const std::set<CellTuple>& gold) {
              return row_prf(to_cells(pred), to_cells(gold));
          },
          py::arg("pred"), py::arg("gold"));
    m.def("col_prf",
          [](const std::set<CellTuple>& pred, const std::set<CellTuple>& gold) {
              return col_prf(to_cells(pred), to_cells(gold));
          },
          py::arg("pred"), py::arg("gold"));
    m.def("aggregate", &aggregate, py::arg("scores"));

    // ---- reference-less scoring ----
    py::class_<FactAlignmentCounts>(m, "FactAlignmentCounts")
        .def(py::init([](std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
                 return FactAlignmentCounts{a, b, c, d};
             }),
             py::arg("a") = 0, py::arg("b") = 0, py::arg("c") = 0, py::arg("d") = 0)
        .def_readonly("a", &FactAlignmentCounts::a)
        .def_readonly("b", &FactAlignmentCounts::b)
        .def_readonly("c", &FactAlignmentCounts::c)
        .def_readonly("d", &FactAlignmentCounts::d);

    py::class_<FairScore>(m, "FairScore")
        .def_readonly("precision", &FairScore::precision)
        .def_readonly("recall", &FairScore::recall)
        .def_readonly("precision_vacuous", &FairScore::precision_vacuous)
        .def_readonly("recall_vacuous", &FairScore::recall_vacuous);

    m.def("fairscore", &fairscore, py::arg("counts"));

    py::class_<Fact>(m, "Fact")
        .def_readonly("text", &Fact::text)
        .def_readonly("missing", &Fact::missing)
        .def_property_readonly("source", [](const Fact& f) -> std::optional<CellTuple> {
            if (!f.source) return std::nullopt;
            return CellTuple{f.source->row, f.source->col};
        });

    m.def("template_facts",
          [](const Table& table, const std::set<CellTuple>& cells) {
              return cells_to_facts_template(table, to_cells(cells));
          },
          py::arg("table"), py::arg("cells"));
    m.def("align_facts",
          [](const std::vector<Fact>& cell_facts, const std::vector<Fact>& answer_facts,
             const std::string& judge) {
              return align_facts(cell_facts, answer_facts, named_judge(judge));
          },
          py::arg("cell_facts"), py::arg("answer_facts"), py::arg("judge") = "contains");

    // ---- datasets ----
    py::class_<DatasetStats>(m, "DatasetStats")
        .def_readonly("name", &DatasetStats::name)
        .def_readonly("total", &DatasetStats::total)
        .def_readonly("gold", &DatasetStats::gold)
        .def_readonly("silver", &DatasetStats::silver);

    m.def("load_dataset",
          [](const std::string& path, const std::string& split) {
              LoadResult res = load_dataset(path, split_filter_from_string(split));
              std::vector<std::string> errors;
              for (const auto& e : res.errors)
                  errors.push_back("line " + std::to_string(e.line) + " [" + e.field +
                                   "]: " + e.message);
              return std::make_pair(std::move(res.instances), std::move(errors));
          },
          py::arg("path"), py::arg("split") = "all",
          "Returns (instances, errors); every rejected line is itemized.");
    m.def("save_dataset", &save_dataset, py::arg("path"), py::arg("instances"));
    m.def("dataset_stats", &stats, py::arg("instances"));

    // ---- gateway and pipeline ----
    py::class_<ChatRequest>(m, "ChatRequest")
        .def_readonly("model", &ChatRequest::model)
        .def_readonly("system_prompt", &ChatRequest::system_prompt)
        .def_readonly("user_prompt", &ChatRequest::user_prompt)
        .def_readonly("temperature", &ChatRequest::temperature)
        .def_readonly("tag", &ChatRequest::tag);

    py::class_<Gateway>(m, "Gateway")
        .def_static("replay", &Gateway::replay, py::arg("transcript_path"))
        .def_static("scripted",
                    [](std::function<std::string(const ChatRequest&)> fn) {
                        return Gateway::live(
                            std::make_shared<ScriptedBackend>(std::move(fn)));
                    },
                    py::arg("fn"),
                    "Live gateway over a Python callable (ChatRequest) -> str.")
        .def("record_to", &Gateway::record_to, py::arg("transcript_path"))
        .def_property_readonly("requests_served", &Gateway::requests_served);

    py::class_<AttributionResult>(m, "AttributionResult")
        .def_readonly("instance_id", &AttributionResult::instance_id)
        .def_readonly("filter_text", &AttributionResult::filter_text)
        .def_readonly("kept_rows", &AttributionResult::kept_rows)
        .def_readonly("diagnostics", &AttributionResult::diagnostics)
        .def_property_readonly("variant",
                               [](const AttributionResult& r) { return to_string(r.variant); })
        .def_property_readonly("final_cells",
                               [](const AttributionResult& r) { return from_cells(r.final_cells); })
        .def("to_json", [](const AttributionResult& r) { return result_to_json(r).dump(); });

    m.def("run_pipeline",
          [](const QAInstance& instance, Gateway& gateway, const std::string& variant,
             const std::string& model, double temperature, const std::string& prompt_dir,
             bool drop_unverified) {
              AgentConfig cfg = make_config(model, temperature, prompt_dir, drop_unverified);
              LlmEntailmentJudge judge(gateway, cfg.model, cfg.prompts);
              return run_pipeline(instance, variant_from_string(variant), gateway, judge, cfg);
          },
          py::arg("instance"), py::arg("gateway"), py::arg("variant") = "Standard",
          py::arg("model") = "gpt-4o", py::arg("temperature") = 0.0,
          py::arg("prompt_dir") = "", py::arg("drop_unverified") = false);

    m.def("run_batch",
          [](const std::vector<QAInstance>& instances, Gateway& gateway,
             const std::string& variant, const std::string& model, double temperature,
             const std::string& prompt_dir, bool drop_unverified, int jobs) {
              AgentConfig cfg = make_config(model, temperature, prompt_dir, drop_unverified);
              LlmEntailmentJudge judge(gateway, cfg.model, cfg.prompts);
              BatchOutcome out;
              {
                  // Workers may call back into a Python-scripted backend.
                  py::gil_scoped_release release;
                  out = run_batch(instances, variant_from_string(variant), gateway, judge,
                                  cfg, jobs);
              }
              std::vector<std::pair<std::string, std::string>> failures;
              for (const auto& f : out.failures) failures.emplace_back(f.instance_id, f.message);
              return std::make_pair(std::move(out.results), std::move(failures));
          },
          py::arg("instances"), py::arg("gateway"), py::arg("variant") = "Standard",
          py::arg("model") = "gpt-4o", py::arg("temperature") = 0.0,
          py::arg("prompt_dir") = "", py::arg("drop_unverified") = false, py::arg("jobs") = 1,
          "Returns (results, failures); failures are (instance_id, message) pairs.");

    m.def("evaluate_json",
          [](const std::vector<AttributionResult>& results,
             const std::vector<QAInstance>& instances) {
              return evaluation_to_json(evaluate_results(results, instances)).dump();
          },
          py::arg("results"), py::arg("instances"));

    m.def("fairscore_json",
          [](const std::vector<AttributionResult>& results,
             const std::vector<QAInstance>& instances, const std::string& facts,
             const std::string& judge, Gateway* gateway) {
              FairScoreConfig cfg;
              cfg.facts = facts_mode_from_string(facts);
              cfg.judge = judge_mode_from_string(judge);
              return fairscore_to_json(fairscore_results(results, instances, cfg, gateway))
                  .dump();
          },
          py::arg("results"), py::arg("instances"), py::arg("facts") = "template",
          py::arg("judge") = "contains", py::arg("gateway") = nullptr);
}
