#include "tabattr/agents.hpp"

#include <algorithm>
#include <sstream>

#include "tabattr/filter.hpp"

namespace tabattr {

using nlohmann::json;

namespace {

const char* kSystemPrompt =
    "You are a careful table question answering attribution assistant. "
    "Reply with valid JSON only.";

void note(std::vector<std::string>* diags, const std::string& msg) {
    if (diags) diags->push_back(msg);
}

json ask_json(Gateway& gateway, const AgentConfig& cfg, const std::string& tag,
              const std::string& prompt, std::vector<std::string>* diags) {
    ChatRequest req;
    req.model = cfg.model;
    req.system_prompt = kSystemPrompt;
    req.user_prompt = prompt;
    req.temperature = cfg.temperature;
    req.tag = tag;

    ChatResponse resp = gateway.complete(req);
    try {
        return extract_json(resp.text);
    } catch (const ExtractionError&) {
        note(diags, "agent '" + tag + "': unparseable output, issuing repair re-prompt");
    }

    ChatRequest repair = req;
    repair.user_prompt =
        "Your previous reply could not be parsed as JSON. Reply again with JSON only.\n\n" +
        prompt;
    ChatResponse second = gateway.complete(repair);
    try {
        return extract_json(second.text);
    } catch (const ExtractionError&) {
        throw AgentOutputError("agent '" + tag +
                               "' produced no parseable JSON after repair re-prompt");
    }
}

// Accepts column indices or header names; invalid entries are dropped.
std::set<int> parse_column_array(const json& arr, const Table& table,
                                 const std::string& tag, std::vector<std::string>* diags) {
    std::set<int> out;
    if (!arr.is_array()) return out;
    for (const auto& item : arr) {
        if (item.is_number_integer() || item.is_number_unsigned()) {
            int c = item.get<int>();
            if (c >= 0 && c < table.n_cols()) {
                out.insert(c);
            } else {
                note(diags, "agent '" + tag + "': column index " + std::to_string(c) +
                                " out of range, dropped");
            }
        } else if (item.is_string()) {
            if (auto c = table.find_column(item.get<std::string>())) {
                out.insert(*c);
            } else {
                note(diags, "agent '" + tag + "': unknown column '" +
                                item.get<std::string>() + "', dropped");
            }
        }
    }
    return out;
}

// Parses [[row, col], ...] (or [{"row":r,"col":c}, ...]) in view coordinates,
// mapping each cell through to the original table. Out-of-view cells dropped.
AttributionSet parse_cells(const json& arr, const PrunedTable& pruned,
                           const std::string& tag, std::vector<std::string>* diags) {
    AttributionSet out;
    if (!arr.is_array()) return out;
    for (const auto& item : arr) {
        int r = -1, c = -1;
        if (item.is_array() && item.size() == 2 && item[0].is_number_integer() &&
            item[1].is_number_integer()) {
            r = item[0].get<int>();
            c = item[1].get<int>();
        } else if (item.is_object() && item.contains("row") && item.contains("col")) {
            r = item.value("row", -1);
            c = item.value("col", -1);
        } else {
            note(diags, "agent '" + tag + "': malformed cell entry dropped");
            continue;
        }
        CellRef view_cell{r, c};
        if (!pruned.view().contains(view_cell)) {
            note(diags, "agent '" + tag + "': cell (" + std::to_string(r) + "," +
                            std::to_string(c) + ") outside pruned view, dropped");
            continue;
        }
        out.insert(pruned.to_original(view_cell));
    }
    return out;
}

std::string render_subquestions(const std::vector<SubQuestion>& subqs) {
    std::ostringstream out;
    for (std::size_t i = 0; i < subqs.size(); ++i) {
        out << i << ": " << subqs[i].text << "\n";
    }
    return out.str();
}

std::set<int> all_rows(const Table& table) {
    std::set<int> out;
    for (int r = 0; r < table.n_rows(); ++r) out.insert(r);
    return out;
}

}  // namespace

std::string to_string(PipelineVariant v) {
    switch (v) {
        case PipelineVariant::Standard: return "Standard";
        case PipelineVariant::DecomposeBeforePrune: return "DecomposeBeforePrune";
        case PipelineVariant::PerSubquery: return "PerSubquery";
        case PipelineVariant::NoPruning: return "NoPruning";
        case PipelineVariant::NoDecomposition: return "NoDecomposition";
    }
    return "Standard";
}

PipelineVariant variant_from_string(const std::string& s) {
    if (s == "Standard") return PipelineVariant::Standard;
    if (s == "DecomposeBeforePrune") return PipelineVariant::DecomposeBeforePrune;
    if (s == "PerSubquery") return PipelineVariant::PerSubquery;
    if (s == "NoPruning") return PipelineVariant::NoPruning;
    if (s == "NoDecomposition") return PipelineVariant::NoDecomposition;
    throw UsageError("unknown pipeline variant: " + s +
                     " (expected Standard, DecomposeBeforePrune, PerSubquery, NoPruning, "
                     "NoDecomposition)");
}

LlmEntailmentJudge::LlmEntailmentJudge(Gateway& gateway, std::string model,
                                       const PromptLibrary& prompts)
    : gateway_(gateway), model_(std::move(model)), prompts_(prompts) {}

Judgment LlmEntailmentJudge::judge(const std::string& premise, const std::string& hypothesis) {
    ChatRequest req;
    req.model = model_;
    req.system_prompt = kSystemPrompt;
    req.user_prompt =
        prompts_.render("entailment", {{"premise", premise}, {"hypothesis", hypothesis}});
    req.tag = "entailment";
    try {
        json j = extract_json(gateway_.complete(req).text);
        Judgment out;
        out.entailed = j.value("entailed", false);
        out.score = j.value("score", out.entailed ? 1.0 : 0.0);
        return out;
    } catch (const ExtractionError&) {
        return Judgment{false, 0.0};  // judge failure counts as not entailed
    }
}

ColumnSelection select_columns(const Table& table, const std::string& question,
                               const std::string& answer, Gateway& gateway,
                               const AgentConfig& cfg, std::vector<std::string>* diags) {
    std::string prompt = cfg.prompts.render(
        "column_relevance", {{"table", render_table(table, RenderFormat::Markdown)},
                             {"question", question},
                             {"answer", answer}});
    json j = ask_json(gateway, cfg, "column_relevance", prompt, diags);

    ColumnSelection sel;
    sel.explicit_cols = parse_column_array(j.value("explicit", json::array()), table,
                                           "column_relevance", diags);
    sel.implicit_cols = parse_column_array(j.value("implicit", json::array()), table,
                                           "column_relevance", diags);
    for (int c : sel.explicit_cols) sel.implicit_cols.erase(c);

    if (sel.all().empty()) {
        note(diags, "column_relevance: empty selection, keeping all columns");
        for (int c = 0; c < table.n_cols(); ++c) sel.explicit_cols.insert(c);
    }
    return sel;
}

EvidenceRows extract_evidence_rows(const Table& table, const ColumnSelection& cols,
                                   const std::string& question, const std::string& answer,
                                   Gateway& gateway, const AgentConfig& cfg,
                                   std::vector<std::string>* diags) {
    std::ostringstream col_list;
    for (int c : cols.all()) {
        if (col_list.tellp() > 0) col_list << ", ";
        col_list << "[" << c << "] " << table.headers()[static_cast<std::size_t>(c)];
    }
    std::string prompt = cfg.prompts.render(
        "evidence_span", {{"table", render_table(table, RenderFormat::Markdown)},
                          {"question", question},
                          {"answer", answer},
                          {"columns", col_list.str()}});
    json j = ask_json(gateway, cfg, "evidence_span", prompt, diags);

    EvidenceRows out;
    out.filter_text = j.value("filter", "");
    if (!out.filter_text.empty()) {
        try {
            FilterExpr expr = parse_filter(out.filter_text);
            out.rows = evaluate_filter(expr, table, diags);
            if (!out.rows.empty()) return out;
            note(diags, "evidence_span: filter matched zero rows, falling back to row listing");
        } catch (const Error& e) {
            note(diags, std::string("evidence_span: filter rejected (") + e.what() +
                            "), falling back to row listing");
        }
    } else {
        note(diags, "evidence_span: no filter in output, falling back to row listing");
    }

    std::string fb_prompt = cfg.prompts.render(
        "evidence_rows_fallback", {{"table", render_table(table, RenderFormat::Markdown)},
                                   {"question", question},
                                   {"answer", answer}});
    json fb = ask_json(gateway, cfg, "evidence_rows_fallback", fb_prompt, diags);
    out.rows.clear();
    for (const auto& item : fb.value("rows", json::array())) {
        if (!item.is_number_integer()) continue;
        int r = item.get<int>();
        if (r >= 0 && r < table.n_rows()) {
            out.rows.insert(r);
        } else {
            note(diags, "evidence_rows_fallback: row " + std::to_string(r) +
                            " out of range, dropped");
        }
    }
    if (out.rows.empty()) {
        note(diags, "evidence row selection empty after fallback");
    }
    return out;
}

std::vector<SubQuestion> decompose_query(const PrunedTable& pruned, const std::string& question,
                                         const std::string& answer, Gateway& gateway,
                                         EntailmentJudge& judge, const AgentConfig& cfg,
                                         std::vector<std::string>* diags) {
    std::string prompt = cfg.prompts.render(
        "query_decomposition", {{"table", render_table(pruned.view(), RenderFormat::Markdown)},
                                {"question", question},
                                {"answer", answer}});
    json j = ask_json(gateway, cfg, "query_decomposition", prompt, diags);

    std::vector<SubQuestion> subqs;
    for (const auto& item : j.value("subquestions", json::array())) {
        SubQuestion sq;
        if (item.is_string()) {
            sq.text = item.get<std::string>();
            sq.derived_fact = sq.text;
        } else if (item.is_object()) {
            sq.text = item.value("question", "");
            sq.derived_fact = item.value("fact", sq.text);
        }
        if (!sq.text.empty()) subqs.push_back(std::move(sq));
    }
    if (subqs.empty()) {
        note(diags, "query_decomposition: zero sub-questions, using the original question");
        subqs.push_back(SubQuestion{question, answer, false});
    }

    // Entailment gate: the answer must entail each derived fact. Unverified
    // sub-questions are flagged, and dropped only when configured to.
    std::vector<SubQuestion> kept;
    for (auto& sq : subqs) {
        sq.verified = judge.judge(answer, sq.derived_fact).entailed;
        if (!sq.verified) {
            note(diags, "query_decomposition: sub-question not entailed by answer: " + sq.text);
            if (cfg.drop_unverified_subquestions) continue;
        }
        kept.push_back(std::move(sq));
    }
    if (kept.empty()) {
        note(diags, "query_decomposition: all sub-questions dropped, using original question");
        kept.push_back(SubQuestion{question, answer, false});
    }
    return kept;
}

std::vector<SubAttribution> attribute_subqueries(const PrunedTable& pruned,
                                                 const std::vector<SubQuestion>& subqs,
                                                 const std::string& question,
                                                 const std::string& answer, Gateway& gateway,
                                                 AttributionMode mode, const AgentConfig& cfg,
                                                 std::vector<std::string>* diags) {
    if (subqs.empty()) throw AgentOutputError("attribute_subqueries requires sub-questions");
    std::vector<SubAttribution> out;
    out.reserve(subqs.size());
    const std::string table_text = render_table(pruned.view(), RenderFormat::Markdown);

    if (mode == AttributionMode::PerSubquery) {
        for (const auto& sq : subqs) {
            std::string prompt = cfg.prompts.render("subquery_attribution_single",
                                                    {{"table", table_text},
                                                     {"question", question},
                                                     {"answer", answer},
                                                     {"subquestions", sq.text}});
            json j = ask_json(gateway, cfg, "subquery_attribution", prompt, diags);
            SubAttribution sa{sq, parse_cells(j.value("cells", json::array()), pruned,
                                              "subquery_attribution", diags)};
            if (sa.cells.empty()) {
                note(diags, "subquery_attribution: no valid cells for sub-question: " + sq.text);
            }
            out.push_back(std::move(sa));
        }
        return out;
    }

    std::string prompt = cfg.prompts.render("subquery_attribution",
                                            {{"table", table_text},
                                             {"question", question},
                                             {"answer", answer},
                                             {"subquestions", render_subquestions(subqs)}});
    json j = ask_json(gateway, cfg, "subquery_attribution", prompt, diags);

    std::vector<AttributionSet> by_index(subqs.size());
    for (const auto& item : j.value("attributions", json::array())) {
        if (!item.is_object()) continue;
        int idx = item.value("subquestion", -1);
        if (idx < 0 || idx >= static_cast<int>(subqs.size())) {
            note(diags, "subquery_attribution: attribution for unknown sub-question index " +
                            std::to_string(idx) + ", dropped");
            continue;
        }
        AttributionSet cells = parse_cells(item.value("cells", json::array()), pruned,
                                           "subquery_attribution", diags);
        by_index[static_cast<std::size_t>(idx)].insert(cells.begin(), cells.end());
    }
    for (std::size_t i = 0; i < subqs.size(); ++i) {
        if (by_index[i].empty()) {
            note(diags, "subquery_attribution: no valid cells for sub-question: " + subqs[i].text);
        }
        out.push_back(SubAttribution{subqs[i], std::move(by_index[i])});
    }
    return out;
}

Finalization finalize(const Table& table, const std::string& answer,
                      const std::vector<SubAttribution>& sub_attrs, Gateway& gateway,
                      const AgentConfig& cfg, std::vector<std::string>* diags) {
    Finalization fin;
    for (const auto& sa : sub_attrs) fin.final_cells.insert(sa.cells.begin(), sa.cells.end());
    if (fin.final_cells.empty()) {
        note(diags, "final_attribution: no candidate cells, skipping alignment");
        return fin;
    }

    std::ostringstream cell_list;
    for (const auto& cell : fin.final_cells) {
        cell_list << "(" << cell.row << "," << cell.col << ") "
                  << table.headers()[static_cast<std::size_t>(cell.col)] << " = "
                  << table.cell(cell) << "\n";
    }
    std::string prompt = cfg.prompts.render(
        "final_attribution", {{"answer", answer}, {"cells", cell_list.str()}});
    json j = ask_json(gateway, cfg, "final_attribution", prompt, diags);

    for (const auto& item : j.value("alignments", json::array())) {
        if (!item.is_object()) continue;
        std::string phrase = item.value("phrase", "");
        std::size_t pos = phrase.empty() ? std::string::npos : answer.find(phrase);
        if (pos == std::string::npos) {
            note(diags, "final_attribution: phrase not found in answer, discarded: '" + phrase +
                            "'");
            continue;
        }
        PhraseAlignment pa;
        pa.phrase = PhraseSpan{static_cast<int>(pos),
                               static_cast<int>(pos + phrase.size()), phrase};
        for (const auto& c : item.value("cells", json::array())) {
            if (!c.is_array() || c.size() != 2 || !c[0].is_number_integer() ||
                !c[1].is_number_integer()) {
                continue;
            }
            CellRef ref{c[0].get<int>(), c[1].get<int>()};
            if (fin.final_cells.count(ref)) {
                pa.cells.insert(ref);
            } else {
                note(diags, "final_attribution: cell (" + std::to_string(ref.row) + "," +
                                std::to_string(ref.col) + ") not among candidates, dropped");
            }
        }
        if (!pa.cells.empty()) fin.alignments.push_back(std::move(pa));
    }
    return fin;
}

AttributionResult run_pipeline(const QAInstance& instance, PipelineVariant variant,
                               Gateway& gateway, EntailmentJudge& judge,
                               const AgentConfig& cfg) {
    AttributionResult res;
    res.instance_id = instance.id;
    res.variant = variant;
    auto* diags = &res.diagnostics;
    const Table& table = instance.table;

    std::vector<SubQuestion> early_subqs;
    if (variant == PipelineVariant::DecomposeBeforePrune) {
        early_subqs = decompose_query(identity_prune(table), instance.question, instance.answer,
                                      gateway, judge, cfg, diags);
    }

    PrunedTable pruned = identity_prune(table);
    if (variant == PipelineVariant::NoPruning) {
        res.kept_rows = pruned.row_map().empty()
                            ? std::set<int>{}
                            : std::set<int>(pruned.row_map().begin(), pruned.row_map().end());
        for (int c = 0; c < table.n_cols(); ++c) res.columns.explicit_cols.insert(c);
    } else {
        res.columns = select_columns(table, instance.question, instance.answer, gateway, cfg,
                                     diags);
        EvidenceRows ev = extract_evidence_rows(table, res.columns, instance.question,
                                                instance.answer, gateway, cfg, diags);
        res.filter_text = ev.filter_text;
        res.kept_rows = ev.rows;
        if (res.kept_rows.empty()) {
            diags->push_back("pipeline: evidence rows empty, keeping all rows");
            res.kept_rows = all_rows(table);
        }
        pruned = prune(table, res.kept_rows, res.columns.all());
    }

    std::vector<SubQuestion> subqs;
    switch (variant) {
        case PipelineVariant::DecomposeBeforePrune:
            subqs = std::move(early_subqs);
            break;
        case PipelineVariant::NoDecomposition:
            subqs.push_back(SubQuestion{instance.question, instance.answer, false});
            break;
        default:
            subqs = decompose_query(pruned, instance.question, instance.answer, gateway, judge,
                                    cfg, diags);
            break;
    }

    AttributionMode mode = variant == PipelineVariant::PerSubquery
                               ? AttributionMode::PerSubquery
                               : AttributionMode::Joint;
    res.sub_attributions = attribute_subqueries(pruned, subqs, instance.question,
                                                instance.answer, gateway, mode, cfg, diags);

    Finalization fin = finalize(table, instance.answer, res.sub_attributions, gateway, cfg,
                                diags);
    res.final_cells = std::move(fin.final_cells);
    res.phrase_alignments = std::move(fin.alignments);
    return res;
}

}  // namespace tabattr
