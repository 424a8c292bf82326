#include "tabattr/fairscore.hpp"

#include <algorithm>
#include <sstream>

namespace tabattr {

using nlohmann::json;

namespace {

const char* kSystemPrompt =
    "You are a careful table question answering attribution assistant. "
    "Reply with valid JSON only.";

void note(std::vector<std::string>* diags, const std::string& msg) {
    if (diags) diags->push_back(msg);
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
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
    try {
        return extract_json(gateway.complete(repair).text);
    } catch (const ExtractionError&) {
        throw AgentOutputError("agent '" + tag +
                               "' produced no parseable JSON after repair re-prompt");
    }
}

}  // namespace

FairScore fairscore(const FactAlignmentCounts& counts) {
    FairScore out;
    if (counts.a + counts.b == 0) {
        out.recall = 1.0;
        out.recall_vacuous = true;
    } else {
        out.recall = static_cast<double>(counts.a) / static_cast<double>(counts.a + counts.b);
    }
    if (counts.c + counts.d == 0) {
        out.precision = 1.0;
        out.precision_vacuous = true;
    } else {
        out.precision = static_cast<double>(counts.c) / static_cast<double>(counts.c + counts.d);
    }
    return out;
}

std::vector<Fact> cells_to_facts_template(const Table& table, const AttributionSet& cells) {
    std::vector<Fact> out;
    out.reserve(cells.size());
    for (const auto& cell : cells) {
        if (!table.contains(cell)) throw BoundsError("attributed cell outside table");
        const std::string& value = table.cell(cell);
        const std::string& header = table.headers()[static_cast<std::size_t>(cell.col)];
        Fact f;
        f.origin = Fact::Origin::Cell;
        f.source = cell;
        if (trim(value).empty()) {
            f.missing = true;
            f.text = "";
        } else if (cell.col == 0) {
            f.text = value + " is the " + header + ".";
        } else {
            f.text = table.cell(cell.row, 0) + "'s " + header + " is " + value + ".";
        }
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<Fact> cells_to_facts(const Table& table, const AttributionSet& cells,
                                 Gateway& gateway, const AgentConfig& cfg,
                                 std::vector<std::string>* diags) {
    std::vector<Fact> out;
    std::vector<CellRef> ordered;
    std::ostringstream cell_list;
    for (const auto& cell : cells) {
        if (!table.contains(cell)) throw BoundsError("attributed cell outside table");
        if (trim(table.cell(cell)).empty()) {
            Fact f;
            f.origin = Fact::Origin::Cell;
            f.source = cell;
            f.missing = true;
            out.push_back(std::move(f));
            note(diags, "cells_to_facts: empty cell (" + std::to_string(cell.row) + "," +
                            std::to_string(cell.col) + ") excluded from alignment");
            continue;
        }
        cell_list << "(" << cell.row << "," << cell.col << ") column '"
                  << table.headers()[static_cast<std::size_t>(cell.col)] << "', row key '"
                  << table.cell(cell.row, 0) << "', value '" << table.cell(cell) << "'\n";
        ordered.push_back(cell);
    }
    if (ordered.empty()) return out;

    std::string prompt = cfg.prompts.render("cell_to_fact", {{"cells", cell_list.str()}});
    json j = ask_json(gateway, cfg, "cell_to_fact", prompt, diags);
    json facts = j.value("facts", json::array());
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        Fact f;
        f.origin = Fact::Origin::Cell;
        f.source = ordered[i];
        if (i < facts.size() && facts[i].is_string() &&
            !trim(facts[i].get<std::string>()).empty()) {
            f.text = facts[i].get<std::string>();
        } else {
            // Guarantee at least one fact per attributed cell.
            f.text = cells_to_facts_template(table, {ordered[i]})[0].text;
            note(diags, "cells_to_facts: missing model fact for cell (" +
                            std::to_string(ordered[i].row) + "," +
                            std::to_string(ordered[i].col) + "), using template");
        }
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<Fact> answer_to_facts(const std::string& answer, Gateway& gateway,
                                  const AgentConfig& cfg, std::vector<std::string>* diags) {
    if (trim(answer).empty()) throw AgentOutputError("answer_to_facts requires a non-empty answer");
    std::string prompt = cfg.prompts.render("answer_to_fact", {{"answer", answer}});
    json j = ask_json(gateway, cfg, "answer_to_fact", prompt, diags);
    std::vector<Fact> out;
    for (const auto& item : j.value("facts", json::array())) {
        if (item.is_string() && !trim(item.get<std::string>()).empty()) {
            out.push_back(Fact{item.get<std::string>(), Fact::Origin::Answer, std::nullopt, false});
        }
    }
    if (out.empty()) {
        note(diags, "answer_to_facts: zero facts, falling back to the whole answer");
        out.push_back(Fact{answer, Fact::Origin::Answer, std::nullopt, false});
    }
    return out;
}

SupportJudge equality_judge() {
    return [](const Fact& cell_fact, const Fact& answer_fact) {
        return cell_fact.text == answer_fact.text;
    };
}

SupportJudge contains_judge() {
    return [](const Fact& cell_fact, const Fact& answer_fact) {
        return lower(cell_fact.text).find(lower(trim(answer_fact.text))) != std::string::npos;
    };
}

FactAlignmentCounts align_facts(const std::vector<Fact>& cell_facts,
                                const std::vector<Fact>& answer_facts,
                                const SupportJudge& judge) {
    std::vector<const Fact*> usable;
    for (const auto& f : cell_facts) {
        if (!f.missing) usable.push_back(&f);
    }
    std::vector<bool> answer_supported(answer_facts.size(), false);
    std::vector<bool> cell_matched(usable.size(), false);
    for (std::size_t ci = 0; ci < usable.size(); ++ci) {
        for (std::size_t ai = 0; ai < answer_facts.size(); ++ai) {
            bool support = false;
            try {
                support = judge(*usable[ci], answer_facts[ai]);
            } catch (const Error&) {
                support = false;  // judge failure counts as non-supporting
            }
            if (support) {
                answer_supported[ai] = true;
                cell_matched[ci] = true;
            }
        }
    }
    FactAlignmentCounts counts;
    for (bool s : answer_supported) (s ? counts.a : counts.b)++;
    for (bool m : cell_matched) (m ? counts.c : counts.d)++;
    return counts;
}

FactAlignmentCounts align_facts_llm(const std::vector<Fact>& cell_facts,
                                    const std::vector<Fact>& answer_facts, Gateway& gateway,
                                    const AgentConfig& cfg, std::vector<std::string>* diags) {
    std::vector<const Fact*> usable;
    for (const auto& f : cell_facts) {
        if (!f.missing) usable.push_back(&f);
    }

    struct Pair {
        std::size_t cell_index;
        std::size_t answer_index;
    };
    std::vector<Pair> pairs;
    for (std::size_t ci = 0; ci < usable.size(); ++ci) {
        for (std::size_t ai = 0; ai < answer_facts.size(); ++ai) pairs.push_back({ci, ai});
    }

    std::vector<bool> answer_supported(answer_facts.size(), false);
    std::vector<bool> cell_matched(usable.size(), false);

    constexpr std::size_t kBatch = 16;
    for (std::size_t start = 0; start < pairs.size(); start += kBatch) {
        std::size_t end = std::min(start + kBatch, pairs.size());
        std::ostringstream pair_text;
        for (std::size_t i = start; i < end; ++i) {
            pair_text << (i - start) << ". evidence: " << usable[pairs[i].cell_index]->text
                      << "\n   answer fact: " << answer_facts[pairs[i].answer_index].text
                      << "\n";
        }
        json verdicts;
        try {
            json j = ask_json(gateway, cfg, "fact_support",
                              cfg.prompts.render("fact_support", {{"pairs", pair_text.str()}}),
                              diags);
            verdicts = j.value("support", json::array());
        } catch (const AgentOutputError& e) {
            note(diags, std::string("fact_support: batch failed, pairs counted as "
                                    "non-supporting: ") +
                            e.what());
            continue;
        }
        for (std::size_t i = start; i < end; ++i) {
            std::size_t k = i - start;
            bool support = k < verdicts.size() && verdicts[k].is_boolean() &&
                           verdicts[k].get<bool>();
            if (support) {
                answer_supported[pairs[i].answer_index] = true;
                cell_matched[pairs[i].cell_index] = true;
            }
        }
    }

    FactAlignmentCounts counts;
    for (bool s : answer_supported) (s ? counts.a : counts.b)++;
    for (bool m : cell_matched) (m ? counts.c : counts.d)++;
    return counts;
}

SupportJudge llm_support_judge(Gateway& gateway, const AgentConfig& cfg,
                               std::vector<std::string>* diags) {
    return [&gateway, cfg, diags](const Fact& cell_fact, const Fact& answer_fact) {
        std::ostringstream pair_text;
        pair_text << "0. evidence: " << cell_fact.text
                  << "\n   answer fact: " << answer_fact.text << "\n";
        json j = ask_json(gateway, cfg, "fact_support",
                          cfg.prompts.render("fact_support", {{"pairs", pair_text.str()}}),
                          diags);
        json verdicts = j.value("support", json::array());
        return !verdicts.empty() && verdicts[0].is_boolean() && verdicts[0].get<bool>();
    };
}

}  // namespace tabattr
