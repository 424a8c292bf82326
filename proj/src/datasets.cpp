#include "tabattr/datasets.hpp"

#include <algorithm>
#include <fstream>
#include <map>

namespace tabattr {

using nlohmann::json;

SplitFilter split_filter_from_string(const std::string& s) {
    if (s == "gold") return SplitFilter::Gold;
    if (s == "silver") return SplitFilter::Silver;
    if (s == "all") return SplitFilter::All;
    throw UsageError("unknown split '" + s + "' (expected gold, silver, all)");
}

json instance_to_json(const QAInstance& instance) {
    json table;
    table["headers"] = instance.table.headers();
    table["rows"] = instance.table.rows();
    table["metadata"] = instance.table.metadata();

    json gold = json::array();
    for (const auto& g : instance.gold) {
        json group;
        if (g.phrase) {
            group["phrase"] = {{"start", g.phrase->start},
                               {"end", g.phrase->end},
                               {"text", g.phrase->text}};
        } else {
            group["phrase"] = nullptr;
        }
        json cells = json::array();
        for (const auto& c : g.cells) cells.push_back(json::array({c.row, c.col}));
        group["cells"] = cells;
        gold.push_back(group);
    }

    return json{{"id", instance.id},
                {"dataset", to_string(instance.dataset)},
                {"split", to_string(instance.split)},
                {"table", table},
                {"question", instance.question},
                {"answer", instance.answer},
                {"gold", gold}};
}

std::string serialize_instance(const QAInstance& instance) {
    // nlohmann::json objects are key-sorted; compact dump is canonical.
    return instance_to_json(instance).dump();
}

namespace {

const json& require(const json& j, const char* key, const std::string& id,
                    const std::string& field) {
    if (!j.contains(key)) throw ValidationError(id, field, "missing field");
    return j.at(key);
}

}  // namespace

QAInstance instance_from_json(const json& j) {
    std::string id = j.value("id", "");
    if (id.empty()) throw ValidationError("", "id", "missing or empty");

    const std::string ds = require(j, "dataset", id, "dataset").get<std::string>();
    Dataset dataset = dataset_from_string(ds);
    if (to_string(dataset) != ds && ds != "Other") {
        throw ValidationError(id, "dataset", "unknown dataset '" + ds + "'");
    }

    const std::string split_str = require(j, "split", id, "split").get<std::string>();
    Split split;
    if (split_str == "gold") split = Split::Gold;
    else if (split_str == "silver") split = Split::Silver;
    else throw ValidationError(id, "split", "unknown split '" + split_str + "'");

    const json& t = require(j, "table", id, "table");
    if (!t.is_object()) throw ValidationError(id, "table", "not an object");
    const json& headers_j = require(t, "headers", id, "table.headers");
    const json& rows_j = require(t, "rows", id, "table.rows");
    if (!headers_j.is_array() || headers_j.empty()) {
        throw ValidationError(id, "table.headers", "must be a non-empty array");
    }
    if (!rows_j.is_array() || rows_j.empty()) {
        throw ValidationError(id, "table.rows", "must be a non-empty array");
    }

    std::vector<std::string> headers;
    for (const auto& h : headers_j) {
        if (!h.is_string()) throw ValidationError(id, "table.headers", "non-string header");
        headers.push_back(h.get<std::string>());
    }
    std::vector<std::vector<std::string>> rows;
    for (std::size_t r = 0; r < rows_j.size(); ++r) {
        if (!rows_j[r].is_array()) {
            throw ValidationError(id, "table.rows", "row " + std::to_string(r) +
                                                        " is not an array");
        }
        if (rows_j[r].size() != headers.size()) {
            throw ValidationError(id, "table.rows",
                                  "ragged row " + std::to_string(r) + ": " +
                                      std::to_string(rows_j[r].size()) + " cells, expected " +
                                      std::to_string(headers.size()));
        }
        std::vector<std::string> row;
        for (const auto& c : rows_j[r]) {
            if (!c.is_string()) {
                throw ValidationError(id, "table.rows",
                                      "non-string cell in row " + std::to_string(r));
            }
            row.push_back(c.get<std::string>());
        }
        rows.push_back(std::move(row));
    }
    std::map<std::string, std::string> metadata;
    if (t.contains("metadata")) {
        for (const auto& [k, v] : t.at("metadata").items()) {
            if (!v.is_string()) throw ValidationError(id, "table.metadata", "non-string value");
            metadata[k] = v.get<std::string>();
        }
    }

    QAInstance out{id, dataset, Table(std::move(headers), std::move(rows), std::move(metadata)),
                   require(j, "question", id, "question").get<std::string>(),
                   require(j, "answer", id, "answer").get<std::string>(),
                   {},
                   split};

    const json& gold_j = j.value("gold", json::array());
    for (std::size_t gi = 0; gi < gold_j.size(); ++gi) {
        const json& g = gold_j[gi];
        const std::string field = "gold[" + std::to_string(gi) + "]";
        GoldGroup group;
        if (g.contains("phrase") && !g.at("phrase").is_null()) {
            const json& p = g.at("phrase");
            PhraseSpan span;
            span.start = p.value("start", -1);
            span.end = p.value("end", -1);
            span.text = p.value("text", "");
            if (span.start < 0 || span.end <= span.start ||
                span.end > static_cast<int>(out.answer.size())) {
                throw ValidationError(id, field + ".phrase", "span outside answer");
            }
            if (out.answer.substr(static_cast<std::size_t>(span.start),
                                  static_cast<std::size_t>(span.end - span.start)) !=
                span.text) {
                throw ValidationError(id, field + ".phrase",
                                      "text does not match answer[start..end]");
            }
            group.phrase = span;
        }
        for (const auto& c : g.value("cells", json::array())) {
            if (!c.is_array() || c.size() != 2 || !c[0].is_number_integer() ||
                !c[1].is_number_integer()) {
                throw ValidationError(id, field + ".cells", "cell must be [row, col]");
            }
            CellRef ref{c[0].get<int>(), c[1].get<int>()};
            if (!out.table.contains(ref)) {
                throw ValidationError(id, field + ".cells",
                                      "cell (" + std::to_string(ref.row) + "," +
                                          std::to_string(ref.col) + ") out of bounds");
            }
            group.cells.insert(ref);
        }
        out.gold.push_back(std::move(group));
    }

    if (out.split == Split::Gold && out.gold.empty()) {
        throw ValidationError(id, "gold", "gold split requires gold annotations");
    }
    return out;
}

LoadResult load_dataset(const std::string& path, SplitFilter split) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open dataset file: " + path);
    LoadResult out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            out.errors.push_back({/*id*/ "", "json", "malformed JSON line", lineno});
            continue;
        }
        try {
            QAInstance inst = instance_from_json(j);
            if (split == SplitFilter::Gold && inst.split != Split::Gold) continue;
            if (split == SplitFilter::Silver && inst.split != Split::Silver) continue;
            out.instances.push_back(std::move(inst));
        } catch (const ValidationError& e) {
            out.errors.push_back({e.instance_id(), e.field(), e.what(), lineno});
        } catch (const Error& e) {
            out.errors.push_back({j.value("id", ""), "table", e.what(), lineno});
        }
    }
    return out;
}

void save_dataset(const std::string& path, const std::vector<QAInstance>& instances) {
    std::ofstream out(path);
    if (!out) throw UsageError("cannot write dataset file: " + path);
    for (const auto& inst : instances) out << serialize_instance(inst) << "\n";
}

namespace {

SizeStats size_stats(const std::vector<int>& values) {
    SizeStats s;
    if (values.empty()) return s;
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    double sum = 0;
    for (int v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    return s;
}

}  // namespace

std::vector<DatasetStats> stats(const std::vector<QAInstance>& instances) {
    if (instances.empty()) throw Error("stats over empty instance list");
    std::map<std::string, std::vector<const QAInstance*>> by_dataset;
    for (const auto& inst : instances) by_dataset[to_string(inst.dataset)].push_back(&inst);

    std::vector<DatasetStats> out;
    for (const auto& [name, insts] : by_dataset) {
        DatasetStats s;
        s.name = name;
        s.total = insts.size();
        std::vector<int> rows, cols, answers;
        for (const auto* inst : insts) {
            (inst->split == Split::Gold ? s.gold : s.silver)++;
            rows.push_back(inst->table.n_rows());
            cols.push_back(inst->table.n_cols());
            answers.push_back(static_cast<int>(inst->answer.size()));
        }
        s.rows = size_stats(rows);
        s.cols = size_stats(cols);
        s.answer_length = size_stats(answers);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open manifest file: " + path);
    json j = json::parse(in);
    if (!j.is_array()) throw UsageError("manifest must be a JSON array");
    std::vector<ManifestEntry> out;
    for (const auto& e : j) {
        ManifestEntry m;
        m.name = e.at("name").get<std::string>();
        m.path = e.at("path").get<std::string>();
        m.gold_count = e.value("gold_count", 0u);
        m.silver_count = e.value("silver_count", 0u);
        m.note = e.value("note", "");
        out.push_back(std::move(m));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Source-dataset importers

namespace {

std::vector<json> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open file: " + path);
    std::vector<json> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(json::parse(line));
    }
    return out;
}

std::string join_headers(const std::string& upper, const std::string& lower_part) {
    if (upper.empty()) return lower_part;
    if (lower_part.empty()) return upper;
    return upper + " | " + lower_part;
}

}  // namespace

std::vector<QAInstance> import_totto(const std::string& path, Split split) {
    std::vector<QAInstance> out;
    for (const auto& rec : read_jsonl(path)) {
        const json& grid_j = rec.at("table");

        // Expand row/column spans into a dense grid, tracking which slots are
        // already occupied by spans from earlier rows.
        std::vector<std::vector<std::string>> grid;
        std::vector<std::vector<bool>> is_header;
        std::vector<std::vector<bool>> occupied;
        auto ensure = [&](std::size_t rr, std::size_t width) {
            while (grid.size() <= rr) {
                grid.emplace_back();
                is_header.emplace_back();
                occupied.emplace_back();
            }
            while (grid[rr].size() < width) {
                grid[rr].push_back("");
                is_header[rr].push_back(false);
                occupied[rr].push_back(false);
            }
        };
        for (std::size_t r = 0; r < grid_j.size(); ++r) {
            for (const auto& cell_j : grid_j[r]) {
                std::string value = cell_j.value("value", "");
                bool header = cell_j.value("is_header", false);
                std::size_t cspan =
                    static_cast<std::size_t>(std::max(1, cell_j.value("column_span", 1)));
                std::size_t rspan =
                    static_cast<std::size_t>(std::max(1, cell_j.value("row_span", 1)));
                // First column where the whole span width is free in this row.
                std::size_t c = 0;
                for (;; ++c) {
                    ensure(r, c + cspan);
                    bool free = true;
                    for (std::size_t dc = 0; dc < cspan; ++dc) free = free && !occupied[r][c + dc];
                    if (free) break;
                }
                for (std::size_t dr = 0; dr < rspan; ++dr) {
                    ensure(r + dr, c + cspan);
                    for (std::size_t dc = 0; dc < cspan; ++dc) {
                        grid[r + dr][c + dc] = value;
                        is_header[r + dr][c + dc] = header;
                        occupied[r + dr][c + dc] = true;
                    }
                }
            }
        }
        if (grid.empty()) continue;
        std::size_t n_cols = 0;
        for (const auto& row : grid) n_cols = std::max(n_cols, row.size());
        for (std::size_t r = 0; r < grid.size(); ++r) ensure(r, n_cols);

        // Leading all-header rows are stacked into one flattened header.
        std::size_t header_rows = 0;
        while (header_rows < grid.size()) {
            bool all = true;
            for (bool h : is_header[header_rows]) all = all && h;
            if (!all) break;
            ++header_rows;
        }
        if (header_rows == 0 || header_rows >= grid.size()) continue;

        std::vector<std::string> headers(n_cols);
        for (std::size_t hr = 0; hr < header_rows; ++hr) {
            for (std::size_t c = 0; c < n_cols; ++c) {
                if (hr > 0 && grid[hr][c] == grid[hr - 1][c]) continue;  // merged span
                headers[c] = join_headers(headers[c], grid[hr][c]);
            }
        }
        std::vector<std::vector<std::string>> data(grid.begin() + static_cast<long>(header_rows),
                                                   grid.end());

        std::string id = rec.contains("example_id")
                             ? (rec.at("example_id").is_string()
                                    ? rec.at("example_id").get<std::string>()
                                    : std::to_string(rec.at("example_id").get<long>()))
                             : "totto-" + std::to_string(out.size());
        std::map<std::string, std::string> metadata;
        if (rec.contains("table_page_title"))
            metadata["title"] = rec.at("table_page_title").get<std::string>();
        if (rec.contains("table_section_title"))
            metadata["section"] = rec.at("table_section_title").get<std::string>();
        std::string answer;
        if (rec.contains("sentence_annotations") && !rec.at("sentence_annotations").empty()) {
            answer = rec.at("sentence_annotations")[0].value("final_sentence", "");
        } else {
            answer = rec.value("answer", "");
        }
        QAInstance inst{id,
                        Dataset::ToTTo,
                        Table(std::move(headers), std::move(data), std::move(metadata)),
                        rec.value("question", ""),
                        answer,
                        {},
                        split};

        GoldGroup group;  // native highlights carry no phrase alignment
        for (const auto& hc : rec.value("highlighted_cells", json::array())) {
            int r = hc[0].get<int>() - static_cast<int>(header_rows);
            int c = hc[1].get<int>();
            CellRef ref{r, c};
            if (inst.table.contains(ref)) group.cells.insert(ref);
        }
        if (!group.cells.empty()) inst.gold.push_back(std::move(group));
        if (inst.split == Split::Gold && inst.gold.empty()) inst.split = Split::Silver;
        out.push_back(std::move(inst));
    }
    return out;
}

std::vector<QAInstance> import_fetaqa(const std::string& path, Split split) {
    std::vector<QAInstance> out;
    for (const auto& rec : read_jsonl(path)) {
        const json& arr = rec.at("table_array");
        if (!arr.is_array() || arr.size() < 2) continue;
        std::vector<std::string> headers;
        for (const auto& h : arr[0]) headers.push_back(h.get<std::string>());
        std::vector<std::vector<std::string>> data;
        for (std::size_t r = 1; r < arr.size(); ++r) {
            std::vector<std::string> row;
            for (const auto& c : arr[r]) row.push_back(c.get<std::string>());
            row.resize(headers.size(), "");
            data.push_back(std::move(row));
        }

        std::string id = rec.contains("feta_id")
                             ? (rec.at("feta_id").is_string()
                                    ? rec.at("feta_id").get<std::string>()
                                    : std::to_string(rec.at("feta_id").get<long>()))
                             : "fetaqa-" + std::to_string(out.size());
        std::map<std::string, std::string> metadata;
        if (rec.contains("table_page_name"))
            metadata["title"] = rec.at("table_page_name").get<std::string>();
        QAInstance inst{id,
                        Dataset::FetaQA,
                        Table(std::move(headers), std::move(data), std::move(metadata)),
                        rec.value("question", ""),
                        rec.value("answer", ""),
                        {},
                        split};

        GoldGroup group;  // row 0 of the native grid is the header row
        for (const auto& hc : rec.value("highlighted_cell_ids", json::array())) {
            CellRef ref{hc[0].get<int>() - 1, hc[1].get<int>()};
            if (inst.table.contains(ref)) group.cells.insert(ref);
        }
        if (!group.cells.empty()) inst.gold.push_back(std::move(group));
        if (inst.split == Split::Gold && inst.gold.empty()) inst.split = Split::Silver;
        out.push_back(std::move(inst));
    }
    return out;
}

std::vector<QAInstance> import_aitqa(const std::string& path) {
    std::vector<QAInstance> out;
    for (const auto& rec : read_jsonl(path)) {
        const json& t = rec.at("table");
        const json& col_header = t.at("column_header");  // list of header rows
        const json& data_j = t.at("data");
        if (data_j.empty() || col_header.empty()) continue;

        std::size_t n_cols = col_header[0].size();
        std::vector<std::string> headers(n_cols);
        for (const auto& hrow : col_header) {
            for (std::size_t c = 0; c < n_cols && c < hrow.size(); ++c) {
                headers[c] = join_headers(headers[c], hrow[c].get<std::string>());
            }
        }
        std::vector<std::vector<std::string>> data;
        for (const auto& row_j : data_j) {
            std::vector<std::string> row;
            for (const auto& c : row_j) row.push_back(c.get<std::string>());
            row.resize(n_cols, "");
            data.push_back(std::move(row));
        }

        QAInstance inst{rec.value("id", "aitqa-" + std::to_string(out.size())),
                        Dataset::AITQA,
                        Table(std::move(headers), std::move(data), {}),
                        rec.value("question", ""),
                        rec.value("answer", ""),
                        {},
                        Split::Gold};

        GoldGroup group;
        for (const auto& hc : rec.value("highlighted_cells", json::array())) {
            CellRef ref{hc[0].get<int>(), hc[1].get<int>()};
            if (inst.table.contains(ref)) group.cells.insert(ref);
        }
        if (!group.cells.empty()) inst.gold.push_back(std::move(group));
        if (inst.gold.empty()) inst.split = Split::Silver;
        out.push_back(std::move(inst));
    }
    return out;
}

}  // namespace tabattr
