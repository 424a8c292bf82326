#include "tabattr/table.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace tabattr {

namespace {

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

}  // namespace

std::string to_string(Dataset d) {
    switch (d) {
        case Dataset::ToTTo: return "ToTTo";
        case Dataset::FetaQA: return "FetaQA";
        case Dataset::AITQA: return "AITQA";
        case Dataset::Other: return "Other";
    }
    return "Other";
}

Dataset dataset_from_string(const std::string& s) {
    auto l = lower(trim(s));
    if (l == "totto") return Dataset::ToTTo;
    if (l == "fetaqa") return Dataset::FetaQA;
    if (l == "aitqa") return Dataset::AITQA;
    return Dataset::Other;
}

std::string to_string(Split s) {
    return s == Split::Gold ? "gold" : "silver";
}

Table::Table(std::vector<std::string> headers,
             std::vector<std::vector<std::string>> cells,
             std::map<std::string, std::string> metadata)
    : headers_(std::move(headers)), cells_(std::move(cells)), metadata_(std::move(metadata)) {
    if (headers_.empty()) throw BoundsError("table must have at least one column");
    if (cells_.empty()) throw BoundsError("table must have at least one data row");
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        if (cells_[i].size() != headers_.size()) {
            throw BoundsError("ragged table: row " + std::to_string(i) + " has " +
                              std::to_string(cells_[i].size()) + " cells, expected " +
                              std::to_string(headers_.size()));
        }
    }
}

const std::string& Table::cell(int row, int col) const {
    if (row < 0 || row >= n_rows() || col < 0 || col >= n_cols()) {
        throw BoundsError("cell (" + std::to_string(row) + "," + std::to_string(col) +
                          ") outside " + std::to_string(n_rows()) + "x" +
                          std::to_string(n_cols()) + " table");
    }
    return cells_[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)];
}

bool Table::contains(CellRef ref) const {
    return ref.row >= 0 && ref.row < n_rows() && ref.col >= 0 && ref.col < n_cols();
}

std::optional<int> Table::find_column(const std::string& name) const {
    auto needle = lower(trim(name));
    for (int c = 0; c < n_cols(); ++c) {
        if (lower(trim(headers_[static_cast<std::size_t>(c)])) == needle) return c;
    }
    return std::nullopt;
}

AttributionSet QAInstance::gold_cells() const {
    AttributionSet out;
    for (const auto& g : gold) out.insert(g.cells.begin(), g.cells.end());
    return out;
}

PrunedTable::PrunedTable(Table view, std::vector<int> row_map, std::vector<int> col_map)
    : view_(std::move(view)), row_map_(std::move(row_map)), col_map_(std::move(col_map)) {
    if (static_cast<int>(row_map_.size()) != view_.n_rows() ||
        static_cast<int>(col_map_.size()) != view_.n_cols()) {
        throw BoundsError("pruned-table maps do not match view dimensions");
    }
}

CellRef PrunedTable::to_original(CellRef view_cell) const {
    if (!view_.contains(view_cell)) {
        throw BoundsError("view cell (" + std::to_string(view_cell.row) + "," +
                          std::to_string(view_cell.col) + ") outside pruned view");
    }
    return CellRef{row_map_[static_cast<std::size_t>(view_cell.row)],
                   col_map_[static_cast<std::size_t>(view_cell.col)]};
}

PrunedTable prune(const Table& table, const std::set<int>& rows, const std::set<int>& cols) {
    if (rows.empty() || cols.empty()) {
        throw EmptySelectionError("prune requires non-empty row and column selections");
    }
    for (int r : rows) {
        if (r < 0 || r >= table.n_rows())
            throw BoundsError("row index " + std::to_string(r) + " out of range");
    }
    for (int c : cols) {
        if (c < 0 || c >= table.n_cols())
            throw BoundsError("column index " + std::to_string(c) + " out of range");
    }
    std::vector<int> row_map(rows.begin(), rows.end());
    std::vector<int> col_map(cols.begin(), cols.end());

    std::vector<std::string> headers;
    headers.reserve(col_map.size());
    for (int c : col_map) headers.push_back(table.headers()[static_cast<std::size_t>(c)]);

    std::vector<std::vector<std::string>> cells;
    cells.reserve(row_map.size());
    for (int r : row_map) {
        std::vector<std::string> row;
        row.reserve(col_map.size());
        for (int c : col_map) row.push_back(table.cell(r, c));
        cells.push_back(std::move(row));
    }
    return PrunedTable(Table(std::move(headers), std::move(cells), table.metadata()),
                       std::move(row_map), std::move(col_map));
}

PrunedTable identity_prune(const Table& table) {
    std::set<int> rows, cols;
    for (int r = 0; r < table.n_rows(); ++r) rows.insert(r);
    for (int c = 0; c < table.n_cols(); ++c) cols.insert(c);
    return prune(table, rows, cols);
}

std::string render_table(const Table& table, RenderFormat format) {
    std::ostringstream out;
    if (format == RenderFormat::Markdown) {
        out << "| row |";
        for (int c = 0; c < table.n_cols(); ++c) {
            out << " [" << c << "] " << table.headers()[static_cast<std::size_t>(c)] << " |";
        }
        out << "\n|---|";
        for (int c = 0; c < table.n_cols(); ++c) out << "---|";
        out << "\n";
        for (int r = 0; r < table.n_rows(); ++r) {
            out << "| " << r << " |";
            for (int c = 0; c < table.n_cols(); ++c) out << " " << table.cell(r, c) << " |";
            out << "\n";
        }
    } else {
        out << "row";
        for (int c = 0; c < table.n_cols(); ++c) {
            out << "\t[" << c << "] " << table.headers()[static_cast<std::size_t>(c)];
        }
        out << "\n";
        for (int r = 0; r < table.n_rows(); ++r) {
            out << r;
            for (int c = 0; c < table.n_cols(); ++c) out << "\t" << table.cell(r, c);
            out << "\n";
        }
    }
    return out.str();
}

}  // namespace tabattr
