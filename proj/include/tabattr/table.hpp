#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tabattr/errors.hpp"

namespace tabattr {

// Zero-based coordinate of one data cell. Row 0 is the first data row;
// the header row is not addressable.
struct CellRef {
    int row = 0;
    int col = 0;

    auto operator<=>(const CellRef&) const = default;
};

// Deduplicated, order-free set of cell coordinates.
using AttributionSet = std::set<CellRef>;

enum class Dataset { ToTTo, FetaQA, AITQA, Other };

std::string to_string(Dataset d);
Dataset dataset_from_string(const std::string& s);

// Rectangular grid of verbatim cell strings. Immutable after construction.
class Table {
public:
    Table(std::vector<std::string> headers,
          std::vector<std::vector<std::string>> cells,
          std::map<std::string, std::string> metadata = {});

    int n_rows() const { return static_cast<int>(cells_.size()); }
    int n_cols() const { return static_cast<int>(headers_.size()); }
    const std::vector<std::string>& headers() const { return headers_; }
    const std::vector<std::vector<std::string>>& rows() const { return cells_; }
    const std::map<std::string, std::string>& metadata() const { return metadata_; }

    const std::string& cell(int row, int col) const;
    const std::string& cell(CellRef ref) const { return cell(ref.row, ref.col); }
    bool contains(CellRef ref) const;

    // Case-insensitive header lookup, whitespace trimmed on both sides.
    std::optional<int> find_column(const std::string& name) const;

private:
    std::vector<std::string> headers_;
    std::vector<std::vector<std::string>> cells_;
    std::map<std::string, std::string> metadata_;
};

// Answer substring (byte offsets) tied to its supporting cells.
struct PhraseSpan {
    int start = 0;
    int end = 0;
    std::string text;

    auto operator<=>(const PhraseSpan&) const = default;
};

struct PhraseAlignment {
    PhraseSpan phrase;
    AttributionSet cells;
};

// One gold annotation group. Implicit-evidence cells carry no phrase.
struct GoldGroup {
    std::optional<PhraseSpan> phrase;
    AttributionSet cells;
};

enum class Split { Gold, Silver };

std::string to_string(Split s);

struct QAInstance {
    std::string id;
    Dataset dataset = Dataset::Other;
    Table table;
    std::string question;
    std::string answer;
    std::vector<GoldGroup> gold;
    Split split = Split::Gold;

    // Union of all gold cells, explicit and implicit.
    AttributionSet gold_cells() const;
};

// Sub-table view plus maps back to original coordinates.
class PrunedTable {
public:
    PrunedTable(Table view, std::vector<int> row_map, std::vector<int> col_map);

    const Table& view() const { return view_; }
    const std::vector<int>& row_map() const { return row_map_; }
    const std::vector<int>& col_map() const { return col_map_; }

    CellRef to_original(CellRef view_cell) const;

private:
    Table view_;
    std::vector<int> row_map_;
    std::vector<int> col_map_;
};

PrunedTable prune(const Table& table, const std::set<int>& rows, const std::set<int>& cols);

// View over all rows and columns, identity maps.
PrunedTable identity_prune(const Table& table);

enum class RenderFormat { Markdown, Delimited };

// Deterministic text serialization with row/column index labels.
std::string render_table(const Table& table, RenderFormat format);

}  // namespace tabattr
