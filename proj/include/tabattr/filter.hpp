#pragma once

#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "tabattr/table.hpp"

namespace tabattr {

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge, Contains };

std::string to_string(CompareOp op);

// Column reference: header name (resolved case-insensitively) or 0-based index.
struct ColumnRef {
    std::variant<std::string, int> ref;

    bool operator==(const ColumnRef&) const = default;
};

struct Literal {
    // Numeric literals keep their source spelling for exact round-tripping.
    bool is_number = false;
    double number = 0.0;
    std::string text;

    bool operator==(const Literal&) const = default;
};

struct Comparison;
struct And;
struct Or;
struct Not;

using FilterExpr = std::variant<Comparison, And, Or, Not>;

struct Comparison {
    ColumnRef column;
    CompareOp op = CompareOp::Eq;
    Literal literal;

    bool operator==(const Comparison&) const = default;
};

struct And {
    std::shared_ptr<FilterExpr> left, right;
    bool operator==(const And& o) const;
};

struct Or {
    std::shared_ptr<FilterExpr> left, right;
    bool operator==(const Or& o) const;
};

struct Not {
    std::shared_ptr<FilterExpr> child;
    bool operator==(const Not& o) const;
};

// Coercion target for noisy numeric-ish cells.
struct TypedValue {
    enum class Kind { Number, Range, OpenRange, Text, Missing };
    Kind kind = Kind::Missing;
    double lo = 0.0;   // Number value, Range lower bound, OpenRange lower bound
    double hi = 0.0;   // Range upper bound
    std::string text;  // Text payload (original string, trimmed)

    static TypedValue number(double v) { return {Kind::Number, v, v, {}}; }
    static TypedValue range(double lo, double hi) { return {Kind::Range, lo, hi, {}}; }
    static TypedValue open_range(double lo) { return {Kind::OpenRange, lo, lo, {}}; }
    static TypedValue missing() { return {Kind::Missing, 0, 0, {}}; }
    static TypedValue text_value(std::string s) { return {Kind::Text, 0, 0, std::move(s)}; }

    bool is_numeric() const {
        return kind == Kind::Number || kind == Kind::Range || kind == Kind::OpenRange;
    }
};

// Total coercion: never throws. Strips currency symbols, thousands commas,
// percent signs; recognizes dashed ranges and trailing-plus open ranges.
TypedValue coerce_cell(const std::string& raw);

// Parses a WHERE-style condition. A leading WHERE keyword is stripped.
// Precedence: NOT > AND > OR; parentheses honored.
FilterExpr parse_filter(const std::string& text);

// Canonical rendering: uppercase keywords, single-quoted string literals,
// spaces around operators. parse_filter(print_filter(e)) == e.
std::string print_filter(const FilterExpr& expr);

// Rows of `table` satisfying `expr`. Diagnostics collect coercion misses
// (ordering comparison against a non-numeric cell evaluates to false).
std::set<int> evaluate_filter(const FilterExpr& expr, const Table& table,
                              std::vector<std::string>* diagnostics = nullptr);

// Rows among `rows` maximizing the coerced value of `column` (all ties).
// Ranges compare by upper bound, open ranges by their lower bound.
std::set<int> argmax_rows(const Table& table, const std::set<int>& rows,
                          const std::string& column);

}  // namespace tabattr
