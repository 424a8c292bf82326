#include "tabattr/filter.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
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

bool parse_full_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(begin, &end);
    if (end != begin + s.size() || errno == ERANGE || !std::isfinite(v)) return false;
    out = v;
    return true;
}

}  // namespace

std::string to_string(CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return "=";
        case CompareOp::Ne: return "!=";
        case CompareOp::Lt: return "<";
        case CompareOp::Le: return "<=";
        case CompareOp::Gt: return ">";
        case CompareOp::Ge: return ">=";
        case CompareOp::Contains: return "CONTAINS";
    }
    return "=";
}

bool And::operator==(const And& o) const { return *left == *o.left && *right == *o.right; }
bool Or::operator==(const Or& o) const { return *left == *o.left && *right == *o.right; }
bool Not::operator==(const Not& o) const { return *child == *o.child; }

// ---------------------------------------------------------------------------
// Cell coercion

TypedValue coerce_cell(const std::string& raw) {
    std::string s = trim(raw);
    std::string l = lower(s);
    if (s.empty() || s == "-" || s == "--" || s == "---" || l == "n/a") {
        return TypedValue::missing();
    }

    // Strip formatting noise before numeric interpretation.
    std::string cleaned;
    cleaned.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        if (s.compare(i, 3, "€") == 0 || s.compare(i, 2, "£") == 0) {
            i += (s[i] == '\xe2') ? 3 : 2;
            continue;
        }
        char c = s[i];
        if (c == '$' || c == ',' || c == '%' || c == ' ' || c == '\t') {
            ++i;
            continue;
        }
        cleaned += c;
        ++i;
    }

    double v = 0;
    if (!cleaned.empty() && cleaned.back() == '+' &&
        parse_full_number(cleaned.substr(0, cleaned.size() - 1), v)) {
        return TypedValue::open_range(v);
    }

    // Range separators: en dash, em dash, double hyphen, or an interior
    // hyphen following a digit (a leading hyphen is a sign).
    std::size_t sep = std::string::npos, sep_len = 0;
    for (std::size_t i = 0; i < cleaned.size(); ++i) {
        if (cleaned.compare(i, 3, "–") == 0 || cleaned.compare(i, 3, "—") == 0) {
            sep = i;
            sep_len = 3;
            break;
        }
        if (cleaned.compare(i, 2, "--") == 0 && i > 0) {
            sep = i;
            sep_len = 2;
            break;
        }
        if (cleaned[i] == '-' && i > 0) {
            char prev = cleaned[i - 1];
            if ((std::isdigit(static_cast<unsigned char>(prev)) || prev == '.') &&
                prev != 'e' && prev != 'E') {
                sep = i;
                sep_len = 1;
                break;
            }
        }
    }
    if (sep != std::string::npos) {
        double a = 0, b = 0;
        if (parse_full_number(cleaned.substr(0, sep), a) &&
            parse_full_number(cleaned.substr(sep + sep_len), b)) {
            return TypedValue::range(std::min(a, b), std::max(a, b));
        }
    }

    if (parse_full_number(cleaned, v)) return TypedValue::number(v);
    return TypedValue::text_value(s);
}

// ---------------------------------------------------------------------------
// Tokenizer

namespace {

enum class TokKind { Ident, Number, SingleQuoted, DoubleQuoted, Op, LParen, RParen, End };

struct Token {
    TokKind kind = TokKind::End;
    std::string text;   // identifier, literal payload, or operator spelling
    std::size_t pos = 0;
    double number = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_ws();
            Token t = next();
            out.push_back(t);
            if (t.kind == TokKind::End) break;
        }
        return out;
    }

private:
    void skip_ws() {
        while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
    }

    Token next() {
        if (i_ >= src_.size()) return {TokKind::End, "", i_, 0};
        std::size_t start = i_;
        char c = src_[i_];
        if (c == '(') { ++i_; return {TokKind::LParen, "(", start, 0}; }
        if (c == ')') { ++i_; return {TokKind::RParen, ")", start, 0}; }
        if (c == '\'' || c == '"') return quoted(c);

        // Unicode comparison glyphs occasionally emitted by models.
        if (src_.compare(i_, 3, "≤") == 0) { i_ += 3; return {TokKind::Op, "<=", start, 0}; }
        if (src_.compare(i_, 3, "≥") == 0) { i_ += 3; return {TokKind::Op, ">=", start, 0}; }
        if (src_.compare(i_, 3, "≠") == 0) { i_ += 3; return {TokKind::Op, "!=", start, 0}; }

        if (c == '<' || c == '>' || c == '!' || c == '=') {
            std::string op(1, c);
            ++i_;
            if (i_ < src_.size() && (src_[i_] == '=' || (c == '<' && src_[i_] == '>'))) {
                op += src_[i_];
                ++i_;
            }
            if (op == "==") op = "=";
            if (op == "<>") op = "!=";
            if (op == "!") throw ParseError("lone '!' is not an operator", start);
            return {TokKind::Op, op, start, 0};
        }

        if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
            const char* begin = src_.c_str() + i_;
            char* end = nullptr;
            double v = std::strtod(begin, &end);
            if (end != begin) {
                std::size_t len = static_cast<std::size_t>(end - begin);
                std::string spelling = src_.substr(i_, len);
                i_ += len;
                return {TokKind::Number, spelling, start, v};
            }
        }

        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i_;
            while (j < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[j])) || src_[j] == '_' ||
                    src_[j] == '.')) {
                ++j;
            }
            std::string word = src_.substr(i_, j - i_);
            i_ = j;
            return {TokKind::Ident, word, start, 0};
        }
        throw ParseError("unexpected character '" + std::string(1, c) + "'", start);
    }

    Token quoted(char quote) {
        std::size_t start = i_;
        ++i_;
        std::string out;
        while (i_ < src_.size()) {
            char c = src_[i_];
            if (c == '\\' && i_ + 1 < src_.size()) {
                out += src_[i_ + 1];
                i_ += 2;
                continue;
            }
            if (c == quote) {
                ++i_;
                return {quote == '\'' ? TokKind::SingleQuoted : TokKind::DoubleQuoted, out,
                        start, 0};
            }
            out += c;
            ++i_;
        }
        throw ParseError("unterminated string literal", start);
    }

    const std::string& src_;
    std::size_t i_ = 0;
};

bool is_keyword(const Token& t, const char* kw) {
    return t.kind == TokKind::Ident && lower(t.text) == lower(kw);
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    FilterExpr parse() {
        if (is_keyword(peek(), "where")) ++i_;
        FilterExpr e = parse_or();
        if (peek().kind != TokKind::End) {
            throw ParseError("expected end of filter, found '" + peek().text + "'", peek().pos);
        }
        return e;
    }

private:
    const Token& peek() const { return toks_[i_]; }
    const Token& take() { return toks_[i_++]; }

    FilterExpr parse_or() {
        FilterExpr left = parse_and();
        while (is_keyword(peek(), "or")) {
            ++i_;
            FilterExpr right = parse_and();
            left = Or{std::make_shared<FilterExpr>(std::move(left)),
                      std::make_shared<FilterExpr>(std::move(right))};
        }
        return left;
    }

    FilterExpr parse_and() {
        FilterExpr left = parse_not();
        while (is_keyword(peek(), "and")) {
            ++i_;
            FilterExpr right = parse_not();
            left = And{std::make_shared<FilterExpr>(std::move(left)),
                       std::make_shared<FilterExpr>(std::move(right))};
        }
        return left;
    }

    FilterExpr parse_not() {
        if (is_keyword(peek(), "not")) {
            std::size_t pos = take().pos;
            (void)pos;
            return Not{std::make_shared<FilterExpr>(parse_not())};
        }
        return parse_primary();
    }

    FilterExpr parse_primary() {
        if (peek().kind == TokKind::LParen) {
            ++i_;
            FilterExpr e = parse_or();
            if (peek().kind != TokKind::RParen) {
                throw ParseError("expected ')'", peek().pos);
            }
            ++i_;
            return e;
        }
        return parse_comparison();
    }

    FilterExpr parse_comparison() {
        Comparison cmp;
        const Token& colTok = peek();
        if (colTok.kind == TokKind::Ident || colTok.kind == TokKind::DoubleQuoted) {
            cmp.column.ref = take().text;
        } else if (colTok.kind == TokKind::Number) {
            double v = colTok.number;
            if (v < 0 || v != std::floor(v)) {
                throw ParseError("column index must be a non-negative integer", colTok.pos);
            }
            cmp.column.ref = static_cast<int>(v);
            take();
        } else {
            throw ParseError("expected column name or index, found '" + colTok.text + "'",
                             colTok.pos);
        }

        const Token& opTok = peek();
        if (opTok.kind == TokKind::Op) {
            const std::string& s = take().text;
            if (s == "=") cmp.op = CompareOp::Eq;
            else if (s == "!=") cmp.op = CompareOp::Ne;
            else if (s == "<") cmp.op = CompareOp::Lt;
            else if (s == "<=") cmp.op = CompareOp::Le;
            else if (s == ">") cmp.op = CompareOp::Gt;
            else if (s == ">=") cmp.op = CompareOp::Ge;
            else throw ParseError("unknown operator '" + s + "'", opTok.pos);
        } else if (is_keyword(opTok, "contains")) {
            take();
            cmp.op = CompareOp::Contains;
        } else {
            throw ParseError("expected comparison operator, found '" + opTok.text + "'",
                             opTok.pos);
        }

        const Token& litTok = peek();
        if (litTok.kind == TokKind::Number) {
            cmp.literal = Literal{true, litTok.number, litTok.text};
            take();
        } else if (litTok.kind == TokKind::SingleQuoted ||
                   litTok.kind == TokKind::DoubleQuoted) {
            cmp.literal = Literal{false, 0, take().text};
        } else if (litTok.kind == TokKind::Ident && !is_keyword(litTok, "and") &&
                   !is_keyword(litTok, "or") && !is_keyword(litTok, "not")) {
            // Bareword literal, common in model output: Language = Tamil
            cmp.literal = Literal{false, 0, take().text};
        } else {
            throw ParseError("expected literal value, found '" + litTok.text + "'", litTok.pos);
        }
        return cmp;
    }

    std::vector<Token> toks_;
    std::size_t i_ = 0;
};

}  // namespace

FilterExpr parse_filter(const std::string& text) {
    if (trim(text).empty()) throw ParseError("empty filter", 0);
    return Parser(Lexer(text).run()).parse();
}

// ---------------------------------------------------------------------------
// Canonical printer

namespace {

bool identifier_safe(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (char c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.') return false;
    }
    auto l = lower(s);
    return l != "and" && l != "or" && l != "not" && l != "where" && l != "contains";
}

std::string quote(const std::string& s, char q) {
    std::string out(1, q);
    for (char c : s) {
        if (c == q || c == '\\') out += '\\';
        out += c;
    }
    out += q;
    return out;
}

int precedence(const FilterExpr& e) {
    if (std::holds_alternative<Or>(e)) return 1;
    if (std::holds_alternative<And>(e)) return 2;
    if (std::holds_alternative<Not>(e)) return 3;
    return 4;
}

std::string print_node(const FilterExpr& e, int min_prec);

std::string print_child(const FilterExpr& child, int min_prec) {
    if (precedence(child) < min_prec) return "(" + print_node(child, 0) + ")";
    return print_node(child, 0);
}

std::string print_node(const FilterExpr& e, int /*min_prec*/) {
    if (const auto* cmp = std::get_if<Comparison>(&e)) {
        std::string col;
        if (const auto* name = std::get_if<std::string>(&cmp->column.ref)) {
            col = identifier_safe(*name) ? *name : quote(*name, '"');
        } else {
            col = std::to_string(std::get<int>(cmp->column.ref));
        }
        std::string lit = cmp->literal.is_number ? cmp->literal.text
                                                 : quote(cmp->literal.text, '\'');
        return col + " " + to_string(cmp->op) + " " + lit;
    }
    if (const auto* n = std::get_if<Not>(&e)) {
        return "NOT " + print_child(*n->child, 4);
    }
    if (const auto* a = std::get_if<And>(&e)) {
        // Right child parenthesized at equal precedence to preserve shape.
        return print_child(*a->left, 2) + " AND " + print_child(*a->right, 3);
    }
    const auto& o = std::get<Or>(e);
    return print_child(*o.left, 1) + " OR " + print_child(*o.right, 2);
}

}  // namespace

std::string print_filter(const FilterExpr& expr) { return print_node(expr, 0); }

// ---------------------------------------------------------------------------
// Evaluation

namespace {

int resolve_column(const ColumnRef& ref, const Table& table) {
    if (const auto* idx = std::get_if<int>(&ref.ref)) {
        if (*idx < 0 || *idx >= table.n_cols()) {
            throw ColumnNotFoundError("column index " + std::to_string(*idx) +
                                      " out of range for " + std::to_string(table.n_cols()) +
                                      " columns");
        }
        return *idx;
    }
    const auto& name = std::get<std::string>(ref.ref);
    if (auto c = table.find_column(name)) return *c;
    std::string available;
    for (const auto& h : table.headers()) {
        if (!available.empty()) available += ", ";
        available += "'" + h + "'";
    }
    throw ColumnNotFoundError("column '" + name + "' not found; available: " + available);
}

bool numeric_compare(const TypedValue& cell, CompareOp op, double k) {
    switch (cell.kind) {
        case TypedValue::Kind::Number:
            switch (op) {
                case CompareOp::Eq: return cell.lo == k;
                case CompareOp::Ne: return cell.lo != k;
                case CompareOp::Lt: return cell.lo < k;
                case CompareOp::Le: return cell.lo <= k;
                case CompareOp::Gt: return cell.lo > k;
                case CompareOp::Ge: return cell.lo >= k;
                default: return false;
            }
        case TypedValue::Kind::Range:
            // A range satisfies an ordering predicate only if all of it does.
            switch (op) {
                case CompareOp::Eq: return cell.lo <= k && k <= cell.hi;
                case CompareOp::Ne: return !(cell.lo <= k && k <= cell.hi);
                case CompareOp::Lt: return cell.hi < k;
                case CompareOp::Le: return cell.hi <= k;
                case CompareOp::Gt: return cell.lo > k;
                case CompareOp::Ge: return cell.lo >= k;
                default: return false;
            }
        case TypedValue::Kind::OpenRange:
            switch (op) {
                case CompareOp::Eq: return k >= cell.lo;
                case CompareOp::Ne: return k < cell.lo;
                case CompareOp::Lt: return false;  // unbounded above
                case CompareOp::Le: return false;
                case CompareOp::Gt: return cell.lo > k;
                case CompareOp::Ge: return cell.lo >= k;
                default: return false;
            }
        default:
            return false;
    }
}

bool compare_cell(const std::string& raw, const Comparison& cmp, int row, int col,
                  std::vector<std::string>* diagnostics) {
    TypedValue cell = coerce_cell(raw);
    const Literal& lit = cmp.literal;

    if (cmp.op == CompareOp::Contains) {
        std::string hay = lower(trim(raw));
        std::string needle = lit.is_number ? lit.text : lit.text;
        return hay.find(lower(trim(needle))) != std::string::npos;
    }

    // Numeric route when both sides coerce to something numeric.
    TypedValue litv = lit.is_number ? TypedValue::number(lit.number) : coerce_cell(lit.text);
    bool ordering = cmp.op == CompareOp::Lt || cmp.op == CompareOp::Le ||
                    cmp.op == CompareOp::Gt || cmp.op == CompareOp::Ge;

    if (litv.kind == TypedValue::Kind::Number && cell.is_numeric()) {
        return numeric_compare(cell, cmp.op, litv.lo);
    }

    if (cell.kind == TypedValue::Kind::Missing) return false;

    if (ordering) {
        if (litv.kind == TypedValue::Kind::Number || cell.is_numeric()) {
            // Text vs number under an ordering operator: false, noted.
            if (diagnostics) {
                diagnostics->push_back("coercion miss: cell (" + std::to_string(row) + "," +
                                       std::to_string(col) + ") '" + raw +
                                       "' not comparable to '" +
                                       (lit.is_number ? lit.text : lit.text) + "'");
            }
            return false;
        }
        // Both textual: case-insensitive lexicographic.
        std::string a = lower(trim(raw)), b = lower(trim(lit.text));
        switch (cmp.op) {
            case CompareOp::Lt: return a < b;
            case CompareOp::Le: return a <= b;
            case CompareOp::Gt: return a > b;
            case CompareOp::Ge: return a >= b;
            default: return false;
        }
    }

    // Equality between strings: trimmed, case-insensitive.
    bool eq = lower(trim(raw)) == lower(trim(lit.is_number ? lit.text : lit.text));
    return cmp.op == CompareOp::Eq ? eq : !eq;
}

bool eval_row(const FilterExpr& e, const Table& table, int row,
              std::vector<std::string>* diagnostics) {
    if (const auto* cmp = std::get_if<Comparison>(&e)) {
        int col = resolve_column(cmp->column, table);
        return compare_cell(table.cell(row, col), *cmp, row, col, diagnostics);
    }
    if (const auto* a = std::get_if<And>(&e)) {
        return eval_row(*a->left, table, row, diagnostics) &&
               eval_row(*a->right, table, row, diagnostics);
    }
    if (const auto* o = std::get_if<Or>(&e)) {
        return eval_row(*o->left, table, row, diagnostics) ||
               eval_row(*o->right, table, row, diagnostics);
    }
    return !eval_row(*std::get<Not>(e).child, table, row, diagnostics);
}

void check_columns(const FilterExpr& e, const Table& table) {
    if (const auto* cmp = std::get_if<Comparison>(&e)) {
        resolve_column(cmp->column, table);
        return;
    }
    if (const auto* a = std::get_if<And>(&e)) {
        check_columns(*a->left, table);
        check_columns(*a->right, table);
        return;
    }
    if (const auto* o = std::get_if<Or>(&e)) {
        check_columns(*o->left, table);
        check_columns(*o->right, table);
        return;
    }
    check_columns(*std::get<Not>(e).child, table);
}

}  // namespace

std::set<int> evaluate_filter(const FilterExpr& expr, const Table& table,
                              std::vector<std::string>* diagnostics) {
    check_columns(expr, table);
    std::set<int> out;
    for (int r = 0; r < table.n_rows(); ++r) {
        if (eval_row(expr, table, r, diagnostics)) out.insert(r);
    }
    return out;
}

std::set<int> argmax_rows(const Table& table, const std::set<int>& rows,
                          const std::string& column) {
    if (rows.empty()) throw EmptySelectionError("argmax over empty row set");
    int col;
    if (auto c = table.find_column(column)) {
        col = *c;
    } else {
        double idx = 0;
        if (parse_full_number(column, idx) && idx >= 0 && idx == std::floor(idx) &&
            idx < table.n_cols()) {
            col = static_cast<int>(idx);
        } else {
            throw ColumnNotFoundError("column '" + column + "' not found");
        }
    }

    bool have = false;
    double best = 0;
    std::set<int> winners;
    for (int r : rows) {
        if (r < 0 || r >= table.n_rows())
            throw BoundsError("row index " + std::to_string(r) + " out of range");
        TypedValue v = coerce_cell(table.cell(r, col));
        double key;
        switch (v.kind) {
            case TypedValue::Kind::Number: key = v.lo; break;
            case TypedValue::Kind::Range: key = v.hi; break;
            case TypedValue::Kind::OpenRange: key = v.lo; break;
            default: continue;  // Text/Missing excluded
        }
        if (!have || key > best) {
            have = true;
            best = key;
            winners = {r};
        } else if (key == best) {
            winners.insert(r);
        }
    }
    if (!have) {
        throw NoNumericCandidatesError("no numeric candidate cells in column '" + column + "'");
    }
    return winners;
}

}  // namespace tabattr
