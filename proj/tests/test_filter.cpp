#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "tabattr/filter.hpp"

using namespace tabattr;

TEST_CASE("parse_filter handles the basic comparison") {
    FilterExpr e = parse_filter("WHERE Event_Name = 'Aerospace'");
    auto& cmp = std::get<Comparison>(e);
    CHECK(std::get<std::string>(cmp.column.ref) == "Event_Name");
    CHECK(cmp.op == CompareOp::Eq);
    CHECK(cmp.literal.text == "Aerospace");
    CHECK_FALSE(cmp.literal.is_number);
}

TEST_CASE("parse_filter builds AND of comparisons") {
    FilterExpr e = parse_filter("Cost <= 50 AND Scalability >= 3");
    auto& a = std::get<And>(e);
    auto& l = std::get<Comparison>(*a.left);
    auto& r = std::get<Comparison>(*a.right);
    CHECK(std::get<std::string>(l.column.ref) == "Cost");
    CHECK(l.op == CompareOp::Le);
    CHECK(l.literal.number == 50);
    CHECK(r.op == CompareOp::Ge);
    CHECK(r.literal.number == 3);
}

TEST_CASE("precedence: NOT binds tighter than AND binds tighter than OR") {
    FilterExpr e = parse_filter("NOT a = 1 OR b = 2");
    auto& o = std::get<Or>(e);
    CHECK(std::holds_alternative<Not>(*o.left));
    CHECK(std::holds_alternative<Comparison>(*o.right));

    FilterExpr f = parse_filter("a = 1 OR b = 2 AND c = 3");
    auto& of = std::get<Or>(f);
    CHECK(std::holds_alternative<Comparison>(*of.left));
    CHECK(std::holds_alternative<And>(*of.right));

    FilterExpr g = parse_filter("(a = 1 OR b = 2) AND c = 3");
    CHECK(std::holds_alternative<And>(g));
}

TEST_CASE("parse_filter reports position on syntax errors") {
    CHECK_THROWS_AS(parse_filter(""), ParseError);
    CHECK_THROWS_AS(parse_filter("a ="), ParseError);
    CHECK_THROWS_AS(parse_filter("a = 1 AND"), ParseError);
    CHECK_THROWS_AS(parse_filter("= 5"), ParseError);
    CHECK_THROWS_AS(parse_filter("a = 1 extra"), ParseError);
    try {
        parse_filter("a = 'unterminated");
        CHECK(false);
    } catch (const ParseError& e) {
        CHECK(e.position() == 4);
    }
}

TEST_CASE("coerce_cell recognizes the messy formats") {
    auto range = coerce_cell("$30–50");
    CHECK(range.kind == TypedValue::Kind::Range);
    CHECK(range.lo == 30);
    CHECK(range.hi == 50);

    auto open = coerce_cell("90+");
    CHECK(open.kind == TypedValue::Kind::OpenRange);
    CHECK(open.lo == 90);

    auto n = coerce_cell("5");
    CHECK(n.kind == TypedValue::Kind::Number);
    CHECK(n.lo == 5);

    CHECK(coerce_cell("").kind == TypedValue::Kind::Missing);
    CHECK(coerce_cell("--").kind == TypedValue::Kind::Missing);
    CHECK(coerce_cell("N/A").kind == TypedValue::Kind::Missing);

    CHECK(coerce_cell("1,234.5").lo == 1234.5);
    CHECK(coerce_cell("45%").lo == 45);
    CHECK(coerce_cell("-5").kind == TypedValue::Kind::Number);
    CHECK(coerce_cell("-5").lo == -5);
    CHECK(coerce_cell("15-20").kind == TypedValue::Kind::Range);
    CHECK(coerce_cell("15--20").kind == TypedValue::Kind::Range);
    CHECK(coerce_cell("15—20").kind == TypedValue::Kind::Range);
    CHECK(coerce_cell("Wind Power").kind == TypedValue::Kind::Text);
    CHECK(coerce_cell("Wind Power").text == "Wind Power");
}

TEST_CASE("coerce_cell is idempotent under re-stringification of numbers") {
    for (const char* s : {"5", "3.25", "-17", "1,200", "42%"}) {
        TypedValue v = coerce_cell(s);
        REQUIRE(v.kind == TypedValue::Kind::Number);
        TypedValue again = coerce_cell(std::to_string(v.lo));
        CHECK(again.kind == TypedValue::Kind::Number);
        CHECK(again.lo == v.lo);
    }
}

TEST_CASE("range upper-bound semantics on the energy table") {
    Table t = fixtures::energy_table();
    // Hydropower's 40-70 must fail <= 50 while Solar's 30-50 passes.
    CHECK(evaluate_filter(parse_filter("Cost <= 50"), t) == std::set<int>{0, 1});
    CHECK(evaluate_filter(parse_filter("Cost <= 50 AND Scalability >= 3"), t) ==
          std::set<int>{0, 1});
    CHECK(evaluate_filter(parse_filter("Scalability >= 0"), t) == std::set<int>{0, 1, 2, 3});
    // Equality against a range: true iff value inside it.
    CHECK(evaluate_filter(parse_filter("Efficiency = 40"), t) == std::set<int>{1});
}

TEST_CASE("string comparisons are trimmed and case-insensitive") {
    Table t = fixtures::film_table();
    CHECK(evaluate_filter(parse_filter("Language = 'telugu'"), t) == std::set<int>{2, 5});
    CHECK(evaluate_filter(parse_filter("Film CONTAINS 'love'"), t) == std::set<int>{2});
    // row 0's Role is "--" (missing); missing cells fail every comparison
    CHECK(evaluate_filter(parse_filter("Role != 'Cathy'"), t) == std::set<int>{3, 4, 5});
    CHECK(evaluate_filter(parse_filter("NOT Role = 'Cathy'"), t) == std::set<int>{0, 3, 4, 5});
}

TEST_CASE("column resolution failures list available headers") {
    Table t = fixtures::energy_table();
    try {
        evaluate_filter(parse_filter("Duration > 3"), t);
        CHECK(false);
    } catch (const ColumnNotFoundError& e) {
        CHECK(std::string(e.what()).find("Cost") != std::string::npos);
    }
    CHECK_THROWS_AS(evaluate_filter(parse_filter("9 > 3"), t), ColumnNotFoundError);
}

TEST_CASE("ordering against text cells is false and logged as a coercion miss") {
    Table t = fixtures::energy_table();
    std::vector<std::string> diags;
    CHECK(evaluate_filter(parse_filter("Source > 10"), t, &diags).empty());
    CHECK(diags.size() == 4);
    CHECK(diags[0].find("coercion miss") != std::string::npos);
}

TEST_CASE("argmax_rows picks the strongest survivor") {
    Table t = fixtures::energy_table();
    CHECK(argmax_rows(t, {0, 1}, "Efficiency") == std::set<int>{1});
    CHECK(argmax_rows(t, {2}, "Cost") == std::set<int>{2});

    Table ties({"a", "v"}, {{"x", "7"}, {"y", "7"}, {"z", "3"}});
    CHECK(argmax_rows(ties, {0, 1, 2}, "v") == std::set<int>{0, 1});

    Table textonly({"a"}, {{"x"}, {"y"}});
    CHECK_THROWS_AS(argmax_rows(textonly, {0, 1}, "a"), NoNumericCandidatesError);
}

TEST_CASE("canonical printer round-trips") {
    for (const char* text :
         {"WHERE Event_Name = 'Aerospace'", "Cost <= 50 AND Scalability >= 3",
          "NOT a = 1 OR b = 2", "a = 1 AND (b = 2 OR c = 3)", "\"weird col\" CONTAINS 'x y'",
          "2 != 'some text'", "NOT (a = 1 AND b = 2)"}) {
        FilterExpr e = parse_filter(text);
        std::string printed = print_filter(e);
        CHECK(parse_filter(printed) == e);
        CHECK(print_filter(parse_filter(printed)) == printed);
    }
    CHECK(print_filter(parse_filter("where cost <= 50 and b = 'x'")) ==
          "cost <= 50 AND b = 'x'");
}

namespace {

// Random AST generator for the boolean-algebra property test.
FilterExpr random_expr(std::mt19937& rng, int depth) {
    auto pick = rng() % (depth > 2 ? 1 : 4);
    if (pick == 0 || depth > 2) {
        Comparison cmp;
        cmp.column.ref = static_cast<int>(rng() % 3);
        cmp.op = static_cast<CompareOp>(rng() % 7);
        if (rng() % 2) {
            double v = static_cast<double>(rng() % 10);
            cmp.literal = Literal{true, v, std::to_string(static_cast<int>(v))};
        } else {
            cmp.literal = Literal{false, 0, std::string(1, static_cast<char>('a' + rng() % 5))};
        }
        return cmp;
    }
    if (pick == 1) {
        return And{std::make_shared<FilterExpr>(random_expr(rng, depth + 1)),
                   std::make_shared<FilterExpr>(random_expr(rng, depth + 1))};
    }
    if (pick == 2) {
        return Or{std::make_shared<FilterExpr>(random_expr(rng, depth + 1)),
                  std::make_shared<FilterExpr>(random_expr(rng, depth + 1))};
    }
    return Not{std::make_shared<FilterExpr>(random_expr(rng, depth + 1))};
}

Table random_table(std::mt19937& rng) {
    int n_rows = 1 + static_cast<int>(rng() % 6);
    std::vector<std::vector<std::string>> cells;
    for (int r = 0; r < n_rows; ++r) {
        std::vector<std::string> row;
        for (int c = 0; c < 3; ++c) {
            switch (rng() % 4) {
                case 0: row.push_back(std::to_string(rng() % 10)); break;
                case 1: row.push_back(std::string(1, static_cast<char>('a' + rng() % 5))); break;
                case 2:
                    row.push_back(std::to_string(rng() % 5) + "–" +
                                  std::to_string(5 + rng() % 5));
                    break;
                default: row.push_back(""); break;
            }
        }
        cells.push_back(row);
    }
    return Table({"c0", "c1", "c2"}, cells);
}

}  // namespace

TEST_CASE("boolean structure maps to set algebra") {
    std::mt19937 rng(42);
    for (int trial = 0; trial < 300; ++trial) {
        Table t = random_table(rng);
        FilterExpr p = random_expr(rng, 0);
        FilterExpr q = random_expr(rng, 0);

        auto ps = evaluate_filter(p, t);
        auto qs = evaluate_filter(q, t);

        auto and_expr = And{std::make_shared<FilterExpr>(p), std::make_shared<FilterExpr>(q)};
        std::set<int> expect_and;
        for (int r : ps) {
            if (qs.count(r)) expect_and.insert(r);
        }
        CHECK(evaluate_filter(FilterExpr(and_expr), t) == expect_and);

        auto or_expr = Or{std::make_shared<FilterExpr>(p), std::make_shared<FilterExpr>(q)};
        std::set<int> expect_or = ps;
        expect_or.insert(qs.begin(), qs.end());
        CHECK(evaluate_filter(FilterExpr(or_expr), t) == expect_or);

        auto not_expr = Not{std::make_shared<FilterExpr>(p)};
        std::set<int> expect_not;
        for (int r = 0; r < t.n_rows(); ++r) {
            if (!ps.count(r)) expect_not.insert(r);
        }
        CHECK(evaluate_filter(FilterExpr(not_expr), t) == expect_not);

        // result always within row range
        for (int r : ps) {
            CHECK(r >= 0);
            CHECK(r < t.n_rows());
        }

        // printer round-trip on random ASTs
        CHECK(parse_filter(print_filter(p)) == p);
    }
}
