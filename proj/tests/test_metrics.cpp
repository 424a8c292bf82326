#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "tabattr/metrics.hpp"

using namespace tabattr;

TEST_CASE("cell precision and recall on the filmography example") {
    PRScore s = cell_prf(fixtures::film_noisy_pred(), fixtures::film_gold());
    CHECK(s.intersection == 5);
    CHECK(s.precision == doctest::Approx(5.0 / 9.0).epsilon(1e-12));
    CHECK(s.recall == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cell_prf identity and disjoint cases") {
    AttributionSet a = {{0, 0}, {1, 1}};
    PRScore same = cell_prf(a, a);
    CHECK(same.precision == 1.0);
    CHECK(same.recall == 1.0);

    AttributionSet b = {{2, 2}};
    PRScore disjoint = cell_prf(a, b);
    CHECK(disjoint.precision == 0.0);
    CHECK(disjoint.recall == 0.0);
}

TEST_CASE("row projection") {
    AttributionSet pred = {{1, 0}, {1, 2}};
    AttributionSet gold = {{1, 1}};
    PRScore s = row_prf(pred, gold);
    CHECK(s.precision == 1.0);
    CHECK(s.recall == 1.0);

    PRScore film = row_prf(fixtures::film_noisy_pred(), fixtures::film_gold());
    CHECK(film.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(film.recall == 1.0);
}

TEST_CASE("column projection") {
    PRScore film = col_prf(fixtures::film_noisy_pred(), fixtures::film_gold());
    CHECK(film.precision == doctest::Approx(3.0 / 4.0).epsilon(1e-12));
    CHECK(film.recall == 1.0);

    // pred columns a strict subset of gold columns
    AttributionSet pred = {{0, 1}};
    AttributionSet gold = {{0, 1}, {0, 2}};
    PRScore s = col_prf(pred, gold);
    CHECK(s.precision == 1.0);
    CHECK(s.recall == 0.5);
}

TEST_CASE("edge-case conventions") {
    AttributionSet empty;
    AttributionSet some = {{0, 0}};
    PRScore both = cell_prf(empty, empty);
    CHECK(both.precision == 1.0);
    CHECK(both.recall == 1.0);
    PRScore no_pred = cell_prf(empty, some);
    CHECK(no_pred.precision == 0.0);
    CHECK(no_pred.recall == 0.0);
    PRScore no_gold = cell_prf(some, empty);
    CHECK(no_gold.precision == 0.0);
    CHECK(no_gold.recall == 1.0);
}

TEST_CASE("aggregate is the unweighted mean") {
    PRScore one{1, 1, 1, 1, 1};
    PRScore zero{0, 0, 1, 1, 0};
    AggregateScore agg = aggregate({one, zero});
    CHECK(agg.precision == 0.5);
    CHECK(agg.recall == 0.5);
    CHECK(agg.n == 2);

    AggregateScore single = aggregate({one});
    CHECK(single.precision == 1.0);
    CHECK(single.recall == 1.0);

    CHECK_THROWS_AS(aggregate({}), Error);
}

TEST_CASE("aggregate matches a brute-force mean on random score lists") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<PRScore> scores;
        std::size_t n = 1 + rng() % 20;
        double sum_p = 0, sum_r = 0;
        for (std::size_t i = 0; i < n; ++i) {
            PRScore s;
            s.precision = unit(rng);
            s.recall = unit(rng);
            sum_p += s.precision;
            sum_r += s.recall;
            scores.push_back(s);
        }
        AggregateScore agg = aggregate(scores);
        CHECK(std::abs(agg.precision - sum_p / static_cast<double>(n)) < 1e-12);
        CHECK(std::abs(agg.recall - sum_r / static_cast<double>(n)) < 1e-12);
    }
}

namespace {

AttributionSet random_set(std::mt19937& rng, int n_rows, int n_cols) {
    AttributionSet out;
    std::size_t count = rng() % 8;
    for (std::size_t i = 0; i < count; ++i) {
        out.insert({static_cast<int>(rng() % static_cast<unsigned>(n_rows)),
                    static_cast<int>(rng() % static_cast<unsigned>(n_cols))});
    }
    return out;
}

}  // namespace

TEST_CASE("monotonicity: gold cells help, non-gold cells hurt") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 500; ++trial) {
        AttributionSet pred = random_set(rng, 5, 5);
        AttributionSet gold = random_set(rng, 5, 5);
        if (gold.empty()) continue;
        PRScore base = cell_prf(pred, gold);

        // add a gold cell not yet predicted
        for (const auto& g : gold) {
            if (!pred.count(g)) {
                AttributionSet grown = pred;
                grown.insert(g);
                PRScore s = cell_prf(grown, gold);
                CHECK(s.precision >= base.precision - 1e-15);
                CHECK(s.recall >= base.recall - 1e-15);
                break;
            }
        }
        // add a non-gold cell
        CellRef outside{7, 7};
        if (!gold.count(outside)) {
            AttributionSet grown = pred;
            grown.insert(outside);
            PRScore s = cell_prf(grown, gold);
            CHECK(s.precision <= base.precision + 1e-15);
            CHECK(s.recall <= base.recall + 1e-15);
        }
    }
}

TEST_CASE("singleton pred and gold: projected scores dominate cell scores") {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        AttributionSet pred = {{static_cast<int>(rng() % 4), static_cast<int>(rng() % 4)}};
        AttributionSet gold = {{static_cast<int>(rng() % 4), static_cast<int>(rng() % 4)}};
        PRScore cell = cell_prf(pred, gold);
        PRScore row = row_prf(pred, gold);
        PRScore col = col_prf(pred, gold);
        CHECK(row.precision >= cell.precision);
        CHECK(row.recall >= cell.recall);
        CHECK(col.precision >= cell.precision);
        CHECK(col.recall >= cell.recall);
    }
}

TEST_CASE("all scores stay in [0,1] against a brute-force oracle") {
    std::mt19937 rng(59);
    for (int trial = 0; trial < 2000; ++trial) {
        int n_rows = 1 + static_cast<int>(rng() % 8);
        int n_cols = 1 + static_cast<int>(rng() % 8);
        AttributionSet pred = random_set(rng, n_rows, n_cols);
        AttributionSet gold = random_set(rng, n_rows, n_cols);

        std::size_t inter = 0;
        for (const auto& p : pred) inter += gold.count(p);
        PRScore s = cell_prf(pred, gold);
        CHECK(s.intersection == inter);
        CHECK(s.precision >= 0.0);
        CHECK(s.precision <= 1.0);
        CHECK(s.recall >= 0.0);
        CHECK(s.recall <= 1.0);
        if (!pred.empty() && !gold.empty()) {
            CHECK(s.precision ==
                  doctest::Approx(static_cast<double>(inter) / pred.size()).epsilon(1e-12));
            CHECK(s.recall ==
                  doctest::Approx(static_cast<double>(inter) / gold.size()).epsilon(1e-12));
        }
    }
}
