#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "tabattr/fairscore.hpp"

using namespace tabattr;
using nlohmann::json;

namespace {

Gateway scripted(ScriptedBackend::Fn fn) {
    return Gateway::live(std::make_shared<ScriptedBackend>(std::move(fn)));
}

Fact answer_fact(std::string text) {
    return Fact{std::move(text), Fact::Origin::Answer, std::nullopt, false};
}

Fact cell_fact(std::string text, bool missing = false) {
    return Fact{std::move(text), Fact::Origin::Cell, CellRef{0, 0}, missing};
}

}  // namespace

TEST_CASE("fairscore formulas") {
    FairScore s = fairscore({3, 1, 4, 4});
    CHECK(s.recall == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(s.precision == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_FALSE(s.recall_vacuous);
    CHECK_FALSE(s.precision_vacuous);

    FairScore perfect = fairscore({2, 0, 5, 0});
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.precision == 1.0);

    FairScore worst = fairscore({0, 2, 0, 5});
    CHECK(worst.recall == 0.0);
    CHECK(worst.precision == 0.0);
}

TEST_CASE("vacuous sides score 1 and are flagged") {
    FairScore no_answer = fairscore({0, 0, 1, 1});
    CHECK(no_answer.recall == 1.0);
    CHECK(no_answer.recall_vacuous);
    CHECK_FALSE(no_answer.precision_vacuous);

    FairScore no_cells = fairscore({1, 1, 0, 0});
    CHECK(no_cells.precision == 1.0);
    CHECK(no_cells.precision_vacuous);
    CHECK_FALSE(no_cells.recall_vacuous);

    FairScore both = fairscore({0, 0, 0, 0});
    CHECK(both.precision == 1.0);
    CHECK(both.recall == 1.0);
    CHECK(both.precision_vacuous);
    CHECK(both.recall_vacuous);
}

TEST_CASE("template facts from the energy table") {
    auto facts = cells_to_facts_template(fixtures::energy_table(), {{1, 0}, {1, 2}});
    REQUIRE(facts.size() == 2);
    CHECK(facts[0].text == "Wind Power is the Source.");
    CHECK(facts[1].text == "Wind Power's Efficiency is 30–45.");
    CHECK(facts[0].origin == Fact::Origin::Cell);
    REQUIRE(facts[0].source.has_value());
    CHECK(*facts[0].source == CellRef{1, 0});
    CHECK_FALSE(facts[0].missing);

    CHECK_THROWS_AS(cells_to_facts_template(fixtures::energy_table(), {{9, 9}}), BoundsError);
}

TEST_CASE("empty cells become missing-flagged facts excluded from alignment") {
    Table t({"A", "B"}, {{"x", ""}, {"y", "  "}});
    auto facts = cells_to_facts_template(t, {{0, 1}, {1, 1}, {0, 0}});
    int missing = 0;
    for (const auto& f : facts) missing += f.missing;
    CHECK(missing == 2);

    // missing facts contribute to neither c nor d
    auto counts = align_facts(facts, {answer_fact("x is the A.")}, equality_judge());
    CHECK(counts.a == 1);
    CHECK(counts.b == 0);
    CHECK(counts.c == 1);
    CHECK(counts.d == 0);
}

TEST_CASE("align_facts computes the (a, b, c, d) quadruple") {
    std::vector<Fact> cells = {cell_fact("Wind Power's Cost is 20–40."),
                               cell_fact("Wind Power's Efficiency is 30–45."),
                               cell_fact("Hydropower's Cost is 40–70.")};
    std::vector<Fact> answers = {answer_fact("30–45"), answer_fact("nuclear fusion")};

    auto counts = align_facts(cells, answers, contains_judge());
    CHECK(counts.a == 1);  // "30–45" found in the efficiency fact
    CHECK(counts.b == 1);
    CHECK(counts.c == 1);
    CHECK(counts.d == 2);

    FairScore s = fairscore(counts);
    CHECK(s.recall == doctest::Approx(0.5));
    CHECK(s.precision == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("contains judge is case-insensitive; equality judge is exact") {
    Fact c = cell_fact("Wind Power's Efficiency is 30–45.");
    CHECK(contains_judge()(c, answer_fact("wind power")));
    CHECK(contains_judge()(c, answer_fact("  WIND POWER  ")));
    CHECK_FALSE(contains_judge()(c, answer_fact("solar")));
    CHECK(equality_judge()(c, answer_fact("Wind Power's Efficiency is 30–45.")));
    CHECK_FALSE(equality_judge()(c, answer_fact("wind power's efficiency is 30–45.")));
}

TEST_CASE("a throwing judge counts as non-supporting") {
    SupportJudge boom = [](const Fact&, const Fact&) -> bool {
        throw AgentOutputError("judge exploded");
    };
    auto counts = align_facts({cell_fact("x")}, {answer_fact("x")}, boom);
    CHECK(counts.a == 0);
    CHECK(counts.b == 1);
    CHECK(counts.c == 0);
    CHECK(counts.d == 1);
}

TEST_CASE("answer decomposition via a scripted model, with whole-answer fallback") {
    Gateway gw = scripted([](const ChatRequest&) {
        return R"({"facts": ["Wind Power is the most efficient.", "Its efficiency is 30-45%.", ""]})";
    });
    auto facts = answer_to_facts("Wind Power, 30-45% efficiency.", gw, AgentConfig{});
    REQUIRE(facts.size() == 2);  // the empty string is skipped
    CHECK(facts[0].origin == Fact::Origin::Answer);

    Gateway empty = scripted([](const ChatRequest&) { return R"({"facts": []})"; });
    std::vector<std::string> diags;
    auto fallback = answer_to_facts("whole answer", empty, AgentConfig{}, &diags);
    REQUIRE(fallback.size() == 1);
    CHECK(fallback[0].text == "whole answer");
    CHECK_FALSE(diags.empty());

    CHECK_THROWS_AS(answer_to_facts("   ", gw, AgentConfig{}), AgentOutputError);
}

TEST_CASE("llm cell facts keep one fact per cell, templating the gaps") {
    Gateway gw = scripted([](const ChatRequest&) {
        return R"({"facts": ["Wind costs 20 to 40 per MWh."]})";
    });
    std::vector<std::string> diags;
    auto facts = cells_to_facts(fixtures::energy_table(), {{1, 1}, {1, 2}}, gw, AgentConfig{},
                                &diags);
    REQUIRE(facts.size() == 2);
    CHECK(facts[0].text == "Wind costs 20 to 40 per MWh.");
    CHECK(facts[1].text == "Wind Power's Efficiency is 30–45.");  // template gap-fill
    CHECK_FALSE(diags.empty());
}

TEST_CASE("llm alignment batches pairs sixteen at a time") {
    // 5 cell facts x 4 answer facts = 20 pairs -> 2 batches
    std::vector<Fact> cells, answers;
    for (int i = 0; i < 5; ++i) cells.push_back(cell_fact("cell " + std::to_string(i)));
    for (int i = 0; i < 4; ++i) answers.push_back(answer_fact("ans " + std::to_string(i)));

    std::vector<std::size_t> batch_sizes;
    Gateway gw = scripted([&batch_sizes](const ChatRequest& req) {
        std::size_t n = 0;
        for (std::size_t pos = 0; (pos = req.user_prompt.find("evidence:", pos)) !=
                                  std::string::npos;
             ++pos) {
            ++n;
        }
        batch_sizes.push_back(n);
        json verdicts = json::array();
        for (std::size_t i = 0; i < n; ++i) verdicts.push_back(i == 0);
        return json{{"support", verdicts}}.dump();
    });
    auto counts = align_facts_llm(cells, answers, gw, AgentConfig{});
    REQUIRE(batch_sizes.size() == 2);
    CHECK(batch_sizes[0] == 16);
    CHECK(batch_sizes[1] == 4);
    // first pair of each batch is supported: (cell0, ans0) and (cell4, ans0)
    CHECK(counts.a == 1);
    CHECK(counts.b == 3);
    CHECK(counts.c == 2);
    CHECK(counts.d == 3);
}

TEST_CASE("llm alignment survives a failed batch") {
    int batch = 0;
    Gateway gw = scripted([&batch](const ChatRequest&) -> std::string {
        if (++batch <= 2) return "not json";  // first batch + its repair re-prompt
        json verdicts = json::array();
        for (int i = 0; i < 4; ++i) verdicts.push_back(true);
        return json{{"support", verdicts}}.dump();
    });
    std::vector<Fact> cells, answers;
    for (int i = 0; i < 5; ++i) cells.push_back(cell_fact("cell " + std::to_string(i)));
    for (int i = 0; i < 4; ++i) answers.push_back(answer_fact("ans " + std::to_string(i)));
    std::vector<std::string> diags;
    auto counts = align_facts_llm(cells, answers, gw, AgentConfig{}, &diags);
    // batch 1 (16 pairs over cells 0-3) failed; batch 2 covers cell 4 x all answers
    CHECK(counts.a == 4);
    CHECK(counts.c == 1);
    CHECK(counts.d == 4);
    bool noted = false;
    for (const auto& d : diags) {
        if (d.find("batch failed") != std::string::npos) noted = true;
    }
    CHECK(noted);
}

TEST_CASE("end-to-end offline fairscore on the energy example") {
    // predicted cells = gold cells; template facts + contains judge
    QAInstance inst = fixtures::energy_instance();
    auto cell_facts = cells_to_facts_template(inst.table, inst.gold_cells());
    std::vector<Fact> answer_facts = {answer_fact("Wind Power"), answer_fact("30–45")};
    auto counts = align_facts(cell_facts, answer_facts, contains_judge());
    CHECK(counts.a == 2);  // both answer facts appear in some cell fact
    CHECK(counts.b == 0);
    FairScore s = fairscore(counts);
    CHECK(s.recall == 1.0);
    CHECK(s.precision > 0.0);
    CHECK(s.precision <= 1.0);
}
