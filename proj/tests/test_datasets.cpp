#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "tabattr/datasets.hpp"

using namespace tabattr;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("tabattr_ds_" + std::to_string(std::rand()) + std::to_string(std::rand()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }

    fs::path write(const std::string& name, const std::string& content) const {
        fs::path p = path / name;
        std::ofstream out(p);
        out << content;
        return p;
    }
};

}  // namespace

TEST_CASE("instance serialization round-trips and is byte-stable") {
    QAInstance inst = fixtures::energy_instance();
    std::string once = serialize_instance(inst);
    QAInstance back = instance_from_json(json::parse(once));
    CHECK(serialize_instance(back) == once);

    CHECK(back.id == inst.id);
    CHECK(back.question == inst.question);
    CHECK(back.answer == inst.answer);
    CHECK(back.table.headers() == inst.table.headers());
    CHECK(back.table.rows() == inst.table.rows());
    CHECK(back.gold_cells() == inst.gold_cells());
    REQUIRE(back.gold.size() == 3);
    CHECK(back.gold[0].phrase.has_value());
    CHECK(back.gold[0].phrase->text == "Wind Power");
    CHECK_FALSE(back.gold[2].phrase.has_value());  // implicit evidence keeps phrase null
}

TEST_CASE("validation pinpoints the failing field") {
    json good = instance_to_json(fixtures::energy_instance());

    auto expect_failure = [&](json j, const std::string& field_part) {
        try {
            instance_from_json(j);
            FAIL("expected ValidationError for ", field_part);
        } catch (const ValidationError& e) {
            CHECK(std::string(e.field()).find(field_part) != std::string::npos);
        }
    };

    json j = good;
    j.erase("question");
    expect_failure(j, "question");

    j = good;
    j["table"]["rows"][1] = json::array({"only", "three", "cells"});
    expect_failure(j, "table.rows");

    j = good;
    j["gold"][0]["cells"] = json::array({json::array({99, 0})});
    expect_failure(j, "cells");

    j = good;
    j["gold"][0]["phrase"]["text"] = "Not the substring";
    expect_failure(j, "phrase");

    j = good;
    j["gold"][0]["phrase"]["end"] = 100000;
    expect_failure(j, "phrase");

    j = good;
    j["split"] = "bronze";
    expect_failure(j, "split");

    j = good;
    j["split"] = "gold";
    j["gold"] = json::array();
    expect_failure(j, "gold");

    j = good;
    j.erase("id");
    expect_failure(j, "id");
}

TEST_CASE("load_dataset itemizes bad lines and keeps good ones") {
    TempDir tmp;
    QAInstance inst = fixtures::energy_instance();
    json bad = instance_to_json(inst);
    bad["table"]["rows"][0] = json::array({"ragged"});

    std::string content = serialize_instance(inst) + "\n" + "this is not json\n" +
                          bad.dump() + "\n\n" + serialize_instance(inst) + "\n";
    fs::path p = tmp.write("mixed.jsonl", content);

    LoadResult res = load_dataset(p.string(), SplitFilter::All);
    CHECK(res.instances.size() == 2);
    REQUIRE(res.errors.size() == 2);
    CHECK_FALSE(res.complete());
    CHECK(res.errors[0].line == 2);
    CHECK(res.errors[0].field == "json");
    CHECK(res.errors[1].line == 3);
    CHECK(res.errors[1].instance_id == inst.id);

    CHECK_THROWS_AS(load_dataset((tmp.path / "missing.jsonl").string(), SplitFilter::All),
                    UsageError);
}

TEST_CASE("split filtering") {
    TempDir tmp;
    QAInstance gold = fixtures::energy_instance();
    QAInstance silver = fixtures::energy_instance();
    silver.id = "energy-0002";
    silver.split = Split::Silver;
    silver.gold.clear();
    save_dataset((tmp.path / "d.jsonl").string(), {gold, silver});

    CHECK(load_dataset((tmp.path / "d.jsonl").string(), SplitFilter::All).instances.size() == 2);
    auto g = load_dataset((tmp.path / "d.jsonl").string(), SplitFilter::Gold);
    REQUIRE(g.instances.size() == 1);
    CHECK(g.instances[0].split == Split::Gold);
    auto s = load_dataset((tmp.path / "d.jsonl").string(), SplitFilter::Silver);
    REQUIRE(s.instances.size() == 1);
    CHECK(s.instances[0].id == "energy-0002");

    CHECK(split_filter_from_string("gold") == SplitFilter::Gold);
    CHECK(split_filter_from_string("all") == SplitFilter::All);
    CHECK_THROWS_AS(split_filter_from_string("bronze"), UsageError);
}

TEST_CASE("stats aggregates per dataset") {
    QAInstance a = fixtures::energy_instance();
    QAInstance b = fixtures::energy_instance();
    b.id = "energy-0002";
    b.split = Split::Silver;
    QAInstance c{"film-0001", Dataset::FetaQA, fixtures::film_table(), "q", "answer",
                 {GoldGroup{std::nullopt, fixtures::film_gold()}}, Split::Gold};

    auto all = stats({a, b, c});
    REQUIRE(all.size() == 2);  // FetaQA sorts before Other
    CHECK(all[0].name == "FetaQA");
    CHECK(all[0].total == 1);
    CHECK(all[0].gold == 1);
    CHECK(all[0].rows.min == 6);
    CHECK(all[0].rows.max == 6);
    CHECK(all[1].name == "Other");
    CHECK(all[1].total == 2);
    CHECK(all[1].gold == 1);
    CHECK(all[1].silver == 1);
    CHECK(all[1].cols.mean == doctest::Approx(4.0));
    CHECK(all[1].answer_length.min == static_cast<int>(a.answer.size()));

    CHECK_THROWS_AS(stats({}), Error);
}

TEST_CASE("manifest parsing") {
    TempDir tmp;
    fs::path p = tmp.write("manifest.json", R"([
        {"name": "ToTTo", "path": "totto.jsonl", "gold_count": 500, "silver_count": 7200},
        {"name": "AITQA", "path": "aitqa.jsonl", "gold_count": 513, "silver_count": 0,
         "note": "all instances carry gold labels"}
    ])");
    auto entries = load_manifest(p.string());
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].name == "ToTTo");
    CHECK(entries[0].gold_count == 500);
    CHECK(entries[0].silver_count == 7200);
    CHECK(entries[1].note == "all instances carry gold labels");

    tmp.write("bad.json", R"({"not": "an array"})");
    CHECK_THROWS_AS(load_manifest((tmp.path / "bad.json").string()), UsageError);
}

TEST_CASE("totto import expands spans and stacks header rows") {
    TempDir tmp;
    json cell = json::object();
    json rec = {
        {"example_id", 4242},
        {"table_page_title", "Some Page"},
        {"question", ""},
        {"sentence_annotations", json::array({{{"final_sentence", "A fine sentence."}}})},
        {"highlighted_cells", json::array({{2, 0}, {2, 1}})},
        {"table",
         json::array({
             // two header rows; first has a column span of 2
             json::array({{{"value", "Group"}, {"is_header", true}, {"column_span", 2}},
                          {{"value", "Total"}, {"is_header", true}, {"row_span", 2}}}),
             json::array({{{"value", "Name"}, {"is_header", true}},
                          {{"value", "Score"}, {"is_header", true}}}),
             json::array({{{"value", "alpha"}}, {{"value", "1"}}, {{"value", "10"}}}),
             json::array({{{"value", "beta"}}, {{"value", "2"}}, {{"value", "20"}}}),
         })},
    };
    fs::path p = tmp.write("totto.jsonl", rec.dump() + "\n");

    auto insts = import_totto(p.string(), Split::Gold);
    REQUIRE(insts.size() == 1);
    const QAInstance& inst = insts[0];
    CHECK(inst.id == "4242");
    CHECK(inst.dataset == Dataset::ToTTo);
    CHECK(inst.answer == "A fine sentence.");
    CHECK(inst.table.metadata().at("title") == "Some Page");
    REQUIRE(inst.table.n_cols() == 3);
    CHECK(inst.table.headers()[0] == "Group | Name");
    CHECK(inst.table.headers()[1] == "Group | Score");
    CHECK(inst.table.headers()[2] == "Total");
    REQUIRE(inst.table.n_rows() == 2);
    CHECK(inst.table.cell(0, 0) == "alpha");
    CHECK(inst.table.cell(1, 2) == "20");
    // native row 2 is data row 0 after removing the two header rows
    CHECK(inst.gold_cells() == AttributionSet{{0, 0}, {0, 1}});

    // the import must satisfy the canonical validator
    QAInstance back = instance_from_json(json::parse(serialize_instance(inst)));
    CHECK(back.gold_cells() == inst.gold_cells());
}

TEST_CASE("totto import demotes highlight-free instances to silver") {
    TempDir tmp;
    json rec = {
        {"example_id", "x"},
        {"sentence_annotations", json::array({{{"final_sentence", "s"}}})},
        {"highlighted_cells", json::array()},
        {"table",
         json::array({json::array({{{"value", "H"}, {"is_header", true}}}),
                      json::array({{{"value", "v"}}})})},
    };
    fs::path p = tmp.write("t.jsonl", rec.dump() + "\n");
    auto insts = import_totto(p.string(), Split::Gold);
    REQUIRE(insts.size() == 1);
    CHECK(insts[0].split == Split::Silver);
    CHECK(insts[0].gold.empty());
}

TEST_CASE("fetaqa import shifts native highlight rows past the header") {
    TempDir tmp;
    json rec = {
        {"feta_id", 7},
        {"table_page_name", "Films"},
        {"question", "Which film came second?"},
        {"answer", "Love Failure."},
        {"table_array", json::array({
                            json::array({"Year", "Film"}),
                            json::array({"2012", "Kadhalil Sodhapuvadhu Yeppadi"}),
                            json::array({"2012", "Love Failure"}),
                        })},
        {"highlighted_cell_ids", json::array({{2, 1}, {9, 9}})},
    };
    fs::path p = tmp.write("f.jsonl", rec.dump() + "\n");
    auto insts = import_fetaqa(p.string(), Split::Gold);
    REQUIRE(insts.size() == 1);
    CHECK(insts[0].dataset == Dataset::FetaQA);
    CHECK(insts[0].table.n_rows() == 2);
    // native (2,1) = data (1,1); the out-of-bounds highlight is dropped
    CHECK(insts[0].gold_cells() == AttributionSet{{1, 1}});
    CHECK(insts[0].table.cell(1, 1) == "Love Failure");
}

TEST_CASE("aitqa import flattens stacked column headers") {
    TempDir tmp;
    json rec = {
        {"id", "a-1"},
        {"question", "q"},
        {"answer", "42"},
        {"table",
         {{"column_header", json::array({json::array({"Fleet", "Fleet"}),
                                         json::array({"Owned", "Leased"})})},
          {"data", json::array({json::array({"10", "32"})})}}},
        {"highlighted_cells", json::array({{0, 1}})},
    };
    fs::path p = tmp.write("a.jsonl", rec.dump() + "\n");
    auto insts = import_aitqa(p.string());
    REQUIRE(insts.size() == 1);
    CHECK(insts[0].dataset == Dataset::AITQA);
    CHECK(insts[0].split == Split::Gold);
    CHECK(insts[0].table.headers()[0] == "Fleet | Owned");
    CHECK(insts[0].table.headers()[1] == "Fleet | Leased");
    CHECK(insts[0].gold_cells() == AttributionSet{{0, 1}});
}

TEST_CASE("dataset names round-trip") {
    for (Dataset d : {Dataset::ToTTo, Dataset::FetaQA, Dataset::AITQA, Dataset::Other}) {
        CHECK(dataset_from_string(to_string(d)) == d);
    }
}
