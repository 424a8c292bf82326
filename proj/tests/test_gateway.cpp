#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "tabattr/gateway.hpp"

using namespace tabattr;
namespace fs = std::filesystem;

namespace {

ChatRequest sample_request() {
    ChatRequest req;
    req.model = "gpt-4o";
    req.system_prompt = "system";
    req.user_prompt = "hello";
    req.temperature = 0.0;
    req.tag = "column_relevance";
    return req;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("tabattr_test_" + std::to_string(std::rand()) + std::to_string(std::rand()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("request_hash is deterministic and sensitive to key fields") {
    ChatRequest req = sample_request();
    std::string h = request_hash(req);
    CHECK(h.size() == 16);
    CHECK(h == request_hash(req));

    // frozen reference: re-derivable by FNV-1a 64 over
    // "gpt-4o\x1fsystem\x1fhello\x1f0\x1fcolumn_relevance"
    std::string payload = std::string("gpt-4o") + '\x1f' + "system" + '\x1f' + "hello" +
                          '\x1f' + "0" + '\x1f' + "column_relevance";
    std::uint64_t expect = 14695981039346656037ull;
    for (unsigned char c : payload) {
        expect ^= c;
        expect *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(expect));
    CHECK(h == buf);

    ChatRequest other = req;
    other.user_prompt = "hello!";
    CHECK(request_hash(other) != h);
    other = req;
    other.tag = "evidence_span";
    CHECK(request_hash(other) != h);
    other = req;
    other.temperature = 0.7;
    CHECK(request_hash(other) != h);

    // max_output_tokens is excluded from the key
    other = req;
    other.max_output_tokens = 1;
    CHECK(request_hash(other) == h);
}

TEST_CASE("extract_json handles fenced and surrounded payloads") {
    CHECK(extract_json(R"({"a": 1})") == nlohmann::json({{"a", 1}}));
    CHECK(extract_json("Sure, here you go:\n```json\n{\"a\": [1, 2]}\n```\nDone.")["a"] ==
          nlohmann::json::array({1, 2}));
    CHECK(extract_json("prefix [1, 2, 3] suffix") == nlohmann::json::array({1, 2, 3}));
    CHECK(extract_json(R"(note {"s": "brace } inside string"} after)")["s"] ==
          "brace } inside string");
    // first candidate malformed, second one parseable
    CHECK(extract_json("{not json} then {\"ok\": true}")["ok"] == true);

    CHECK_THROWS_AS(extract_json("no json here"), ExtractionError);
    CHECK_THROWS_AS(extract_json("{\"unterminated\": "), ExtractionError);
    try {
        extract_json("plain refusal text");
        FAIL("expected ExtractionError");
    } catch (const ExtractionError& e) {
        CHECK(e.raw_text() == "plain refusal text");
    }
}

TEST_CASE("scripted backend through a live gateway, with recording") {
    TempDir tmp;
    fs::path transcript = tmp.path / "t.jsonl";

    auto backend = std::make_shared<ScriptedBackend>(
        [](const ChatRequest& req) { return "echo:" + req.user_prompt; });
    Gateway gw = Gateway::live(backend);
    gw.record_to(transcript.string());

    ChatRequest req = sample_request();
    ChatResponse r = gw.complete(req);
    CHECK(r.text == "echo:hello");
    CHECK_FALSE(r.cached);
    CHECK(gw.requests_served() == 1);

    req.user_prompt = "second";
    gw.complete(req);

    // replay the recorded transcript
    Gateway replay = Gateway::replay(transcript.string());
    CHECK(replay.mode() == GatewayMode::Replay);
    ChatResponse rr = replay.complete(req);
    CHECK(rr.text == "echo:second");
    CHECK(rr.cached);

    req.user_prompt = "never seen";
    CHECK_THROWS_AS(replay.complete(req), ReplayMissError);
}

TEST_CASE("disk cache serves repeats without touching the backend") {
    TempDir tmp;
    int calls = 0;
    auto backend = std::make_shared<ScriptedBackend>([&calls](const ChatRequest& req) {
        ++calls;
        return "call " + std::to_string(calls) + " for " + req.tag;
    });
    Gateway gw = Gateway::live(backend, (tmp.path / "cache").string());
    CHECK(gw.mode() == GatewayMode::Cache);

    ChatRequest req = sample_request();
    ChatResponse first = gw.complete(req);
    CHECK(first.text == "call 1 for column_relevance");
    CHECK_FALSE(first.cached);
    ChatResponse second = gw.complete(req);
    CHECK(second.text == first.text);
    CHECK(second.cached);
    CHECK(calls == 1);

    // a fresh gateway over the same directory still hits the cache
    Gateway gw2 = Gateway::live(backend, (tmp.path / "cache").string());
    ChatResponse third = gw2.complete(req);
    CHECK(third.cached);
    CHECK(calls == 1);

    req.user_prompt = "different";
    gw.complete(req);
    CHECK(calls == 2);
}

TEST_CASE("replay rejects a missing transcript file") {
    CHECK_THROWS_AS(Gateway::replay("/nonexistent/path/t.jsonl"), UsageError);
}

TEST_CASE("transcript lines carry full request context") {
    TempDir tmp;
    fs::path transcript = tmp.path / "t.jsonl";
    auto backend =
        std::make_shared<ScriptedBackend>([](const ChatRequest&) { return "{\"ok\":1}"; });
    Gateway gw = Gateway::live(backend);
    gw.record_to(transcript.string());
    ChatRequest req = sample_request();
    gw.complete(req);

    std::ifstream in(transcript);
    std::string line;
    REQUIRE(std::getline(in, line));
    nlohmann::json rec = nlohmann::json::parse(line);
    CHECK(rec.at("hash") == request_hash(req));
    CHECK(rec.at("tag") == req.tag);
    CHECK(rec.at("model") == req.model);
    CHECK(rec.at("system_prompt") == req.system_prompt);
    CHECK(rec.at("user_prompt") == req.user_prompt);
    CHECK(rec.at("response").at("text") == "{\"ok\":1}");
}
