#include "tabattr/gateway.hpp"

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#ifndef TABATTR_NO_HTTP
#include <httplib.h>
#endif

namespace tabattr {

namespace fs = std::filesystem;
using nlohmann::json;

std::string request_hash(const ChatRequest& req) {
    char temp[32];
    std::snprintf(temp, sizeof(temp), "%.6g", req.temperature);
    std::string payload = req.model;
    payload += '\x1f';
    payload += req.system_prompt;
    payload += '\x1f';
    payload += req.user_prompt;
    payload += '\x1f';
    payload += temp;
    payload += '\x1f';
    payload += req.tag;

    std::uint64_t h = 14695981039346656037ull;  // FNV-1a 64
    for (unsigned char c : payload) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016" PRIx64, h);
    return out;
}

json extract_json(const std::string& text) {
    // Find the first '{' or '[' that starts a balanced JSON value.
    for (std::size_t i = 0; i < text.size(); ++i) {
        char open = text[i];
        if (open != '{' && open != '[') continue;
        char close = open == '{' ? '}' : ']';
        int depth = 0;
        bool in_string = false;
        for (std::size_t j = i; j < text.size(); ++j) {
            char c = text[j];
            if (in_string) {
                if (c == '\\') { ++j; continue; }
                if (c == '"') in_string = false;
                continue;
            }
            if (c == '"') { in_string = true; continue; }
            if (c == open) ++depth;
            else if (c == close) --depth;
            if (depth == 0) {
                auto candidate = text.substr(i, j - i + 1);
                json parsed = json::parse(candidate, nullptr, false);
                if (!parsed.is_discarded()) return parsed;
                break;  // unbalanced braces of the other kind inside; try next start
            }
        }
    }
    throw ExtractionError("no parseable JSON object or array in model output", text);
}

#ifndef TABATTR_NO_HTTP
HttpBackend::HttpBackend(std::string base_url, std::string api_key)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)) {}

ChatResponse HttpBackend::complete(const ChatRequest& req) {
    json body = {
        {"model", req.model},
        {"temperature", req.temperature},
        {"max_tokens", req.max_output_tokens},
        {"messages",
         json::array({{{"role", "system"}, {"content", req.system_prompt}},
                      {{"role", "user"}, {"content", req.user_prompt}}})},
    };
    std::string last_error;
    int backoff_ms = 500;
    for (int attempt = 0; attempt < 5; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            backoff_ms *= 2;
        }
        httplib::Client client(base_url_);
        client.set_read_timeout(120, 0);
        httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};
        auto res = client.Post("/v1/chat/completions", headers, body.dump(),
                               "application/json");
        if (!res) {
            last_error = "connection failure";
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw TransportError("chat endpoint returned HTTP " +
                                 std::to_string(res->status) + ": " + res->body);
        }
        json reply = json::parse(res->body);
        ChatResponse out;
        out.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
        if (reply.contains("usage")) {
            out.usage.prompt_tokens = reply["usage"].value("prompt_tokens", 0L);
            out.usage.completion_tokens = reply["usage"].value("completion_tokens", 0L);
        }
        return out;
    }
    throw TransportError("chat request failed after 5 attempts: " + last_error);
}
#endif

namespace {

json response_to_json(const ChatResponse& r) {
    return {{"text", r.text},
            {"prompt_tokens", r.usage.prompt_tokens},
            {"completion_tokens", r.usage.completion_tokens}};
}

ChatResponse response_from_json(const json& j) {
    ChatResponse r;
    r.text = j.at("text").get<std::string>();
    r.usage.prompt_tokens = j.value("prompt_tokens", 0L);
    r.usage.completion_tokens = j.value("completion_tokens", 0L);
    return r;
}

}  // namespace

Gateway Gateway::replay(const std::string& transcript_path) {
    Gateway g;
    g.mode_ = GatewayMode::Replay;
    std::ifstream in(transcript_path);
    if (!in) throw UsageError("cannot open transcript file: " + transcript_path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json rec = json::parse(line);
        g.transcript_[rec.at("hash").get<std::string>()] =
            response_from_json(rec.at("response"));
    }
    return g;
}

Gateway Gateway::live(std::shared_ptr<Backend> backend, std::string cache_dir) {
    Gateway g;
    g.mode_ = cache_dir.empty() ? GatewayMode::Live : GatewayMode::Cache;
    g.backend_ = std::move(backend);
    g.cache_dir_ = std::move(cache_dir);
    if (!g.cache_dir_.empty()) fs::create_directories(g.cache_dir_);
    return g;
}

void Gateway::record_to(const std::string& transcript_path) {
    std::lock_guard<std::mutex> lock(*mu_);
    record_path_ = transcript_path;
    if (auto parent = fs::path(transcript_path).parent_path(); !parent.empty()) {
        fs::create_directories(parent);
    }
}

ChatResponse Gateway::complete(const ChatRequest& req) {
    const std::string hash = request_hash(req);

    if (mode_ == GatewayMode::Replay) {
        std::lock_guard<std::mutex> lock(*mu_);
        auto it = transcript_.find(hash);
        if (it == transcript_.end()) {
            throw ReplayMissError("no transcript entry for tag '" + req.tag + "', hash " + hash);
        }
        ChatResponse r = it->second;
        r.cached = true;
        ++served_;
        return r;
    }

    if (mode_ == GatewayMode::Cache) {
        fs::path entry = fs::path(cache_dir_) / (hash + ".json");
        {
            std::lock_guard<std::mutex> lock(*mu_);
            if (fs::exists(entry)) {
                std::ifstream in(entry);
                json j = json::parse(in);
                ChatResponse r = response_from_json(j.at("response"));
                r.cached = true;
                ++served_;
                return r;
            }
        }
        ChatResponse r = backend_->complete(req);
        json rec = {{"hash", hash},
                    {"tag", req.tag},
                    {"model", req.model},
                    {"response", response_to_json(r)}};
        std::lock_guard<std::mutex> lock(*mu_);
        std::ofstream out(entry);
        out << rec.dump() << "\n";
        if (!record_path_.empty()) {
            json full = {{"hash", hash},
                         {"tag", req.tag},
                         {"model", req.model},
                         {"system_prompt", req.system_prompt},
                         {"user_prompt", req.user_prompt},
                         {"temperature", req.temperature},
                         {"response", response_to_json(r)}};
            std::ofstream t(record_path_, std::ios::app);
            t << full.dump() << "\n";
        }
        ++served_;
        return r;
    }

    ChatResponse r = backend_->complete(req);
    std::lock_guard<std::mutex> lock(*mu_);
    if (!record_path_.empty()) {
        json full = {{"hash", hash},
                     {"tag", req.tag},
                     {"model", req.model},
                     {"system_prompt", req.system_prompt},
                     {"user_prompt", req.user_prompt},
                     {"temperature", req.temperature},
                     {"response", response_to_json(r)}};
        std::ofstream t(record_path_, std::ios::app);
        t << full.dump() << "\n";
    }
    ++served_;
    return r;
}

}  // namespace tabattr
