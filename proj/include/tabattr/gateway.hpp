#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <nlohmann/json.hpp>

#include "tabattr/errors.hpp"

namespace tabattr {

struct ChatRequest {
    std::string model;
    std::string system_prompt;
    std::string user_prompt;
    double temperature = 0.0;
    int max_output_tokens = 2048;
    std::string tag;  // agent name, recorded in transcripts
};

struct Usage {
    long prompt_tokens = 0;
    long completion_tokens = 0;
};

struct ChatResponse {
    std::string text;
    Usage usage;
    bool cached = false;
};

// Stable across runs and platforms: FNV-1a 64 over a fixed field serialization.
// max_output_tokens is deliberately excluded from the key.
std::string request_hash(const ChatRequest& req);

// Strips code fences and surrounding prose, parses the first balanced JSON
// object or array. Throws ExtractionError (carrying the raw text) otherwise.
nlohmann::json extract_json(const std::string& text);

class Backend {
public:
    virtual ~Backend() = default;
    virtual ChatResponse complete(const ChatRequest& req) = 0;
};

// OpenAI-compatible /v1/chat/completions endpoint with exponential-backoff
// retries (max 5 attempts).
class HttpBackend : public Backend {
public:
    HttpBackend(std::string base_url, std::string api_key);
    ChatResponse complete(const ChatRequest& req) override;

private:
    std::string base_url_;
    std::string api_key_;
};

// Deterministic function backend for tests and fixture generation.
class ScriptedBackend : public Backend {
public:
    using Fn = std::function<std::string(const ChatRequest&)>;
    explicit ScriptedBackend(Fn fn) : fn_(std::move(fn)) {}
    ChatResponse complete(const ChatRequest& req) override {
        return ChatResponse{fn_(req), {static_cast<long>(req.user_prompt.size() / 4), 0}, false};
    }

private:
    Fn fn_;
};

enum class GatewayMode { Live, Cache, Replay };

// Thread-safe front door: replay from transcript, disk cache over a live
// backend, or straight live calls; optionally records every exchange.
class Gateway {
public:
    // Replay-only gateway over a JSON-lines transcript file.
    static Gateway replay(const std::string& transcript_path);
    // Live gateway; when cache_dir is non-empty, responses are cached on disk
    // one file per request hash.
    static Gateway live(std::shared_ptr<Backend> backend, std::string cache_dir = "");

    ChatResponse complete(const ChatRequest& req);

    // Appends every (request, response) pair to a JSON-lines transcript.
    void record_to(const std::string& transcript_path);

    GatewayMode mode() const { return mode_; }
    long requests_served() const { return served_; }

private:
    Gateway() = default;

    GatewayMode mode_ = GatewayMode::Live;
    std::shared_ptr<Backend> backend_;
    std::string cache_dir_;
    std::string record_path_;
    std::map<std::string, ChatResponse> transcript_;
    // unique_ptr keeps Gateway movable out of the named factories
    std::unique_ptr<std::mutex> mu_ = std::make_unique<std::mutex>();
    long served_ = 0;
};

}  // namespace tabattr
