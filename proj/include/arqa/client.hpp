#pragma once

#include "arqa/prompting.hpp"

#include <memory>
#include <optional>
#include <string>

namespace arqa::prompting {

class provider_error : public prompting_error {
public:
    using prompting_error::prompting_error;
};

// Raised in offline mode when a prompt is not in the cache.
class offline_cache_miss : public provider_error {
public:
    using provider_error::provider_error;
};

struct ProviderConfig {
    std::string provider = "gemini"; // gemini | deepseek | openai
    std::string model;
    std::string endpoint;    // empty -> provider default
    std::string api_key_env; // empty -> provider default (e.g. GEMINI_API_KEY)
    double temperature = 0.0;
    int max_retries = 3;
    int timeout_sec = 120;
    int concurrency = 4; // max in-flight requests
    std::string cache_dir = ".arqa-cache";
    bool offline = false;
    std::string template_digest; // folded into the cache key
};

// key = value file, '#' comments. Unknown keys are an error.
ProviderConfig load_provider_config(const std::string& path);

struct RawResponse {
    std::string provider;
    std::string model;
    std::string prompt_hash;
    std::string text;
    std::string timestamp;
    bool from_cache = false;
};

// Digest of the rendered prompt plus model identity and template digest, so
// template or model changes invalidate stale cache entries.
std::string prompt_cache_key(const ProviderConfig& cfg, std::string_view prompt);

// Cache-first chat client. One JSON file per prompt hash under cache_dir;
// entries are written to a temp file and renamed so concurrent writers are
// safe. In offline mode a cache miss throws offline_cache_miss and no
// network call is ever made.
class ModelClient {
public:
    explicit ModelClient(ProviderConfig cfg);
    ~ModelClient();

    ModelClient(const ModelClient&) = delete;
    ModelClient& operator=(const ModelClient&) = delete;

    RawResponse query(std::string_view prompt);

    const ProviderConfig& config() const { return cfg_; }

    // Cumulative wall time spent in live HTTP requests.
    double network_ms() const;

    static void write_cache_entry(const std::string& cache_dir, const RawResponse& response);
    static std::optional<RawResponse> read_cache_entry(const std::string& cache_dir,
                                                       const std::string& key);

private:
    struct Impl;
    ProviderConfig cfg_;
    std::unique_ptr<Impl> impl_;

    RawResponse perform_request(std::string_view prompt, const std::string& key);
};

} // namespace arqa::prompting
