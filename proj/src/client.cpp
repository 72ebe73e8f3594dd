#include "arqa/client.hpp"

#include "arqa/config.hpp"
#include "arqa/http.hpp"
#include "arqa/sha256.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <semaphore>
#include <sstream>
#include <thread>
#include <unistd.h>

using nlohmann::json;
namespace fs = std::filesystem;

namespace arqa::prompting {

namespace {

struct ProviderSpec {
    std::string base_url;
    std::string path;          // "{model}" expands to the model id
    std::string auth_header;   // sent as "<auth_header>: <key>"
    std::string auth_prefix;   // prepended to the key value
};

ProviderSpec provider_spec(const ProviderConfig& cfg) {
    ProviderSpec spec;
    if (cfg.provider == "gemini") {
        spec.base_url = "https://generativelanguage.googleapis.com";
        spec.path = "/v1beta/models/{model}:generateContent";
        spec.auth_header = "x-goog-api-key";
    } else if (cfg.provider == "deepseek") {
        spec.base_url = "https://api.deepseek.com";
        spec.path = "/chat/completions";
        spec.auth_header = "Authorization";
        spec.auth_prefix = "Bearer ";
    } else if (cfg.provider == "openai") {
        spec.base_url = "https://api.openai.com";
        spec.path = "/v1/chat/completions";
        spec.auth_header = "Authorization";
        spec.auth_prefix = "Bearer ";
    } else {
        throw provider_error("unknown provider: " + cfg.provider);
    }
    if (!cfg.endpoint.empty())
        spec.base_url = cfg.endpoint;
    return spec;
}

std::string default_key_env(const std::string& provider) {
    if (provider == "gemini")
        return "GEMINI_API_KEY";
    if (provider == "deepseek")
        return "DEEPSEEK_API_KEY";
    return "OPENAI_API_KEY";
}

std::string request_body(const ProviderConfig& cfg, std::string_view prompt) {
    if (cfg.provider == "gemini") {
        return json{{"contents", json::array({json{{"parts", json::array({json{{"text", prompt}}})}}})},
                    {"generationConfig", json{{"temperature", cfg.temperature}}}}
            .dump();
    }
    // OpenAI-style chat completion (deepseek, openai).
    return json{{"model", cfg.model},
                {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
                {"temperature", cfg.temperature}}
        .dump();
}

std::string extract_text(const ProviderConfig& cfg, const std::string& body) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::exception& e) {
        throw provider_error("unparseable provider response: " + std::string(e.what()));
    }
    try {
        if (cfg.provider == "gemini") {
            std::string text;
            for (const auto& part : doc.at("candidates").at(0).at("content").at("parts"))
                text += part.value("text", std::string());
            return text;
        }
        return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        throw provider_error("provider response missing expected fields: " + body.substr(0, 200));
    }
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

bool retryable_status(int status) {
    return status == 408 || status == 429 || (status >= 500 && status < 600);
}

} // namespace

ProviderConfig load_provider_config(const std::string& path) {
    ProviderConfig cfg;
    for (const auto& [key, value] : parse_kv_file(path)) {
        if (key == "provider")
            cfg.provider = value;
        else if (key == "model")
            cfg.model = value;
        else if (key == "endpoint")
            cfg.endpoint = value;
        else if (key == "api_key_env")
            cfg.api_key_env = value;
        else if (key == "temperature")
            cfg.temperature = std::stod(value);
        else if (key == "max_retries")
            cfg.max_retries = std::stoi(value);
        else if (key == "timeout_sec")
            cfg.timeout_sec = std::stoi(value);
        else if (key == "concurrency")
            cfg.concurrency = std::stoi(value);
        else if (key == "cache_dir")
            cfg.cache_dir = value;
        else
            throw config_error(path + ": unknown key " + key);
    }
    return cfg;
}

std::string prompt_cache_key(const ProviderConfig& cfg, std::string_view prompt) {
    std::string joined;
    joined.append(cfg.provider).push_back('\x1f');
    joined.append(cfg.model).push_back('\x1f');
    joined.append(cfg.template_digest).push_back('\x1f');
    joined.append(prompt);
    return sha256_hex(joined);
}

struct ModelClient::Impl {
    explicit Impl(int concurrency)
        : gate(std::max(1, std::min(concurrency, 64))) {}
    std::counting_semaphore<64> gate;
    std::atomic<long long> network_us{0};
};

ModelClient::ModelClient(ProviderConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.api_key_env.empty())
        cfg_.api_key_env = default_key_env(cfg_.provider);
    impl_ = std::make_unique<Impl>(cfg_.concurrency);
}

ModelClient::~ModelClient() = default;

double ModelClient::network_ms() const {
    return static_cast<double>(impl_->network_us.load()) / 1000.0;
}

RawResponse ModelClient::query(std::string_view prompt) {
    const std::string key = prompt_cache_key(cfg_, prompt);
    if (auto cached = read_cache_entry(cfg_.cache_dir, key)) {
        cached->from_cache = true;
        return *cached;
    }
    if (cfg_.offline)
        throw offline_cache_miss("offline mode: no cached response for prompt hash " + key);
    RawResponse response = perform_request(prompt, key);
    write_cache_entry(cfg_.cache_dir, response);
    return response;
}

RawResponse ModelClient::perform_request(std::string_view prompt, const std::string& key) {
    const ProviderSpec spec = provider_spec(cfg_);
    const char* api_key = std::getenv(cfg_.api_key_env.c_str());
    if (api_key == nullptr || *api_key == '\0')
        throw provider_error("credential missing: set " + cfg_.api_key_env);

    std::string path = spec.path;
    if (const auto pos = path.find("{model}"); pos != std::string::npos)
        path.replace(pos, 7, cfg_.model);

    const std::string body = request_body(cfg_, prompt);

    impl_->gate.acquire();
    struct Release {
        std::counting_semaphore<64>& gate;
        ~Release() { gate.release(); }
    } release{impl_->gate};

    std::string last_error;
    for (int attempt = 1; attempt <= std::max(1, cfg_.max_retries); ++attempt) {
        if (attempt > 1)
            std::this_thread::sleep_for(std::chrono::milliseconds(500LL << (attempt - 2)));

        httplib::Client client(spec.base_url);
        client.set_connection_timeout(cfg_.timeout_sec, 0);
        client.set_read_timeout(cfg_.timeout_sec, 0);
        httplib::Headers headers{{spec.auth_header, spec.auth_prefix + api_key}};

        const auto t0 = std::chrono::steady_clock::now();
        httplib::Result res = client.Post(path, headers, body, "application/json");
        const auto t1 = std::chrono::steady_clock::now();
        impl_->network_us +=
            std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count();

        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 200) {
            RawResponse response;
            response.provider = cfg_.provider;
            response.model = cfg_.model;
            response.prompt_hash = key;
            response.text = extract_text(cfg_, res->body);
            response.timestamp = utc_timestamp();
            response.from_cache = false;
            return response;
        }
        last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
        if (!retryable_status(res->status))
            break;
    }
    throw provider_error(cfg_.provider + " request failed after retries: " + last_error);
}

void ModelClient::write_cache_entry(const std::string& cache_dir, const RawResponse& response) {
    fs::create_directories(cache_dir);
    const fs::path final_path = fs::path(cache_dir) / (response.prompt_hash + ".json");
    const json doc{{"provider", response.provider},
                   {"model", response.model},
                   {"prompt_hash", response.prompt_hash},
                   {"text", response.text},
                   {"timestamp", response.timestamp},
                   {"from_cache", false}};
    static std::atomic<unsigned> counter{0};
    std::ostringstream tmp_name;
    tmp_name << final_path.filename().string() << ".tmp." << ::getpid() << "." << counter++;
    const fs::path tmp_path = fs::path(cache_dir) / tmp_name.str();
    {
        std::ofstream out(tmp_path, std::ios::binary);
        if (!out)
            throw provider_error("cannot write cache entry: " + tmp_path.string());
        out << doc.dump(1) << '\n';
    }
    fs::rename(tmp_path, final_path);
}

std::optional<RawResponse> ModelClient::read_cache_entry(const std::string& cache_dir,
                                                         const std::string& key) {
    const fs::path path = fs::path(cache_dir) / (key + ".json");
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return std::nullopt;
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw provider_error("corrupt cache entry " + path.string() + ": " + e.what());
    }
    RawResponse response;
    response.provider = doc.value("provider", std::string());
    response.model = doc.value("model", std::string());
    response.prompt_hash = doc.value("prompt_hash", key);
    response.text = doc.value("text", std::string());
    response.timestamp = doc.value("timestamp", std::string());
    response.from_cache = false;
    return response;
}

} // namespace arqa::prompting
