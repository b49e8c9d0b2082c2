#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "edulevel/sha256.hpp"
#include "edulevel/text_utils.hpp"
#include "edulevel/types.hpp"

namespace edulevel {

struct LlmConfig {
  std::string base_url = "http://127.0.0.1:8080";
  std::string model_name = "stub";
  std::string api_key_env = "EDULEVEL_API_KEY";
  double temperature = 0.0;  // fixed 0 unless overridden in config
  int max_tokens = 256;      // fixed 256 unless overridden in config
  int timeout_sec = 30;
  int retry_count = 3;
  int max_parallel = 4;
  int backoff_base_ms = 50;  // doubled per retry; tests shrink it
};

enum class Parsed { Yes, No, Na };

inline const char* to_string(Parsed p) {
  switch (p) {
    case Parsed::Yes: return "yes";
    case Parsed::No: return "no";
    case Parsed::Na: return "na";
  }
  return "na";
}

inline std::optional<Parsed> parsed_from_string(std::string_view s) {
  if (s == "yes") return Parsed::Yes;
  if (s == "no") return Parsed::No;
  if (s == "na") return Parsed::Na;
  return std::nullopt;
}

/// First standalone "yes" or "no" token (case-insensitive) decides; neither
/// found → Na.
inline Parsed parse_yes_no(std::string_view response) {
  const std::size_t n = response.size();
  std::size_t i = 0;
  while (i < n) {
    while (i < n && !is_ascii_alpha(static_cast<unsigned char>(response[i])))
      ++i;
    std::size_t start = i;
    while (i < n && is_ascii_alpha(static_cast<unsigned char>(response[i])))
      ++i;
    const std::string word = to_lower(response.substr(start, i - start));
    if (word == "yes") return Parsed::Yes;
    if (word == "no") return Parsed::No;
  }
  return Parsed::Na;
}

struct CacheEntry {
  std::string key;
  std::string prompt_text;
  std::string response_text;
  Parsed parsed = Parsed::Na;
  std::int64_t timestamp = 0;
};

/// Append-only JSON-lines store keyed by a SHA-256 digest. Writes are
/// serialized through one mutex; lookups hit the in-memory map.
class ResponseCache {
 public:
  ResponseCache() = default;

  explicit ResponseCache(std::filesystem::path file) : file_(std::move(file)) {
    if (std::filesystem::exists(file_)) load();
    if (file_.has_parent_path())
      std::filesystem::create_directories(file_.parent_path());
    out_.open(file_, std::ios::app);
    if (!out_) throw CacheError("cannot open cache file: " + file_.string());
  }

  static std::string make_key(std::string_view model_name,
                              std::string_view template_id,
                              std::string_view full_text) {
    std::string material;
    material.reserve(model_name.size() + template_id.size() +
                     full_text.size() + 2);
    material.append(model_name);
    material.push_back('\x1f');
    material.append(template_id);
    material.push_back('\x1f');
    material.append(full_text);
    return Sha256::hex(material);
  }

  std::optional<std::string> lookup(const std::string& key) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second.response_text;
  }

  void insert(CacheEntry entry) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (entries_.count(entry.key)) return;  // append-only, first write wins
    if (out_.is_open()) {
      nlohmann::ordered_json j;
      j["key"] = entry.key;
      j["prompt"] = entry.prompt_text;
      j["response"] = entry.response_text;
      j["parsed"] = to_string(entry.parsed);
      j["timestamp"] = entry.timestamp;
      out_ << j.dump() << '\n';
      out_.flush();
    }
    entries_.emplace(entry.key, std::move(entry));
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.size();
  }

 private:
  void load() {
    std::istringstream in(read_file(file_));
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception&) {
        throw CacheError("cache " + file_.string() + " line " +
                         std::to_string(line_no) + ": corrupted entry");
      }
      CacheEntry e;
      try {
        e.key = j.at("key").get<std::string>();
        e.prompt_text = j.at("prompt").get<std::string>();
        e.response_text = j.at("response").get<std::string>();
        auto parsed = parsed_from_string(j.at("parsed").get<std::string>());
        if (!parsed) throw FormatError("bad parsed value");
        e.parsed = *parsed;
        e.timestamp = j.at("timestamp").get<std::int64_t>();
      } catch (const std::exception&) {
        throw CacheError("cache " + file_.string() + " line " +
                         std::to_string(line_no) + ": corrupted entry");
      }
      entries_.emplace(e.key, std::move(e));
    }
  }

  std::filesystem::path file_;
  std::ofstream out_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, CacheEntry> entries_;
};

// ---------------------------------------------------------------------------
// Chat-completions client
// ---------------------------------------------------------------------------

class LlmClient {
 public:
  explicit LlmClient(LlmConfig cfg) : cfg_(std::move(cfg)) {}

  const LlmConfig& config() const { return cfg_; }

  /// Cache-aware completion. On a hit no network traffic happens; on a miss
  /// the endpoint is called with temperature/max_tokens from the config and
  /// the entry is persisted. Transport and endpoint failures leave the cache
  /// unchanged.
  std::string complete(const std::string& prompt, const std::string& cache_key,
                       ResponseCache& cache) const {
    if (auto hit = cache.lookup(cache_key)) return *hit;
    const std::string response = post_completion(prompt);
    CacheEntry entry;
    entry.key = cache_key;
    entry.prompt_text = prompt;
    entry.response_text = response;
    entry.parsed = parse_yes_no(response);
    entry.timestamp = std::chrono::duration_cast<std::chrono::seconds>(
                          std::chrono::system_clock::now().time_since_epoch())
                          .count();
    cache.insert(std::move(entry));
    return response;
  }

  /// Uncached POST to the chat-completions endpoint, with retries.
  std::string post_completion(const std::string& prompt) const {
    nlohmann::ordered_json body;
    body["model"] = cfg_.model_name;
    body["temperature"] = cfg_.temperature;
    body["max_tokens"] = cfg_.max_tokens;
    body["messages"] = nlohmann::ordered_json::array(
        {{{"role", "user"}, {"content", prompt}}});
    const std::string payload = body.dump();

    std::string last_error;
    const int attempts = cfg_.retry_count + 1;
    for (int attempt = 0; attempt < attempts; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(
            static_cast<long>(cfg_.backoff_base_ms) << (attempt - 1)));
      }
      httplib::Client client(cfg_.base_url);
      client.set_connection_timeout(cfg_.timeout_sec, 0);
      client.set_read_timeout(cfg_.timeout_sec, 0);
      httplib::Headers headers;
      if (!cfg_.api_key_env.empty()) {
        if (const char* key = std::getenv(cfg_.api_key_env.c_str());
            key && *key)
          headers.emplace("Authorization", std::string("Bearer ") + key);
      }
      auto res = client.Post("/v1/chat/completions", headers, payload,
                             "application/json");
      if (!res) {
        last_error = "connection failed: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 200 && res->status < 300) {
        return extract_content(res->body);
      }
      if (res->status == 429 || res->status >= 500) {
        last_error = "retryable status " + std::to_string(res->status);
        continue;
      }
      throw EndpointError("endpoint returned status " +
                          std::to_string(res->status) + " for model " +
                          cfg_.model_name);
    }
    throw TransportError("llm request failed after " +
                         std::to_string(attempts) + " attempts: " + last_error);
  }

 private:
  static std::string extract_content(const std::string& body) {
    try {
      const auto j = nlohmann::json::parse(body);
      return j.at("choices").at(0).at("message").at("content")
          .get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw EndpointError(std::string("malformed completion response: ") +
                          e.what());
    }
  }

  LlmConfig cfg_;
};

/// Spec-shaped free function.
inline std::string query_llm(const LlmConfig& cfg, const std::string& prompt,
                             const std::string& cache_key,
                             ResponseCache& cache) {
  return LlmClient(cfg).complete(prompt, cache_key, cache);
}

}  // namespace edulevel
