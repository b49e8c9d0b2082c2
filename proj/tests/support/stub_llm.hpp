#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace edulevel::testing {

/// In-process chat-completions stub. The answer function maps the incoming
/// user prompt to a reply string; tests can also force a number of error
/// statuses to exercise the retry path.
class StubLlmServer {
 public:
  using AnswerFn = std::function<std::string(const std::string& prompt)>;

  explicit StubLlmServer(AnswerFn answer) : answer_(std::move(answer)) {
    server_.Post("/v1/chat/completions",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   handle(req, res);
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubLlmServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  int port() const { return port_; }
  std::string base_url() const {
    return "http://127.0.0.1:" + std::to_string(port_);
  }
  int request_count() const { return requests_.load(); }
  void reset_request_count() { requests_.store(0); }

  /// The next `times` requests answer with `status` instead of a completion.
  void force_errors(int status, int times) {
    error_status_ = status;
    forced_errors_.store(times);
  }

 private:
  void handle(const httplib::Request& req, httplib::Response& res) {
    requests_.fetch_add(1);
    if (forced_errors_.load() > 0) {
      forced_errors_.fetch_sub(1);
      res.status = error_status_;
      res.set_content("forced error", "text/plain");
      return;
    }
    std::string prompt;
    try {
      const auto j = nlohmann::json::parse(req.body);
      prompt = j.at("messages").at(0).at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      res.status = 400;
      res.set_content("bad request", "text/plain");
      return;
    }
    nlohmann::json reply = {
        {"choices",
         {{{"message",
            {{"role", "assistant"}, {"content", answer_(prompt)}}}}}}};
    res.set_content(reply.dump(), "application/json");
  }

  AnswerFn answer_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> requests_{0};
  std::atomic<int> forced_errors_{0};
  int error_status_ = 500;
};

/// Deterministic pseudo-answer used by "hash" policies: yes/no from a stable
/// digest of the prompt.
inline bool hash_coin(const std::string& prompt, unsigned salt = 0) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ salt;
  for (unsigned char c : prompt) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return (h >> 13) & 1;
}

}  // namespace edulevel::testing
