// Deterministic chat-completions stub for offline runs and tests. Answers
// depend only on the incoming prompt, so cached and live runs agree.

#include <csignal>
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "edulevel/text_utils.hpp"

namespace {

httplib::Server* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

bool hash_coin(const std::string& prompt) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : prompt) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return (h >> 13) & 1;
}

/// label-coded mode: metric questions about a school level answer "Yes" iff
/// the text carries that level's marker word. Everything else answers by
/// prompt hash. Markers make synthetic fixtures trivially level-codable.
std::string label_coded_answer(const std::string& prompt) {
  const std::string lower = edulevel::to_lower(prompt);
  const auto text_pos = lower.find("text:");
  const std::string question =
      text_pos == std::string::npos ? lower : lower.substr(0, text_pos);
  const std::string text =
      text_pos == std::string::npos ? std::string() : lower.substr(text_pos);
  auto coded = [&](const char* level, const char* marker) {
    return question.find(level) != std::string::npos
               ? std::optional<bool>(text.find(marker) != std::string::npos)
               : std::nullopt;
  };
  if (auto hit = coded("elementary", "animals")) return *hit ? "Yes." : "No.";
  if (auto hit = coded("middle", "energy")) return *hit ? "Yes." : "No.";
  if (auto hit = coded("high school", "molecules")) return *hit ? "Yes." : "No.";
  return hash_coin(prompt) ? "Yes." : "No.";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic stub LLM server (chat-completions protocol)"};
  int port = 8089;
  std::string mode = "yes";
  app.add_option("--port", port, "listen port (0 = any free port)");
  app.add_option("--mode", mode,
                 "answer policy: yes | no | gibberish | hash | labelcode | "
                 "level-elementary | level-middle | level-high")
      ->check(CLI::IsMember({"yes", "no", "gibberish", "hash", "labelcode",
                             "level-elementary", "level-middle",
                             "level-high"}));
  CLI11_PARSE(app, argc, argv);

  auto answer = [mode](const std::string& prompt) -> std::string {
    if (mode == "yes") return "Yes.";
    if (mode == "no") return "No.";
    if (mode == "gibberish") return "Hmm, it depends entirely.";
    if (mode == "hash") return hash_coin(prompt) ? "Yes." : "No.";
    if (mode == "level-elementary") return "elementary school";
    if (mode == "level-middle") return "middle school";
    if (mode == "level-high") return "high school";
    return label_coded_answer(prompt);
  };

  httplib::Server server;
  g_server = &server;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);

  server.Post("/v1/chat/completions", [&answer](const httplib::Request& req,
                                                httplib::Response& res) {
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
         {{{"message", {{"role", "assistant"}, {"content", answer(prompt)}}}}}}};
    res.set_content(reply.dump(), "application/json");
  });

  int bound_port = port;
  if (port == 0) {
    bound_port = server.bind_to_any_port("127.0.0.1");
  } else if (!server.bind_to_port("127.0.0.1", port)) {
    std::fprintf(stderr, "cannot bind port %d\n", port);
    return 1;
  }
  std::printf("stub llm listening on http://127.0.0.1:%d (mode=%s)\n",
              bound_port, mode.c_str());
  std::fflush(stdout);
  server.listen_after_bind();
  return 0;
}
