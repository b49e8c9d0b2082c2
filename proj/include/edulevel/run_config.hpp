#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "edulevel/classifier.hpp"
#include "edulevel/dataset.hpp"
#include "edulevel/llm_client.hpp"
#include "edulevel/text_utils.hpp"
#include "edulevel/types.hpp"

namespace edulevel {

enum class FeatureSet { Static, Prompt, Combo };

inline const char* to_string(FeatureSet fs) {
  switch (fs) {
    case FeatureSet::Static: return "static";
    case FeatureSet::Prompt: return "prompt";
    case FeatureSet::Combo: return "combo";
  }
  return "combo";
}

inline std::optional<FeatureSet> feature_set_from_string(std::string_view s) {
  if (s == "static") return FeatureSet::Static;
  if (s == "prompt") return FeatureSet::Prompt;
  if (s == "combo") return FeatureSet::Combo;
  return std::nullopt;
}

/// One JSON config file drives the whole pipeline; every value can be
/// overridden by a command-line flag (flags > file > defaults). One root
/// seed fans out to every seeded stage via derive_seed.
struct RunConfig {
  std::uint64_t seed = 0;

  // dataset
  std::string dataset_input;
  SplitSpec split;

  // resources
  std::string templates_path = "data/prompt_templates.json";
  std::string sense_lexicon_path = "data/sense_lexicon.tsv";
  std::string stopwords_path = "data/stopwords.txt";
  std::string abbreviations_path = "data/abbreviations.txt";
  std::string syllables_path;    // optional dictionary
  std::string annotations_path;  // optional sidecar annotations

  // outputs
  std::string output_dir = "out";
  std::string cache_path;  // default: <output_dir>/llm_cache.jsonl

  LlmConfig llm;
  Hyperparams classifier;
  FeatureSet feature_set = FeatureSet::Combo;

  // baseline
  bool baseline_few_shot = false;
  int shots_per_class = 2;

  std::filesystem::path out_path(const std::string& name) const {
    return std::filesystem::path(output_dir) / name;
  }
  std::filesystem::path cache_file() const {
    return cache_path.empty() ? out_path("llm_cache.jsonl")
                              : std::filesystem::path(cache_path);
  }
};

inline RunConfig load_run_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("cannot parse config " + path.string() + ": " + e.what());
  }
  RunConfig cfg;
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    cfg.dataset_input = d.value("input", cfg.dataset_input);
    cfg.split.per_class = d.value("per_class", cfg.split.per_class);
    cfg.split.train_fraction =
        d.value("train_fraction", cfg.split.train_fraction);
    cfg.split.stratify = d.value("stratify", cfg.split.stratify);
  }
  if (j.contains("paths")) {
    const auto& p = j.at("paths");
    cfg.templates_path = p.value("templates", cfg.templates_path);
    cfg.sense_lexicon_path = p.value("sense_lexicon", cfg.sense_lexicon_path);
    cfg.stopwords_path = p.value("stopwords", cfg.stopwords_path);
    cfg.abbreviations_path = p.value("abbreviations", cfg.abbreviations_path);
    cfg.syllables_path = p.value("syllables", cfg.syllables_path);
    cfg.annotations_path = p.value("annotations", cfg.annotations_path);
    cfg.output_dir = p.value("output_dir", cfg.output_dir);
    cfg.cache_path = p.value("cache", cfg.cache_path);
  }
  if (j.contains("llm")) {
    const auto& l = j.at("llm");
    cfg.llm.base_url = l.value("base_url", cfg.llm.base_url);
    cfg.llm.model_name = l.value("model_name", cfg.llm.model_name);
    cfg.llm.api_key_env = l.value("api_key_env", cfg.llm.api_key_env);
    cfg.llm.temperature = l.value("temperature", cfg.llm.temperature);
    cfg.llm.max_tokens = l.value("max_tokens", cfg.llm.max_tokens);
    cfg.llm.timeout_sec = l.value("timeout_sec", cfg.llm.timeout_sec);
    cfg.llm.retry_count = l.value("retry_count", cfg.llm.retry_count);
    cfg.llm.max_parallel = l.value("max_parallel", cfg.llm.max_parallel);
    cfg.llm.backoff_base_ms = l.value("backoff_base_ms", cfg.llm.backoff_base_ms);
  }
  if (j.contains("classifier")) {
    const auto& c = j.at("classifier");
    cfg.classifier.l2_lambda = c.value("l2_lambda", cfg.classifier.l2_lambda);
    cfg.classifier.max_iters = c.value("max_iters", cfg.classifier.max_iters);
    cfg.classifier.tolerance = c.value("tolerance", cfg.classifier.tolerance);
  }
  if (j.contains("feature_set")) {
    auto fs = feature_set_from_string(j.at("feature_set").get<std::string>());
    if (!fs) throw FormatError("config: unknown feature_set");
    cfg.feature_set = *fs;
  }
  if (j.contains("baseline")) {
    const auto& b = j.at("baseline");
    const std::string mode = b.value("mode", std::string("zero_shot"));
    if (mode == "few_shot") cfg.baseline_few_shot = true;
    else if (mode != "zero_shot")
      throw FormatError("config: unknown baseline mode " + mode);
    cfg.shots_per_class = b.value("shots_per_class", cfg.shots_per_class);
  }
  cfg.split.seed = derive_seed(cfg.seed, "dataset");
  return cfg;
}

}  // namespace edulevel
