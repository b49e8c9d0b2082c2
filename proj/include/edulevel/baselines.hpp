#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "edulevel/classifier.hpp"
#include "edulevel/llm_client.hpp"
#include "edulevel/types.hpp"

namespace edulevel {

/// The shipped zero-shot instruction. [text] is replaced by the document's
/// full text at prompt-build time.
inline const std::string& zero_shot_prompt_template() {
  static const std::string t =
      "Your task is to predict the education level corresponding to a given "
      "text. You are provided with three labels to choose from: 1) elementary "
      "school 2) middle school 3) high school. Text: [text] Educational "
      "level: ";
  return t;
}

struct BaselineConfig {
  enum class Mode { ZeroShot, FewShot };
  Mode mode = Mode::ZeroShot;
  int shots_per_class = 2;
  std::vector<EduDocument> exemplars;  // labelled; cover all classes for few-shot
  LlmConfig llm;
};

struct BaselineOutcome {
  std::map<std::string, Level> predictions;  // doc_id → level (after default rule)
  double invalid_rate = 0.0;
  std::array<double, kNumClasses> class_distribution{};
  int invalid_count = 0;
  int total = 0;
};

namespace detail {

inline std::string instruction_head() {
  // everything before the "Text: [text] ..." tail of the zero-shot template
  const std::string& tmpl = zero_shot_prompt_template();
  const auto pos = tmpl.find("Text: [text]");
  return tmpl.substr(0, pos);
}

}  // namespace detail

/// Zero-shot: the template verbatim with [text] substituted. Few-shot: the
/// same instruction followed by shots_per_class exemplars per class in fixed
/// class order (Elementary, Middle, High), each rendered as
/// "Text: ...\nEducational level: <label>", then the query text.
inline std::string build_baseline_prompt(const BaselineConfig& cfg,
                                         const EduDocument& doc) {
  if (cfg.mode == BaselineConfig::Mode::ZeroShot) {
    std::string out = zero_shot_prompt_template();
    const std::string placeholder = "[text]";
    const auto pos = out.find(placeholder);
    out.replace(pos, placeholder.size(), doc.full_text());
    return out;
  }

  if (cfg.shots_per_class < 1)
    throw DomainError("few-shot needs shots_per_class >= 1");
  std::array<std::vector<const EduDocument*>, kNumClasses> by_level;
  for (const EduDocument& ex : cfg.exemplars) {
    if (!ex.level)
      throw DomainError("few-shot exemplar " + ex.doc_id + " has no label");
    by_level[static_cast<int>(*ex.level)].push_back(&ex);
  }
  for (Level level : kAllLevels) {
    if (static_cast<int>(by_level[static_cast<int>(level)].size()) <
        cfg.shots_per_class)
      throw DomainError(std::string("few-shot exemplars missing class ") +
                        to_string(level));
  }

  std::string out = detail::instruction_head();
  for (Level level : kAllLevels) {
    const auto& pool = by_level[static_cast<int>(level)];
    for (int i = 0; i < cfg.shots_per_class; ++i) {
      out += "Text: " + pool[i]->full_text() + "\nEducational level: " +
             level_label(level) + "\n";
    }
  }
  out += "Text: " + doc.full_text() + "\nEducational level: ";
  return out;
}

/// Case-insensitive scan for "elementary" / "middle" / "high"; exactly one
/// distinct label mentioned decides, anything else is invalid.
inline std::optional<Level> parse_level_response(std::string_view response) {
  const std::string lower = to_lower(response);
  const bool elementary = lower.find("elementary") != std::string::npos;
  const bool middle = lower.find("middle") != std::string::npos;
  const bool high = lower.find("high") != std::string::npos;
  const int mentioned = (elementary ? 1 : 0) + (middle ? 1 : 0) + (high ? 1 : 0);
  if (mentioned != 1) return std::nullopt;
  if (elementary) return Level::Elementary;
  if (middle) return Level::Middle;
  return Level::High;
}

namespace detail {

inline std::string baseline_template_id(const BaselineConfig& cfg) {
  if (cfg.mode == BaselineConfig::Mode::ZeroShot) return "baseline_zero_shot";
  std::string id = "baseline_few_shot";
  for (const EduDocument& ex : cfg.exemplars) id += "." + ex.doc_id;
  return id;
}

}  // namespace detail

/// Direct LLM classification over a document set. Invalid responses default
/// to Elementary and are counted in invalid_rate. Few-shot exemplars must be
/// disjoint from the evaluated documents.
inline BaselineOutcome run_baseline(const BaselineConfig& cfg,
                                    const std::vector<EduDocument>& docs,
                                    ResponseCache& cache) {
  if (cfg.mode == BaselineConfig::Mode::FewShot) {
    std::set<std::string> eval_ids;
    for (const EduDocument& doc : docs) eval_ids.insert(doc.doc_id);
    for (const EduDocument& ex : cfg.exemplars) {
      if (eval_ids.count(ex.doc_id))
        throw LeakageError("few-shot exemplar " + ex.doc_id +
                           " overlaps the evaluation set");
    }
  }

  const LlmClient client(cfg.llm);
  const std::string template_id = detail::baseline_template_id(cfg);
  BaselineOutcome outcome;
  outcome.total = static_cast<int>(docs.size());
  for (const EduDocument& doc : docs) {
    const std::string prompt = build_baseline_prompt(cfg, doc);
    const std::string key = ResponseCache::make_key(
        cfg.llm.model_name, template_id, doc.full_text());
    const std::string response = client.complete(prompt, key, cache);
    Level predicted = Level::Elementary;  // default for invalid responses
    if (auto parsed = parse_level_response(response)) {
      predicted = *parsed;
    } else {
      ++outcome.invalid_count;
    }
    outcome.predictions[doc.doc_id] = predicted;
    outcome.class_distribution[static_cast<int>(predicted)] += 1.0;
  }
  if (outcome.total > 0) {
    outcome.invalid_rate =
        static_cast<double>(outcome.invalid_count) / outcome.total;
    for (double& share : outcome.class_distribution) share /= outcome.total;
  }
  return outcome;
}

/// EvalReport over baseline predictions, with the invalid rate attached.
inline EvalReport evaluate_baseline(const BaselineOutcome& outcome,
                                    const std::vector<EduDocument>& docs) {
  std::vector<Level> y_true, y_pred;
  for (const EduDocument& doc : docs) {
    if (!doc.level) continue;
    auto it = outcome.predictions.find(doc.doc_id);
    if (it == outcome.predictions.end()) continue;
    y_true.push_back(*doc.level);
    y_pred.push_back(it->second);
  }
  EvalReport report = evaluate_predictions(y_true, y_pred);
  report.invalid_rate = outcome.invalid_rate;
  return report;
}

}  // namespace edulevel
