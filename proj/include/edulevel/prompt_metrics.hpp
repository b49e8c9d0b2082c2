#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "edulevel/llm_client.hpp"
#include "edulevel/text_utils.hpp"
#include "edulevel/types.hpp"

namespace edulevel {

struct PromptTemplate {
  enum class Category { EducationLevel, Complexity, Topic, Readability };
  std::string id;  // "pm_01".."pm_63"
  Category category;
  std::string text;
};

inline const char* to_string(PromptTemplate::Category c) {
  switch (c) {
    case PromptTemplate::Category::EducationLevel: return "education_level";
    case PromptTemplate::Category::Complexity: return "complexity";
    case PromptTemplate::Category::Topic: return "topic";
    case PromptTemplate::Category::Readability: return "readability";
  }
  return "education_level";
}

inline std::optional<PromptTemplate::Category> prompt_category_from_string(
    std::string_view s) {
  if (s == "education_level") return PromptTemplate::Category::EducationLevel;
  if (s == "complexity") return PromptTemplate::Category::Complexity;
  if (s == "topic") return PromptTemplate::Category::Topic;
  if (s == "readability") return PromptTemplate::Category::Readability;
  return std::nullopt;
}

/// The 63 shipped yes/no metric questions: 30 education-level, 8 complexity,
/// 10 topic, 15 readability. Question strings are verbatim, quirks included.
inline const std::vector<PromptTemplate>& builtin_prompt_templates() {
  using C = PromptTemplate::Category;
  static const std::vector<PromptTemplate> templates = [] {
    struct Row { C category; const char* text; };
    static const Row rows[] = {
        {C::EducationLevel, "Is this text readable for an elementary school student?"},
        {C::EducationLevel, "Is this text suitable for an elementary school student?"},
        {C::EducationLevel, "Is this text easy to understand for elementary school students?"},
        {C::EducationLevel, "Is this text relevant to curriculum topics for elementary school students?"},
        {C::EducationLevel, "Is this text relevant to the knowledge and experiences of elementary school students?"},
        {C::EducationLevel, "Could an average elementary school student engage with the content of this task?"},
        {C::EducationLevel, "Could most elementary school students complete this task without significant difficulty?"},
        {C::EducationLevel, "Is this text appropriate for the skills and knowledges of elementary school students?"},
        {C::EducationLevel, "Is the length of this text suitable for elementary school students?"},
        {C::EducationLevel, "Would the vocabulary in this text be comprehensible to elementary school students?"},
        {C::EducationLevel, "Is this text readable for a middle school student?"},
        {C::EducationLevel, "Is this text suitable for a middle school student?"},
        {C::EducationLevel, "Is this text easy to understand for middle school students?"},
        {C::EducationLevel, "Is this text relevant to curriculum topics for middle school students?"},
        {C::EducationLevel, "Is this text relevant to the knowledge and experiences of middle school students?"},
        {C::EducationLevel, "Could an average middle school student engage with the content of this task?"},
        {C::EducationLevel, "Could most middle school students complete this task without significant difficulty?"},
        {C::EducationLevel, "Is this text appropriate for the skills and knowledges of middle school students?"},
        {C::EducationLevel, "Is the length of this text suitable for middle school students?"},
        {C::EducationLevel, "Would the vocabulary in this text be comprehensible to middle school students?"},
        {C::EducationLevel, "Is this text readable for a high school student?"},
        {C::EducationLevel, "Is this text suitable for a high school student?"},
        {C::EducationLevel, "Is this text easy to understand for high school students?"},
        {C::EducationLevel, "Is this text relevant to curriculum topics for high school students?"},
        {C::EducationLevel, "Is this text relevant to the knowledge and experiences of high school students?"},
        {C::EducationLevel, "Could an average high school school student engage with the content of this task?"},
        {C::EducationLevel, "Could most high school students complete this task without significant difficulty?"},
        {C::EducationLevel, "Is this text appropriate for the skills and knowledges of high school students?"},
        {C::EducationLevel, "Is the length of this text suitable for high school students?"},
        {C::EducationLevel, "Would the vocabulary in this text be comprehensible to high school students?"},
        {C::Complexity, "Does this text contain metaphors and/or figurative language?"},
        {C::Complexity, "Does this text use complex language?"},
        {C::Complexity, "Does this text use simple language?"},
        {C::Complexity, "Does this text contain technical jargon?"},
        {C::Topic, "Is this text about science?"},
        {C::Topic, "Is this text about language science?"},
        {C::Topic, "Is this text about natural science?"},
        {C::Topic, "Is this text about social science?"},
        {C::Topic, "Is this text about math?"},
        {C::Topic, "Is this text about physics?"},
        {C::Topic, "Is this text about chemistry?"},
        {C::Topic, "Is this text about earth science?"},
        {C::Topic, "Is this text about world history?"},
        {C::Topic, "Is this text about geography?"},
        {C::Readability, "Based on the Flesch-Kincaid reading-ease score, is this text suitable for elementary school readers?"},
        {C::Readability, "Based on the Flesch-Kincaid reading-ease score, is this text suitable for middle school readers?"},
        {C::Readability, "Based on the Flesch-Kincaid reading-ease score, is this text suitable for high school readers?"},
        {C::Readability, "Based on the Gunning Fog Index, is this text suitable for elementary school readers?"},
        {C::Readability, "Based on the Gunning Fog Index, is this text suitable for middle school readers?"},
        {C::Readability, "Based on the Gunning Fog Index, is this text suitable for high school readers?"},
        {C::Readability, "Based on the Coleman-Liau Index, is this text suitable for elementary school readers?"},
        {C::Readability, "Based on the Coleman-Liau Index, is this text suitable for middle school readers?"},
        {C::Readability, "Based on the Coleman-Liau Index, is this text suitable for high school readers?"},
        {C::Readability, "Based on the Automated Readability Index (ARI), is this text suitable for elementary school readers?"},
        {C::Readability, "Based on the Automated Readability Index (ARI), is this text suitable for middle school readers?"},
        {C::Readability, "Based on the Automated Readability Index (ARI), is this text suitable for high school readers?"},
        {C::Readability, "Based on the SMOG Index, is this text suitable for elementary school readers?"},
        {C::Readability, "Based on the SMOG Index, is this text suitable for middle school readers?"},
        {C::Readability, "Based on the SMOG Index, is this text suitable for high school readers?"},
        {C::Complexity, "Does this text contain basic concepts that are easy to comprehend?"},
        {C::Complexity, "Does this text cover multiple concepts?"},
        {C::Complexity, "Does this text provide a very explicit explanation?"},
        {C::Complexity, "Does this text contain simple examples?"},
    };
    std::vector<PromptTemplate> out;
    int i = 0;
    for (const Row& row : rows) {
      ++i;
      char id[8];
      std::snprintf(id, sizeof(id), "pm_%02d", i);
      out.push_back({id, row.category, row.text});
    }
    return out;
  }();
  return templates;
}

inline constexpr int kPromptMetricCount = 63;

/// Exactly 63 templates with category sizes 30/8/10/15 and unique ids.
inline void validate_templates(const std::vector<PromptTemplate>& templates) {
  if (templates.size() != kPromptMetricCount)
    throw FormatError("expected 63 prompt templates, got " +
                      std::to_string(templates.size()));
  int edu = 0, cx = 0, topic = 0, read = 0;
  std::set<std::string> ids;
  for (const auto& t : templates) {
    switch (t.category) {
      case PromptTemplate::Category::EducationLevel: ++edu; break;
      case PromptTemplate::Category::Complexity: ++cx; break;
      case PromptTemplate::Category::Topic: ++topic; break;
      case PromptTemplate::Category::Readability: ++read; break;
    }
    if (!ids.insert(t.id).second)
      throw FormatError("duplicate template id: " + t.id);
  }
  if (edu != 30 || cx != 8 || topic != 10 || read != 15)
    throw FormatError("template category sizes must be 30/8/10/15, got " +
                      std::to_string(edu) + "/" + std::to_string(cx) + "/" +
                      std::to_string(topic) + "/" + std::to_string(read));
}

inline std::vector<PromptTemplate> load_prompt_templates(
    const std::filesystem::path& path) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("cannot parse templates " + path.string() + ": " +
                      e.what());
  }
  std::vector<PromptTemplate> out;
  for (const auto& j : root) {
    PromptTemplate t;
    t.id = j.at("id").get<std::string>();
    auto cat = prompt_category_from_string(j.at("category").get<std::string>());
    if (!cat)
      throw FormatError("templates " + path.string() + ": unknown category for " +
                        t.id);
    t.category = *cat;
    t.text = j.at("text").get<std::string>();
    out.push_back(std::move(t));
  }
  return out;
}

inline nlohmann::ordered_json templates_to_json(
    const std::vector<PromptTemplate>& templates) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& t : templates) {
    arr.push_back({{"id", t.id},
                   {"category", to_string(t.category)},
                   {"text", t.text}});
  }
  return arr;
}

/// Metric question, the document text, and an explicit answer instruction.
/// The wrapper is a documented choice; the question line is verbatim.
inline std::string render_prompt(const PromptTemplate& tmpl,
                                 const EduDocument& doc) {
  std::string out = tmpl.text;
  out += '\n';
  out += "Text: ";
  out += doc.full_text();
  out += '\n';
  out += "Answer yes or no.";
  return out;
}

struct PromptMetricVector {
  std::vector<double> values;  // one per template, in template order
  int na_count = 0;
};

/// All 63 metrics for one document: yes→1.0, no→0.0, unparseable→0.5.
/// Issues requests in template order with up to max_parallel in flight;
/// aggregation is keyed by template index so completion order cannot change
/// the result. Any transport error aborts the document; answers fetched
/// before the failure stay cached.
inline PromptMetricVector compute_prompt_vector(
    const EduDocument& doc, const LlmConfig& cfg,
    const std::vector<PromptTemplate>& templates, ResponseCache& cache) {
  if (templates.size() != kPromptMetricCount)
    throw FormatError("compute_prompt_vector requires all 63 templates");
  const std::string full_text = doc.full_text();
  const LlmClient client(cfg);

  std::vector<double> values(templates.size(), 0.5);
  std::vector<int> na_flags(templates.size(), 0);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::size_t first_error_index = templates.size();

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= templates.size()) return;
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error) return;  // drain once a request failed
      }
      try {
        const std::string prompt = render_prompt(templates[i], doc);
        const std::string key =
            ResponseCache::make_key(cfg.model_name, templates[i].id, full_text);
        const std::string response = client.complete(prompt, key, cache);
        switch (parse_yes_no(response)) {
          case Parsed::Yes: values[i] = 1.0; break;
          case Parsed::No: values[i] = 0.0; break;
          case Parsed::Na: values[i] = 0.5; na_flags[i] = 1; break;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (i < first_error_index) {
          first_error = std::current_exception();
          first_error_index = i;
        }
        return;
      }
    }
  };

  const int n_threads =
      std::max(1, std::min<int>(cfg.max_parallel,
                                static_cast<int>(templates.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  PromptMetricVector out;
  out.values = std::move(values);
  for (int flag : na_flags) out.na_count += flag;
  return out;
}

/// Request-planning arithmetic: documents × templates.
inline long long planned_prompt_count(long long documents,
                                      long long templates = kPromptMetricCount) {
  return documents * templates;
}

}  // namespace edulevel
