#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "edulevel/prng.hpp"
#include "edulevel/text_utils.hpp"
#include "edulevel/types.hpp"

namespace edulevel {

/// One raw ScienceQA problem, before filtering.
struct RawItem {
  std::string id;
  std::string question;
  std::vector<std::string> choices;
  int answer = -1;
  std::string solution;
  std::string lecture;
  int grade = 0;  // 1..12
  bool has_image = false;
};

struct SplitSpec {
  std::uint64_t seed = 0;
  int per_class = 1516;
  double train_fraction = 0.8;
  bool stratify = true;
};

inline Level collapse_grade(int grade) {
  if (grade >= 1 && grade <= 5) return Level::Elementary;
  if (grade >= 6 && grade <= 8) return Level::Middle;
  if (grade >= 9 && grade <= 12) return Level::High;
  throw DomainError("grade out of range 1..12: " + std::to_string(grade));
}

namespace detail {

inline int parse_grade(const std::string& s, const std::string& id) {
  // "grade1".."grade12"
  constexpr std::string_view kPrefix = "grade";
  if (s.size() <= kPrefix.size() || s.compare(0, kPrefix.size(), kPrefix) != 0)
    throw FormatError("record " + id + ": bad grade string \"" + s + "\"");
  int g = 0;
  for (std::size_t i = kPrefix.size(); i < s.size(); ++i) {
    if (!is_ascii_digit(static_cast<unsigned char>(s[i])))
      throw FormatError("record " + id + ": bad grade string \"" + s + "\"");
    g = g * 10 + (s[i] - '0');
  }
  return g;
}

}  // namespace detail

/// ScienceQA problems JSON: one object keyed by problem id. A directory is
/// accepted too and resolves to problems.json inside it.
inline std::vector<RawItem> load_scienceqa(const std::filesystem::path& path) {
  std::filesystem::path file = path;
  if (std::filesystem::is_directory(file)) file /= "problems.json";
  nlohmann::ordered_json root;
  try {
    root = nlohmann::ordered_json::parse(read_file(file));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("cannot parse " + file.string() + ": " + e.what());
  }
  if (!root.is_object())
    throw FormatError(file.string() + ": expected an object keyed by id");

  std::vector<RawItem> items;
  items.reserve(root.size());
  for (const auto& [id, problem] : root.items()) {
    try {
      RawItem item;
      item.id = id;
      item.question = problem.at("question").get<std::string>();
      if (problem.contains("choices"))
        for (const auto& c : problem.at("choices"))
          item.choices.push_back(c.get<std::string>());
      if (problem.contains("answer") && problem.at("answer").is_number())
        item.answer = problem.at("answer").get<int>();
      item.solution = problem.value("solution", std::string{});
      item.lecture = problem.value("lecture", std::string{});
      item.grade = detail::parse_grade(
          problem.at("grade").get<std::string>(), id);
      item.has_image =
          problem.contains("image") && !problem.at("image").is_null();
      items.push_back(std::move(item));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("record " + id + ": " + e.what());
    }
  }
  return items;
}

inline EduDocument to_document(const RawItem& item) {
  EduDocument doc;
  doc.doc_id = item.id;
  doc.question = item.question;
  doc.choices = item.choices;
  doc.solution = item.solution;
  doc.lecture = item.lecture;
  doc.level = collapse_grade(item.grade);
  return doc;
}

/// Drop image items, deduplicate on normalized full text, then draw exactly
/// per_class documents per level with a seeded shuffle. The output order is
/// itself shuffled once and then fixed.
inline std::vector<EduDocument> build_balanced_dataset(
    const std::vector<RawItem>& items, const SplitSpec& spec) {
  std::unordered_set<std::string> seen_text;
  std::array<std::vector<EduDocument>, 3> by_level;
  for (const RawItem& item : items) {
    if (item.has_image) continue;
    EduDocument doc = to_document(item);
    if (!seen_text.insert(normalize_text(doc.full_text())).second) continue;
    by_level[static_cast<int>(*doc.level)].push_back(std::move(doc));
  }

  std::vector<EduDocument> out;
  for (Level level : kAllLevels) {
    auto& pool = by_level[static_cast<int>(level)];
    if (static_cast<int>(pool.size()) < spec.per_class)
      throw CapacityError(std::string("class ") + to_string(level) + " has " +
                          std::to_string(pool.size()) +
                          " usable documents, need " +
                          std::to_string(spec.per_class));
    SplitMix64 rng(derive_seed(spec.seed,
                               std::string("balance.") + to_string(level)));
    seeded_shuffle(pool, rng);
    for (int i = 0; i < spec.per_class; ++i) out.push_back(std::move(pool[i]));
  }
  SplitMix64 rng(derive_seed(spec.seed, "balance.order"));
  seeded_shuffle(out, rng);
  return out;
}

/// Stratified 80/20 (by default). Per-level train sizes are assigned by
/// largest remainder against the global floor(train_fraction * n) target, so
/// the overall counts match the non-stratified split exactly.
inline std::pair<std::vector<EduDocument>, std::vector<EduDocument>>
split_train_test(const std::vector<EduDocument>& docs, const SplitSpec& spec) {
  if (docs.empty()) return {};
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw DomainError("train_fraction must be in (0, 1)");

  std::vector<EduDocument> train, test;
  if (!spec.stratify) {
    std::vector<EduDocument> pool = docs;
    SplitMix64 rng(derive_seed(spec.seed, "split.all"));
    seeded_shuffle(pool, rng);
    const auto n_train = static_cast<std::size_t>(
        std::floor(spec.train_fraction * static_cast<double>(pool.size())));
    train.assign(pool.begin(), pool.begin() + static_cast<long>(n_train));
    test.assign(pool.begin() + static_cast<long>(n_train), pool.end());
    return {train, test};
  }

  std::array<std::vector<EduDocument>, 3> by_level;
  for (const EduDocument& doc : docs) {
    if (!doc.level) throw DomainError("document " + doc.doc_id + " has no label");
    by_level[static_cast<int>(*doc.level)].push_back(doc);
  }

  const auto global_target = static_cast<long>(
      std::floor(spec.train_fraction * static_cast<double>(docs.size())));
  std::array<long, 3> take{};
  std::array<double, 3> remainder{};
  long assigned = 0;
  for (int k = 0; k < 3; ++k) {
    const double exact =
        spec.train_fraction * static_cast<double>(by_level[k].size());
    take[k] = static_cast<long>(std::floor(exact));
    remainder[k] = exact - static_cast<double>(take[k]);
    assigned += take[k];
  }
  // hand out leftover seats by largest remainder, ties by level ordinal
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return remainder[a] > remainder[b];
  });
  for (int idx : order) {
    if (assigned >= global_target) break;
    if (take[idx] < static_cast<long>(by_level[idx].size())) {
      ++take[idx];
      ++assigned;
    }
  }

  for (Level level : kAllLevels) {
    const int k = static_cast<int>(level);
    auto& pool = by_level[k];
    SplitMix64 rng(derive_seed(spec.seed,
                               std::string("split.") + to_string(level)));
    seeded_shuffle(pool, rng);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (static_cast<long>(i) < take[k]) train.push_back(std::move(pool[i]));
      else test.push_back(std::move(pool[i]));
    }
  }
  return {train, test};
}

// ---------------------------------------------------------------------------
// Manifest + documents files
// ---------------------------------------------------------------------------

inline void write_manifest_csv(
    const std::filesystem::path& path, const std::vector<EduDocument>& train,
    const std::vector<EduDocument>& test) {
  std::string out = "doc_id,level,split\n";
  for (const EduDocument& d : train)
    out += d.doc_id + "," + to_string(*d.level) + ",train\n";
  for (const EduDocument& d : test)
    out += d.doc_id + "," + to_string(*d.level) + ",test\n";
  write_file(path, out);
}

/// map doc_id → split name ("train"/"test"), in file order.
inline std::vector<std::tuple<std::string, Level, std::string>>
read_manifest_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::vector<std::tuple<std::string, Level, std::string>> rows;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || trim(line).empty()) continue;  // header
    auto cols = split_on(trim(line), ',');
    if (cols.size() != 3)
      throw FormatError("manifest " + path.string() + " line " +
                        std::to_string(line_no) + ": expected 3 columns");
    auto level = level_from_string(cols[1]);
    if (!level)
      throw FormatError("manifest " + path.string() + " line " +
                        std::to_string(line_no) + ": unknown level " + cols[1]);
    rows.emplace_back(cols[0], *level, cols[2]);
  }
  return rows;
}

inline nlohmann::ordered_json document_to_json(const EduDocument& doc) {
  nlohmann::ordered_json j;
  j["doc_id"] = doc.doc_id;
  j["question"] = doc.question;
  j["choices"] = doc.choices;
  j["solution"] = doc.solution;
  j["lecture"] = doc.lecture;
  if (doc.level) j["level"] = to_string(*doc.level);
  return j;
}

inline void write_documents_jsonl(const std::filesystem::path& path,
                                  const std::vector<EduDocument>& docs) {
  std::string out;
  for (const EduDocument& doc : docs) {
    out += document_to_json(doc).dump();
    out += '\n';
  }
  write_file(path, out);
}

inline std::vector<EduDocument> read_documents_jsonl(
    const std::filesystem::path& path) {
  std::vector<EduDocument> docs;
  std::istringstream in(read_file(path));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("documents " + path.string() + " line " +
                        std::to_string(line_no) + ": " + e.what());
    }
    EduDocument doc;
    doc.doc_id = j.at("doc_id").get<std::string>();
    doc.question = j.at("question").get<std::string>();
    for (const auto& c : j.at("choices")) doc.choices.push_back(c.get<std::string>());
    doc.solution = j.value("solution", std::string{});
    doc.lecture = j.value("lecture", std::string{});
    if (j.contains("level")) {
      auto level = level_from_string(j.at("level").get<std::string>());
      if (!level)
        throw FormatError("documents " + path.string() + " line " +
                          std::to_string(line_no) + ": unknown level");
      doc.level = level;
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace edulevel
