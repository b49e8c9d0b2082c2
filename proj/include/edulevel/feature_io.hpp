#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "edulevel/classifier.hpp"
#include "edulevel/text_utils.hpp"
#include "edulevel/types.hpp"

namespace edulevel {

/// Feature CSV layout: doc_id, level, then one column per feature name.
/// Values use 12 significant digits. Fields must not contain commas; doc ids
/// and feature names are plain identifiers by construction.
inline std::string feature_table_to_csv(const DesignMatrix& m) {
  std::string out = "doc_id,level";
  for (const std::string& name : m.feature_names) out += "," + name;
  out += '\n';
  for (int i = 0; i < m.n(); ++i) {
    out += m.doc_ids.empty() ? std::string("row") + std::to_string(i)
                             : m.doc_ids[i];
    out += ',';
    out += to_string(m.labels[i]);
    for (double v : m.rows[i]) {
      out += ',';
      out += format_real(v);
    }
    out += '\n';
  }
  return out;
}

inline void write_feature_csv(const std::filesystem::path& path,
                              const DesignMatrix& m) {
  write_file(path, feature_table_to_csv(m));
}

inline DesignMatrix read_feature_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line))
    throw FormatError("feature csv " + path.string() + ": empty file");
  auto header = split_on(trim(line), ',');
  if (header.size() < 3 || header[0] != "doc_id" || header[1] != "level")
    throw FormatError("feature csv " + path.string() +
                      ": header must start with doc_id,level");
  DesignMatrix m;
  m.feature_names.assign(header.begin() + 2, header.end());
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cols = split_on(trim(line), ',');
    if (cols.size() != header.size())
      throw FormatError("feature csv " + path.string() + " line " +
                        std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " columns, got " +
                        std::to_string(cols.size()));
    auto level = level_from_string(cols[1]);
    if (!level)
      throw FormatError("feature csv " + path.string() + " line " +
                        std::to_string(line_no) + ": unknown level " + cols[1]);
    std::vector<double> row;
    row.reserve(cols.size() - 2);
    for (std::size_t j = 2; j < cols.size(); ++j) {
      try {
        row.push_back(std::stod(cols[j]));
      } catch (const std::exception&) {
        throw FormatError("feature csv " + path.string() + " line " +
                          std::to_string(line_no) + ": bad number \"" +
                          cols[j] + "\"");
      }
    }
    m.doc_ids.push_back(cols[0]);
    m.labels.push_back(*level);
    m.rows.push_back(std::move(row));
  }
  return m;
}

/// Column-wise join of two tables over identical doc_id order.
inline DesignMatrix merge_feature_tables(const DesignMatrix& left,
                                         const DesignMatrix& right) {
  if (left.n() != right.n())
    throw ShapeError("cannot merge feature tables of different sizes");
  std::unordered_map<std::string, int> right_index;
  for (int i = 0; i < right.n(); ++i) right_index[right.doc_ids[i]] = i;

  DesignMatrix out;
  out.feature_names = left.feature_names;
  out.feature_names.insert(out.feature_names.end(),
                           right.feature_names.begin(),
                           right.feature_names.end());
  out.doc_ids = left.doc_ids;
  out.labels = left.labels;
  out.rows.reserve(left.n());
  for (int i = 0; i < left.n(); ++i) {
    auto it = right_index.find(left.doc_ids[i]);
    if (it == right_index.end())
      throw ShapeError("doc_id " + left.doc_ids[i] +
                       " missing from second feature table");
    std::vector<double> row = left.rows[i];
    const auto& extra = right.rows[it->second];
    row.insert(row.end(), extra.begin(), extra.end());
    out.rows.push_back(std::move(row));
  }
  return out;
}

/// Row filter by doc_id set, preserving table order.
inline DesignMatrix filter_rows(const DesignMatrix& m,
                                const std::set<std::string>& ids) {
  DesignMatrix out;
  out.feature_names = m.feature_names;
  for (int i = 0; i < m.n(); ++i) {
    if (!ids.count(m.doc_ids[i])) continue;
    out.doc_ids.push_back(m.doc_ids[i]);
    out.labels.push_back(m.labels[i]);
    out.rows.push_back(m.rows[i]);
  }
  return out;
}

}  // namespace edulevel
