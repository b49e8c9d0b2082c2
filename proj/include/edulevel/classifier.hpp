#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "edulevel/text_utils.hpp"
#include "edulevel/types.hpp"

namespace edulevel {

inline constexpr int kNumClasses = 3;

/// Rows of features plus labels. Feature names are unique; labels parallel
/// the rows.
struct DesignMatrix {
  std::vector<std::string> feature_names;
  std::vector<std::string> doc_ids;        // optional, parallel to rows
  std::vector<std::vector<double>> rows;
  std::vector<Level> labels;

  int n() const { return static_cast<int>(rows.size()); }
  int cols() const { return static_cast<int>(feature_names.size()); }

  /// Column filter by name; order follows the requested list.
  DesignMatrix select(const std::vector<std::string>& names) const {
    std::unordered_map<std::string, int> index;
    for (int j = 0; j < cols(); ++j) index[feature_names[j]] = j;
    std::vector<int> picks;
    picks.reserve(names.size());
    for (const std::string& name : names) {
      auto it = index.find(name);
      if (it == index.end())
        throw ShapeError("unknown feature: " + name);
      picks.push_back(it->second);
    }
    DesignMatrix out;
    out.feature_names = names;
    out.doc_ids = doc_ids;
    out.labels = labels;
    out.rows.reserve(rows.size());
    for (const auto& row : rows) {
      std::vector<double> r;
      r.reserve(picks.size());
      for (int j : picks) r.push_back(row[j]);
      out.rows.push_back(std::move(r));
    }
    return out;
  }

  std::vector<double> column(int j) const {
    std::vector<double> col;
    col.reserve(rows.size());
    for (const auto& row : rows) col.push_back(row[j]);
    return col;
  }
};

struct Hyperparams {
  double l2_lambda = -1.0;  // < 0 means "auto": 1/n at train time
  int max_iters = 500;
  double tolerance = 1e-6;
  std::uint64_t seed = 0;
};

/// Standardization parameters plus the 3×(d+1) weight matrix (bias first).
struct DifficultyModel {
  std::vector<std::string> feature_names;
  std::vector<double> means;
  std::vector<double> stds;
  std::vector<bool> constant_cols;
  std::vector<double> weights;  // row-major, kNumClasses rows, d+1 cols
  Hyperparams hyperparams;
  double final_loss = 0.0;
  int iterations = 0;

  int dim() const { return static_cast<int>(feature_names.size()); }
  double weight(int k, int j) const { return weights[k * (dim() + 1) + j]; }
};

struct EvalReport {
  std::array<std::array<int, kNumClasses>, kNumClasses> confusion{};  // [true][pred]
  std::array<double, kNumClasses> precision{};
  std::array<double, kNumClasses> recall{};
  std::array<double, kNumClasses> f1{};
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  int n = 0;
  double invalid_rate = 0.0;  // used by the LLM baselines
};

// ---------------------------------------------------------------------------
// Standardization
// ---------------------------------------------------------------------------

struct Standardization {
  std::vector<double> means;
  std::vector<double> stds;
  std::vector<bool> constant;
};

/// Population std per column; constant columns pass through with std 1.
inline Standardization fit_standardization(const DesignMatrix& m) {
  Standardization s;
  const int d = m.cols();
  const int n = m.n();
  s.means.assign(d, 0.0);
  s.stds.assign(d, 1.0);
  s.constant.assign(d, false);
  if (n == 0) return s;
  for (int j = 0; j < d; ++j) {
    double mean = 0.0;
    for (const auto& row : m.rows) mean += row[j];
    mean /= n;
    double var = 0.0;
    for (const auto& row : m.rows) var += (row[j] - mean) * (row[j] - mean);
    var /= n;
    s.means[j] = mean;
    const double sd = std::sqrt(var);
    if (sd > 0.0) {
      s.stds[j] = sd;
    } else {
      s.stds[j] = 1.0;
      s.constant[j] = true;
    }
  }
  return s;
}

inline DesignMatrix standardize(const DesignMatrix& m,
                                const Standardization& s) {
  DesignMatrix out = m;
  for (auto& row : out.rows)
    for (int j = 0; j < m.cols(); ++j)
      row[j] = (row[j] - s.means[j]) / s.stds[j];
  return out;
}

inline std::pair<DesignMatrix, Standardization> standardize(
    const DesignMatrix& m) {
  Standardization s = fit_standardization(m);
  return {standardize(m, s), s};
}

// ---------------------------------------------------------------------------
// Softmax regression
// ---------------------------------------------------------------------------
namespace detail {

inline std::array<double, kNumClasses> softmax(
    const std::array<double, kNumClasses>& scores) {
  const double m = std::max({scores[0], scores[1], scores[2]});
  std::array<double, kNumClasses> p{};
  double z = 0.0;
  for (int k = 0; k < kNumClasses; ++k) {
    p[k] = std::exp(scores[k] - m);
    z += p[k];
  }
  for (int k = 0; k < kNumClasses; ++k) p[k] /= z;
  return p;
}

/// Mean cross-entropy of softmax(W·[1;x]) plus l2·‖W without bias‖².
/// X rows are standardized features (no bias column); W is 3×(d+1).
struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

inline double softmax_loss(const std::vector<std::vector<double>>& X,
                           const std::vector<Level>& y,
                           const std::vector<double>& W, int d, double l2) {
  const int n = static_cast<int>(X.size());
  const int stride = d + 1;
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    std::array<double, kNumClasses> scores{};
    for (int k = 0; k < kNumClasses; ++k) {
      double s = W[k * stride];
      const auto& row = X[i];
      for (int j = 0; j < d; ++j) s += W[k * stride + 1 + j] * row[j];
      scores[k] = s;
    }
    const double m = std::max({scores[0], scores[1], scores[2]});
    double z = 0.0;
    for (int k = 0; k < kNumClasses; ++k) z += std::exp(scores[k] - m);
    loss += -(scores[static_cast<int>(y[i])] - m - std::log(z));
  }
  loss /= n;
  double reg = 0.0;
  for (int k = 0; k < kNumClasses; ++k)
    for (int j = 1; j <= d; ++j) reg += W[k * stride + j] * W[k * stride + j];
  return loss + l2 * reg;
}

inline LossGrad softmax_loss_grad(const std::vector<std::vector<double>>& X,
                                  const std::vector<Level>& y,
                                  const std::vector<double>& W, int d,
                                  double l2) {
  const int n = static_cast<int>(X.size());
  const int stride = d + 1;
  LossGrad out;
  out.grad.assign(W.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    std::array<double, kNumClasses> scores{};
    for (int k = 0; k < kNumClasses; ++k) {
      double s = W[k * stride];
      const auto& row = X[i];
      for (int j = 0; j < d; ++j) s += W[k * stride + 1 + j] * row[j];
      scores[k] = s;
    }
    const auto p = softmax(scores);
    const double m = std::max({scores[0], scores[1], scores[2]});
    double z = 0.0;
    for (int k = 0; k < kNumClasses; ++k) z += std::exp(scores[k] - m);
    out.loss += -(scores[static_cast<int>(y[i])] - m - std::log(z));
    for (int k = 0; k < kNumClasses; ++k) {
      const double delta = p[k] - (static_cast<int>(y[i]) == k ? 1.0 : 0.0);
      out.grad[k * stride] += delta;
      const auto& row = X[i];
      for (int j = 0; j < d; ++j) out.grad[k * stride + 1 + j] += delta * row[j];
    }
  }
  out.loss /= n;
  for (double& g : out.grad) g /= n;
  double reg = 0.0;
  for (int k = 0; k < kNumClasses; ++k) {
    for (int j = 1; j <= d; ++j) {
      reg += W[k * stride + j] * W[k * stride + j];
      out.grad[k * stride + j] += 2.0 * l2 * W[k * stride + j];
    }
  }
  out.loss += l2 * reg;
  return out;
}

}  // namespace detail

/// Full-batch gradient descent with Armijo backtracking; deterministic
/// (zero-initialized weights). Stops when the gradient max-norm drops below
/// tolerance or max_iters is reached. loss_trace, when given, records the
/// regularized loss after every accepted step.
inline DifficultyModel train(const DesignMatrix& matrix,
                             const Hyperparams& hp = {},
                             std::vector<double>* loss_trace = nullptr) {
  const int n = matrix.n();
  const int d = matrix.cols();
  if (n < kNumClasses)
    throw DegenerateInputError("need at least 3 training rows");
  std::array<bool, kNumClasses> present{};
  for (Level lv : matrix.labels) present[static_cast<int>(lv)] = true;
  for (int k = 0; k < kNumClasses; ++k)
    if (!present[k])
      throw DegenerateInputError(std::string("class absent from labels: ") +
                                 to_string(static_cast<Level>(k)));

  DifficultyModel model;
  model.feature_names = matrix.feature_names;
  model.hyperparams = hp;
  if (model.hyperparams.l2_lambda < 0.0)
    model.hyperparams.l2_lambda = 1.0 / static_cast<double>(n);
  const double l2 = model.hyperparams.l2_lambda;

  const Standardization st = fit_standardization(matrix);
  model.means = st.means;
  model.stds = st.stds;
  model.constant_cols = st.constant;
  const DesignMatrix Xs = standardize(matrix, st);

  const int stride = d + 1;
  std::vector<double> W(kNumClasses * stride, 0.0);
  auto lg = detail::softmax_loss_grad(Xs.rows, matrix.labels, W, d, l2);
  if (loss_trace) loss_trace->push_back(lg.loss);

  constexpr double kArmijo = 1e-4;
  int iter = 0;
  for (; iter < model.hyperparams.max_iters; ++iter) {
    double gmax = 0.0;
    for (double g : lg.grad) gmax = std::max(gmax, std::fabs(g));
    if (gmax < model.hyperparams.tolerance) break;

    double g2 = 0.0;
    for (double g : lg.grad) g2 += g * g;

    double step = 1.0;
    std::vector<double> Wnext(W.size());
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving) {
      for (std::size_t t = 0; t < W.size(); ++t)
        Wnext[t] = W[t] - step * lg.grad[t];
      const double next_loss =
          detail::softmax_loss(Xs.rows, matrix.labels, Wnext, d, l2);
      if (next_loss <= lg.loss - kArmijo * step * g2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no descent step found: converged numerically
    W.swap(Wnext);
    lg = detail::softmax_loss_grad(Xs.rows, matrix.labels, W, d, l2);
    if (loss_trace) loss_trace->push_back(lg.loss);
  }
  model.weights = std::move(W);
  model.final_loss = lg.loss;
  model.iterations = iter;
  return model;
}

inline std::array<double, kNumClasses> predict_proba(
    const DifficultyModel& model, const std::vector<double>& x) {
  const int d = model.dim();
  if (static_cast<int>(x.size()) != d)
    throw ShapeError("feature vector has " + std::to_string(x.size()) +
                     " entries, model expects " + std::to_string(d));
  const int stride = d + 1;
  std::array<double, kNumClasses> scores{};
  for (int k = 0; k < kNumClasses; ++k) {
    double s = model.weights[k * stride];
    for (int j = 0; j < d; ++j) {
      const double z = (x[j] - model.means[j]) / model.stds[j];
      s += model.weights[k * stride + 1 + j] * z;
    }
    scores[k] = s;
  }
  return detail::softmax(scores);
}

/// Argmax with ties broken toward the lowest ordinal (Elementary).
inline Level predict(const DifficultyModel& model,
                     const std::vector<double>& x) {
  const auto p = predict_proba(model, x);
  int best = 0;
  for (int k = 1; k < kNumClasses; ++k)
    if (p[k] > p[best]) best = k;
  return static_cast<Level>(best);
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

inline EvalReport evaluate_predictions(const std::vector<Level>& y_true,
                                       const std::vector<Level>& y_pred) {
  if (y_true.size() != y_pred.size())
    throw ShapeError("evaluate: label/prediction length mismatch");
  EvalReport r;
  r.n = static_cast<int>(y_true.size());
  for (std::size_t i = 0; i < y_true.size(); ++i)
    ++r.confusion[static_cast<int>(y_true[i])][static_cast<int>(y_pred[i])];

  int correct = 0;
  double f1_sum = 0.0;
  for (int k = 0; k < kNumClasses; ++k) {
    int tp = r.confusion[k][k];
    int fp = 0, fn = 0;
    for (int j = 0; j < kNumClasses; ++j) {
      if (j != k) {
        fp += r.confusion[j][k];
        fn += r.confusion[k][j];
      }
    }
    correct += tp;
    r.precision[k] = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    r.recall[k] = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    r.f1[k] = (r.precision[k] + r.recall[k]) > 0.0
                  ? 2.0 * r.precision[k] * r.recall[k] /
                        (r.precision[k] + r.recall[k])
                  : 0.0;
    f1_sum += r.f1[k];
  }
  r.macro_f1 = f1_sum / kNumClasses;
  r.accuracy = r.n > 0 ? static_cast<double>(correct) / r.n : 0.0;
  return r;
}

inline EvalReport evaluate(const DifficultyModel& model,
                           const DesignMatrix& test) {
  std::vector<Level> preds;
  preds.reserve(test.rows.size());
  for (const auto& row : test.rows) preds.push_back(predict(model, row));
  return evaluate_predictions(test.labels, preds);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json model_to_json(const DifficultyModel& m) {
  nlohmann::ordered_json j;
  j["feature_names"] = m.feature_names;
  j["means"] = m.means;
  j["stds"] = m.stds;
  j["constant_cols"] = std::vector<int>(m.constant_cols.begin(),
                                        m.constant_cols.end());
  j["weights"] = m.weights;
  j["hyperparams"] = {{"l2_lambda", m.hyperparams.l2_lambda},
                      {"max_iters", m.hyperparams.max_iters},
                      {"tolerance", m.hyperparams.tolerance},
                      {"seed", m.hyperparams.seed}};
  j["metadata"] = {{"final_loss", m.final_loss},
                   {"iterations", m.iterations},
                   {"classes", {"elementary", "middle", "high"}}};
  return j;
}

inline DifficultyModel model_from_json(const nlohmann::json& j) {
  DifficultyModel m;
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  m.means = j.at("means").get<std::vector<double>>();
  m.stds = j.at("stds").get<std::vector<double>>();
  for (int c : j.at("constant_cols").get<std::vector<int>>())
    m.constant_cols.push_back(c != 0);
  m.weights = j.at("weights").get<std::vector<double>>();
  const auto& hp = j.at("hyperparams");
  m.hyperparams.l2_lambda = hp.at("l2_lambda").get<double>();
  m.hyperparams.max_iters = hp.at("max_iters").get<int>();
  m.hyperparams.tolerance = hp.at("tolerance").get<double>();
  m.hyperparams.seed = hp.at("seed").get<std::uint64_t>();
  if (j.contains("metadata")) {
    m.final_loss = j.at("metadata").value("final_loss", 0.0);
    m.iterations = j.at("metadata").value("iterations", 0);
  }
  const std::size_t expect =
      static_cast<std::size_t>(kNumClasses) * (m.feature_names.size() + 1);
  if (m.weights.size() != expect)
    throw FormatError("model file: weight matrix has wrong shape");
  return m;
}

inline void save_model(const std::filesystem::path& path,
                       const DifficultyModel& m) {
  write_file(path, model_to_json(m).dump(2) + "\n");
}

inline DifficultyModel load_model(const std::filesystem::path& path) {
  try {
    return model_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("cannot parse model " + path.string() + ": " + e.what());
  }
}

inline nlohmann::ordered_json report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["confusion"] = r.confusion;
  nlohmann::ordered_json per_class;
  for (int k = 0; k < kNumClasses; ++k) {
    per_class[to_string(static_cast<Level>(k))] = {{"precision", r.precision[k]},
                                                   {"recall", r.recall[k]},
                                                   {"f1", r.f1[k]}};
  }
  j["per_class"] = per_class;
  j["macro_f1"] = r.macro_f1;
  j["accuracy"] = r.accuracy;
  j["invalid_rate"] = r.invalid_rate;
  return j;
}

/// Text rendering in the shape of the per-level results tables:
/// level rows with precision / recall / F1, then the macro line.
inline std::string render_eval_table(const EvalReport& r,
                                     const std::string& title = {}) {
  char buf[160];
  std::string out;
  if (!title.empty()) out += title + "\n";
  out += "Level        Precision   Recall   F1-Score\n";
  static const char* kNames[kNumClasses] = {"Elementary", "Middle", "High"};
  for (int k = 0; k < kNumClasses; ++k) {
    std::snprintf(buf, sizeof(buf), "%-12s      %4.2f     %4.2f       %4.2f\n",
                  kNames[k], r.precision[k], r.recall[k], r.f1[k]);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf),
                "Macro-F1 %.4f  Accuracy %.4f  (n=%d)\n", r.macro_f1,
                r.accuracy, r.n);
  out += buf;
  return out;
}

}  // namespace edulevel
