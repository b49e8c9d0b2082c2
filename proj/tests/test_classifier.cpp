#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "edulevel/classifier.hpp"
#include "edulevel/prng.hpp"
#include "support/synthetic.hpp"

using namespace edulevel;
using namespace edulevel::testing;

namespace {

/// Independent brute-force: best binary cross-entropy achievable by a
/// one-feature "Elementary vs rest" logistic model, over a coarse (a, b)
/// grid. Used to identify the most informative single feature.
double best_binary_ce_1d(const DesignMatrix& m, int feature) {
  double best = 1e18;
  for (double a = -8.0; a <= 8.0; a += 0.25) {
    for (double b = -8.0; b <= 8.0; b += 0.25) {
      double ce = 0.0;
      for (int i = 0; i < m.n(); ++i) {
        const double z = a + b * m.rows[i][feature];
        const double p = 1.0 / (1.0 + std::exp(-z));
        const double clamped = std::min(1.0 - 1e-12, std::max(1e-12, p));
        const bool is_elem = m.labels[i] == Level::Elementary;
        ce += is_elem ? -std::log(clamped) : -std::log(1.0 - clamped);
      }
      best = std::min(best, ce / m.n());
    }
  }
  return best;
}

}  // namespace

TEST_CASE("standardize examples") {
  DesignMatrix m;
  m.feature_names = {"c", "s"};
  m.rows = {{1.0, 0.0}, {1.0, 2.0}, {1.0, 1.0}};
  m.labels = {Level::Elementary, Level::Middle, Level::High};
  auto [scaled, st] = standardize(m);
  CHECK(st.constant[0]);
  CHECK_FALSE(st.constant[1]);
  CHECK(st.stds[0] == 1.0);
  for (int i = 0; i < 3; ++i) CHECK(scaled.rows[i][0] == 0.0);

  DesignMatrix two;
  two.feature_names = {"x"};
  two.rows = {{0.0}, {2.0}};
  two.labels = {Level::Elementary, Level::Middle};
  auto [sc2, st2] = standardize(two);
  CHECK(sc2.rows[0][0] == doctest::Approx(-1.0));
  CHECK(sc2.rows[1][0] == doctest::Approx(1.0));
}

TEST_CASE("standardized columns have mean 0 and std 1") {
  SplitMix64 rng(4);
  DesignMatrix m;
  m.feature_names = {"a", "b", "c"};
  for (int i = 0; i < 50; ++i) {
    m.rows.push_back({rng.next_gaussian() * 3 + 1, rng.next_unit() * 10,
                      rng.next_gaussian()});
    m.labels.push_back(static_cast<Level>(i % 3));
  }
  auto [scaled, st] = standardize(m);
  for (int j = 0; j < 3; ++j) {
    double mean = 0;
    for (const auto& row : scaled.rows) mean += row[j];
    mean /= scaled.n();
    double var = 0;
    for (const auto& row : scaled.rows) var += (row[j] - mean) * (row[j] - mean);
    var /= scaled.n();
    CHECK(std::fabs(mean) <= 1e-12);
    CHECK(std::fabs(std::sqrt(var) - 1.0) <= 1e-12);
  }
}

TEST_CASE("analytic gradient matches central finite differences") {
  SplitMix64 rng(2024);
  int checked = 0;
  for (int problem = 0; problem < 50; ++problem) {
    const int n = 20, d = 5;
    std::vector<std::vector<double>> X(n, std::vector<double>(d));
    std::vector<Level> y(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) X[i][j] = rng.next_gaussian();
      y[i] = static_cast<Level>(i % 3);  // all classes present
    }
    const double l2 = 0.05;
    std::vector<double> W(3 * (d + 1));
    for (double& w : W) w = 0.5 * rng.next_gaussian();

    const auto lg = edulevel::detail::softmax_loss_grad(X, y, W, d, l2);
    for (std::size_t t = 0; t < W.size(); ++t) {
      const double h = 1e-6 * std::max(1.0, std::fabs(W[t]));
      std::vector<double> Wp = W, Wm = W;
      Wp[t] += h;
      Wm[t] -= h;
      const double fd =
          (edulevel::detail::softmax_loss(X, y, Wp, d, l2) -
           edulevel::detail::softmax_loss(X, y, Wm, d, l2)) /
          (2.0 * h);
      const double denom = std::max({1e-8, std::fabs(fd), std::fabs(lg.grad[t])});
      CHECK(std::fabs(lg.grad[t] - fd) / denom <= 1e-5);
      ++checked;
    }
  }
  CHECK(checked == 50 * 3 * 6);
}

TEST_CASE("separable blobs reach 0.99 training accuracy") {
  const DesignMatrix blobs = gaussian_blobs(100, 2, 7);
  Hyperparams hp;
  hp.max_iters = 400;
  hp.tolerance = 1e-7;
  const DifficultyModel model = train(blobs, hp);
  const EvalReport report = evaluate(model, blobs);
  CHECK(report.accuracy >= 0.99);
  CHECK(model.hyperparams.l2_lambda == doctest::Approx(1.0 / blobs.n()));
}

TEST_CASE("loss is non-increasing across accepted steps") {
  const DesignMatrix blobs = gaussian_blobs(40, 3, 9);
  Hyperparams hp;
  hp.max_iters = 200;
  std::vector<double> trace;
  train(blobs, hp, &trace);
  REQUIRE(trace.size() >= 2);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1]);
}

TEST_CASE("training is deterministic") {
  const DesignMatrix blobs = gaussian_blobs(50, 4, 13);
  const DifficultyModel a = train(blobs);
  const DifficultyModel b = train(blobs);
  REQUIRE(a.weights.size() == b.weights.size());
  for (std::size_t i = 0; i < a.weights.size(); ++i)
    CHECK(a.weights[i] == b.weights[i]);
}

TEST_CASE("degenerate labels are rejected") {
  DesignMatrix m;
  m.feature_names = {"x"};
  m.rows = {{0.0}, {1.0}, {2.0}};
  m.labels = {Level::Elementary, Level::Elementary, Level::Middle};
  CHECK_THROWS_AS(train(m), DegenerateInputError);
}

TEST_CASE("very large l2 pushes predictions toward uniform") {
  const DesignMatrix blobs = gaussian_blobs(50, 2, 21);
  Hyperparams hp;
  hp.l2_lambda = 1000.0;
  hp.max_iters = 300;
  const DifficultyModel model = train(blobs, hp);
  double max_feature_weight = 0.0;
  const int stride = model.dim() + 1;
  for (int k = 0; k < 3; ++k)
    for (int j = 1; j <= model.dim(); ++j)
      max_feature_weight =
          std::max(max_feature_weight, std::fabs(model.weights[k * stride + j]));
  CHECK(max_feature_weight < 0.01);
  for (const auto& row : blobs.rows) {
    const auto p = predict_proba(model, row);
    for (int k = 0; k < 3; ++k) CHECK(std::fabs(p[k] - 1.0 / 3) < 0.05);
  }
}

TEST_CASE("informative binary feature dominates, vs grid-search oracle") {
  SplitMix64 rng(33);
  DesignMatrix m;
  m.feature_names = {"informative", "noise1", "noise2", "noise3"};
  for (int i = 0; i < 120; ++i) {
    const auto level = static_cast<Level>(i % 3);
    m.labels.push_back(level);
    m.rows.push_back({level == Level::Elementary ? 1.0 : 0.0,
                      rng.next_gaussian(), rng.next_gaussian(),
                      rng.next_gaussian()});
  }
  // brute-force 1-D grid search finds the informative column by a wide margin
  const double ce_informative = best_binary_ce_1d(m, 0);
  for (int j = 1; j < 4; ++j)
    CHECK(ce_informative < best_binary_ce_1d(m, j) - 0.3);

  const DifficultyModel model = train(m);
  const int stride = model.dim() + 1;
  std::array<double, 4> magnitude{};
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 3; ++k)
      magnitude[j] += std::fabs(model.weights[k * stride + 1 + j]);
  for (int j = 1; j < 4; ++j) CHECK(magnitude[0] > magnitude[j]);
}

TEST_CASE("predict_proba pinned examples") {
  // zero weights → uniform probabilities and Elementary by tie-break
  DifficultyModel zero;
  zero.feature_names = {"x"};
  zero.means = {0.0};
  zero.stds = {1.0};
  zero.constant_cols = {false};
  zero.weights.assign(6, 0.0);
  const auto p = predict_proba(zero, {0.7});
  for (int k = 0; k < 3; ++k) CHECK(p[k] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(predict(zero, {0.7}) == Level::Elementary);

  // hand-set one-feature model: softmax evaluated by hand
  DifficultyModel hand = zero;
  hand.weights = {0.0, 1.0, 0.0, 0.0, 0.0, 0.0};  // class E gets score x
  const double x = 2.0;
  const auto q = predict_proba(hand, {x});
  const double z = std::exp(2.0) + 2.0;
  CHECK(q[0] == doctest::Approx(std::exp(2.0) / z).epsilon(1e-12));
  CHECK(q[1] == doctest::Approx(1.0 / z).epsilon(1e-12));

  // probabilities (0.1, 0.7, 0.2) → Middle, via log-prob biases
  DifficultyModel priors;
  priors.weights = {std::log(0.1), std::log(0.7), std::log(0.2)};
  CHECK(predict(priors, {}) == Level::Middle);
  const auto pr = predict_proba(priors, {});
  CHECK(pr[0] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(pr[1] == doctest::Approx(0.7).epsilon(1e-12));

  // softmax shift invariance
  DifficultyModel shifted = priors;
  for (double& w : shifted.weights) w += 17.5;
  const auto ps = predict_proba(shifted, {});
  for (int k = 0; k < 3; ++k) CHECK(std::fabs(ps[k] - pr[k]) <= 1e-12);

  CHECK_THROWS_AS(predict_proba(hand, {1.0, 2.0}), ShapeError);
}

TEST_CASE("predict invariant under positive feature rescaling") {
  const DesignMatrix blobs = gaussian_blobs(60, 3, 55);
  const DifficultyModel base = train(blobs);

  for (double scale : {2.0, 3.7}) {
    DesignMatrix scaled = blobs;
    for (auto& row : scaled.rows) row[1] *= scale;
    const DifficultyModel rescaled_model = train(scaled);
    for (int i = 0; i < blobs.n(); ++i) {
      std::vector<double> x = blobs.rows[i];
      std::vector<double> xs = x;
      xs[1] *= scale;
      CHECK(predict(base, x) == predict(rescaled_model, xs));
    }
    if (scale == 2.0) {
      // power-of-two rescaling is exact: bit-identical weights
      for (std::size_t t = 0; t < base.weights.size(); ++t) {
        const int stride = base.dim() + 1;
        const int col = static_cast<int>(t % stride);
        if (col == 2)  // the rescaled feature's weight halves exactly
          CHECK(rescaled_model.weights[t] == base.weights[t]);
        else
          CHECK(rescaled_model.weights[t] == base.weights[t]);
      }
    }
  }
}

TEST_CASE("evaluate pinned examples") {
  // perfect predictions
  std::vector<Level> y = balanced_labels(5);
  CHECK(evaluate_predictions(y, y).macro_f1 == doctest::Approx(1.0));
  CHECK(evaluate_predictions(y, y).accuracy == doctest::Approx(1.0));

  // all predicted Elementary on a balanced test: macro F1 = 1/6
  std::vector<Level> all_elem(y.size(), Level::Elementary);
  const EvalReport r = evaluate_predictions(y, all_elem);
  CHECK(r.recall[0] == doctest::Approx(1.0));
  CHECK(r.recall[1] == doctest::Approx(0.0));
  CHECK(r.recall[2] == doctest::Approx(0.0));
  CHECK(r.macro_f1 == doctest::Approx(1.0 / 6).epsilon(1e-12));
}

TEST_CASE("evaluate matches the hand-computed confusion oracle") {
  // confusion [[8,1,1],[2,7,1],[0,1,9]] built from explicit pairs
  std::vector<Level> y_true, y_pred;
  const int confusion[3][3] = {{8, 1, 1}, {2, 7, 1}, {0, 1, 9}};
  for (int t = 0; t < 3; ++t)
    for (int p = 0; p < 3; ++p)
      for (int c = 0; c < confusion[t][p]; ++c) {
        y_true.push_back(static_cast<Level>(t));
        y_pred.push_back(static_cast<Level>(p));
      }
  const EvalReport r = evaluate_predictions(y_true, y_pred);
  for (int t = 0; t < 3; ++t)
    for (int p = 0; p < 3; ++p) CHECK(r.confusion[t][p] == confusion[t][p]);

  // hand: precision (8/10, 7/9, 9/11), recall (8/10, 7/10, 9/10)
  CHECK(r.precision[0] == doctest::Approx(8.0 / 10).epsilon(1e-12));
  CHECK(r.precision[1] == doctest::Approx(7.0 / 9).epsilon(1e-12));
  CHECK(r.precision[2] == doctest::Approx(9.0 / 11).epsilon(1e-12));
  CHECK(r.recall[0] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(r.recall[1] == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(r.recall[2] == doctest::Approx(0.9).epsilon(1e-12));
  // per-class F1 reduce to 4/5, 14/19, 6/7; macro = 1592/1995
  CHECK(r.f1[0] == doctest::Approx(4.0 / 5).epsilon(1e-12));
  CHECK(r.f1[1] == doctest::Approx(14.0 / 19).epsilon(1e-12));
  CHECK(r.f1[2] == doctest::Approx(6.0 / 7).epsilon(1e-12));
  CHECK(r.macro_f1 == doctest::Approx(1592.0 / 1995.0).epsilon(1e-12));
  CHECK(r.accuracy == doctest::Approx(24.0 / 30).epsilon(1e-12));
}

TEST_CASE("evaluate agrees with a brute-force recount on random pairs") {
  SplitMix64 rng(88);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Level> y_true, y_pred;
    const int n = 5 + static_cast<int>(rng.next_below(60));
    for (int i = 0; i < n; ++i) {
      y_true.push_back(static_cast<Level>(rng.next_below(3)));
      y_pred.push_back(static_cast<Level>(rng.next_below(3)));
    }
    const EvalReport r = evaluate_predictions(y_true, y_pred);
    int recount[3][3] = {};
    for (int i = 0; i < n; ++i)
      ++recount[static_cast<int>(y_true[i])][static_cast<int>(y_pred[i])];
    int total = 0;
    for (int t = 0; t < 3; ++t)
      for (int p = 0; p < 3; ++p) {
        CHECK(r.confusion[t][p] == recount[t][p]);
        total += recount[t][p];
      }
    CHECK(total == n);
    for (int k = 0; k < 3; ++k) {
      int tp = recount[k][k], fp = 0, fn = 0;
      for (int j = 0; j < 3; ++j)
        if (j != k) {
          fp += recount[j][k];
          fn += recount[k][j];
        }
      const double prec = tp + fp > 0 ? double(tp) / (tp + fp) : 0.0;
      const double rec = tp + fn > 0 ? double(tp) / (tp + fn) : 0.0;
      CHECK(r.precision[k] == prec);
      CHECK(r.recall[k] == rec);
    }
  }
}

TEST_CASE("model json round trip") {
  const DesignMatrix blobs = gaussian_blobs(30, 3, 77);
  const DifficultyModel model = train(blobs);
  const auto path =
      std::filesystem::temp_directory_path() / "edulevel_model_rt.json";
  save_model(path, model);
  const DifficultyModel back = load_model(path);
  CHECK(back.feature_names == model.feature_names);
  REQUIRE(back.weights.size() == model.weights.size());
  for (std::size_t i = 0; i < model.weights.size(); ++i)
    CHECK(back.weights[i] == model.weights[i]);
  for (const auto& row : blobs.rows)
    CHECK(predict(back, row) == predict(model, row));
  CHECK(back.hyperparams.l2_lambda == model.hyperparams.l2_lambda);
}

TEST_CASE("feature selection by name") {
  DesignMatrix m;
  m.feature_names = {"a", "b", "c"};
  m.rows = {{1, 2, 3}, {4, 5, 6}};
  m.labels = {Level::Elementary, Level::Middle};
  m.doc_ids = {"d1", "d2"};
  const DesignMatrix sel = m.select({"c", "a"});
  CHECK(sel.feature_names == std::vector<std::string>({"c", "a"}));
  CHECK(sel.rows[0] == std::vector<double>({3, 1}));
  CHECK(sel.rows[1] == std::vector<double>({6, 4}));
  CHECK_THROWS_AS(m.select({"zzz"}), ShapeError);
}
