// Command-line pipeline: ScienceQA ingestion → feature extraction →
// regression experiments → analysis reports.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "edulevel/analysis.hpp"
#include "edulevel/baselines.hpp"
#include "edulevel/classifier.hpp"
#include "edulevel/dataset.hpp"
#include "edulevel/feature_io.hpp"
#include "edulevel/llm_client.hpp"
#include "edulevel/prompt_metrics.hpp"
#include "edulevel/run_config.hpp"
#include "edulevel/static_metrics.hpp"

namespace fs = std::filesystem;
using namespace edulevel;

namespace {

struct CliState {
  RunConfig cfg;
  std::string config_path;

  // flag overrides; applied after the config file loads
  std::optional<std::uint64_t> seed;
  std::optional<std::string> input, output_dir, cache, base_url, model_name;
  std::optional<std::string> annotations, feature_set, syllables;
  std::optional<int> per_class, max_iters, n_samples, shots_per_class;
  std::optional<int> max_parallel, retry_count;
  std::optional<double> train_fraction, l2, tolerance;
  bool no_stratify = false;
  bool resample_test = false;
  bool unpaired = false;
  bool few_shot = false;
  bool all_sets = false;

  void finalize() {
    if (!config_path.empty()) cfg = load_run_config(config_path);
    if (seed) cfg.seed = *seed;
    if (input) cfg.dataset_input = *input;
    if (output_dir) cfg.output_dir = *output_dir;
    if (cache) cfg.cache_path = *cache;
    if (base_url) cfg.llm.base_url = *base_url;
    if (model_name) cfg.llm.model_name = *model_name;
    if (annotations) cfg.annotations_path = *annotations;
    if (syllables) cfg.syllables_path = *syllables;
    if (per_class) cfg.split.per_class = *per_class;
    if (train_fraction) cfg.split.train_fraction = *train_fraction;
    if (no_stratify) cfg.split.stratify = false;
    if (l2) cfg.classifier.l2_lambda = *l2;
    if (max_iters) cfg.classifier.max_iters = *max_iters;
    if (tolerance) cfg.classifier.tolerance = *tolerance;
    if (max_parallel) cfg.llm.max_parallel = *max_parallel;
    if (retry_count) cfg.llm.retry_count = *retry_count;
    if (shots_per_class) cfg.shots_per_class = *shots_per_class;
    if (few_shot) cfg.baseline_few_shot = true;
    if (feature_set) {
      auto fs_value = feature_set_from_string(*feature_set);
      if (!fs_value) throw DomainError("unknown feature set: " + *feature_set);
      cfg.feature_set = *fs_value;
    }
    cfg.split.seed = derive_seed(cfg.seed, "dataset");
  }
};

LinguisticResources load_resources(const RunConfig& cfg) {
  LinguisticResources res;
  res.lexicon = SenseLexicon::load(cfg.sense_lexicon_path);
  res.lexicon.set_stopwords(read_line_list(cfg.stopwords_path));
  res.abbreviations = read_line_list(cfg.abbreviations_path);
  if (!cfg.syllables_path.empty()) {
    res.syllables = SyllableDict::load(cfg.syllables_path);
    res.use_syllable_dict = true;
  }
  return res;
}

std::pair<std::set<std::string>, std::set<std::string>> split_ids(
    const RunConfig& cfg) {
  std::set<std::string> train_ids, test_ids;
  for (const auto& [id, level, split] :
       read_manifest_csv(cfg.out_path("manifest.csv"))) {
    (void)level;
    if (split == "train") train_ids.insert(id);
    else test_ids.insert(id);
  }
  return {train_ids, test_ids};
}

std::vector<std::string> feature_names_for(const RunConfig& cfg,
                                           const DesignMatrix& combo,
                                           FeatureSet set) {
  std::vector<std::string> names;
  for (const std::string& name : combo.feature_names) {
    const bool is_prompt = name.rfind("pm_", 0) == 0;
    if (set == FeatureSet::Combo || (set == FeatureSet::Prompt && is_prompt) ||
        (set == FeatureSet::Static && !is_prompt))
      names.push_back(name);
  }
  (void)cfg;
  return names;
}

int cmd_ingest(CliState& state) {
  const RunConfig& cfg = state.cfg;
  if (cfg.dataset_input.empty())
    throw DomainError("ingest needs --input (ScienceQA problems.json)");
  const auto items = load_scienceqa(cfg.dataset_input);
  const auto docs = build_balanced_dataset(items, cfg.split);
  const auto [train, test] = split_train_test(docs, cfg.split);

  fs::create_directories(cfg.output_dir);
  write_documents_jsonl(cfg.out_path("documents.jsonl"), docs);
  write_manifest_csv(cfg.out_path("manifest.csv"), train, test);

  std::array<int, 3> counts{};
  for (const auto& d : docs) ++counts[static_cast<int>(*d.level)];
  std::printf("ingested %zu raw items → %zu balanced documents\n",
              items.size(), docs.size());
  std::printf("class counts: elementary=%d middle=%d high=%d\n", counts[0],
              counts[1], counts[2]);
  std::printf("split: train=%zu test=%zu\n", train.size(), test.size());
  return 0;
}

int cmd_featurize(CliState& state) {
  const RunConfig& cfg = state.cfg;
  const auto docs = read_documents_jsonl(cfg.out_path("documents.jsonl"));
  if (docs.empty()) throw DomainError("no documents; run ingest first");
  const LinguisticResources res = load_resources(cfg);

  std::map<std::string, std::vector<Sentence>> sidecar;
  if (!cfg.annotations_path.empty()) {
    sidecar = load_external_annotations(cfg.annotations_path);
    std::set<std::string> known;
    for (const auto& d : docs) known.insert(d.doc_id);
    validate_annotation_ids(sidecar, known);
  }

  const bool want_static = cfg.feature_set != FeatureSet::Prompt;
  const bool want_prompt = cfg.feature_set != FeatureSet::Static;

  DesignMatrix static_m;
  if (want_static) {
    static_m.feature_names.assign(static_feature_names().begin(),
                                  static_feature_names().end());
    for (const auto& doc : docs) {
      auto it = sidecar.find(doc.doc_id);
      const auto v = compute_static_vector(
          doc, res, it == sidecar.end() ? nullptr : &it->second);
      static_m.doc_ids.push_back(doc.doc_id);
      static_m.labels.push_back(*doc.level);
      static_m.rows.emplace_back(v.values.begin(), v.values.end());
    }
    write_feature_csv(cfg.out_path("static_features.csv"), static_m);
    std::printf("static features: %d docs × %d columns\n", static_m.n(),
                static_m.cols());
  }

  DesignMatrix prompt_m;
  if (want_prompt) {
    const auto templates = load_prompt_templates(cfg.templates_path);
    validate_templates(templates);
    ResponseCache cache(cfg.cache_file());
    for (const auto& t : templates) prompt_m.feature_names.push_back(t.id);
    for (const auto& doc : docs) {
      const PromptMetricVector v =
          compute_prompt_vector(doc, cfg.llm, templates, cache);
      prompt_m.doc_ids.push_back(doc.doc_id);
      prompt_m.labels.push_back(*doc.level);
      prompt_m.rows.push_back(v.values);
    }
    write_feature_csv(cfg.out_path("prompt_features.csv"), prompt_m);
    std::printf("prompt features: %d docs × %d columns (cache: %zu entries)\n",
                prompt_m.n(), prompt_m.cols(), cache.size());
  }

  if (want_static && want_prompt) {
    const DesignMatrix combo = merge_feature_tables(static_m, prompt_m);
    write_feature_csv(cfg.out_path("combo_features.csv"), combo);
    std::printf("combo features: %d docs × %d columns\n", combo.n(),
                combo.cols());
  }
  return 0;
}

DesignMatrix load_combo_or_subset(const RunConfig& cfg, FeatureSet set) {
  const fs::path combo_path = cfg.out_path("combo_features.csv");
  if (fs::exists(combo_path)) {
    const DesignMatrix combo = read_feature_csv(combo_path);
    return combo.select(feature_names_for(cfg, combo, set));
  }
  if (set == FeatureSet::Static)
    return read_feature_csv(cfg.out_path("static_features.csv"));
  if (set == FeatureSet::Prompt)
    return read_feature_csv(cfg.out_path("prompt_features.csv"));
  throw DomainError("combo features not found; run featurize first");
}

std::vector<FeatureSet> selected_sets(const CliState& state) {
  if (state.all_sets)
    return {FeatureSet::Static, FeatureSet::Prompt, FeatureSet::Combo};
  return {state.cfg.feature_set};
}

int cmd_train(CliState& state) {
  const RunConfig& cfg = state.cfg;
  const auto [train_ids, test_ids] = split_ids(cfg);
  for (FeatureSet set : selected_sets(state)) {
    const DesignMatrix all = load_combo_or_subset(cfg, set);
    const DesignMatrix train_m = filter_rows(all, train_ids);
    Hyperparams hp = cfg.classifier;
    hp.seed = derive_seed(cfg.seed, "classifier");
    const DifficultyModel model = train(train_m, hp);
    save_model(cfg.out_path(std::string("model_") + to_string(set) + ".json"),
               model);
    std::printf("trained %s model on %d rows × %d features (%d iterations, "
                "final loss %.6f)\n",
                to_string(set), train_m.n(), train_m.cols(), model.iterations,
                model.final_loss);
  }
  return 0;
}

int cmd_eval(CliState& state) {
  const RunConfig& cfg = state.cfg;
  const auto [train_ids, test_ids] = split_ids(cfg);
  for (FeatureSet set : selected_sets(state)) {
    const DesignMatrix all = load_combo_or_subset(cfg, set);
    const DesignMatrix test_m = filter_rows(all, test_ids);
    const DifficultyModel model =
        load_model(cfg.out_path(std::string("model_") + to_string(set) + ".json"));
    const EvalReport report = evaluate(model, test_m);
    const std::string stem = std::string("eval_") + to_string(set);
    write_file(cfg.out_path(stem + ".json"),
               report_to_json(report).dump(2) + "\n");
    const std::string table = render_eval_table(
        report, std::string("Feature set: ") + to_string(set));
    write_file(cfg.out_path(stem + ".txt"), table);
    std::fputs(table.c_str(), stdout);
  }
  return 0;
}

int cmd_rank(CliState& state) {
  const RunConfig& cfg = state.cfg;
  const DesignMatrix all = load_combo_or_subset(cfg, FeatureSet::Combo);
  const auto [train_ids, test_ids] = split_ids(cfg);
  const DesignMatrix train_m = filter_rows(all, train_ids);
  const FRanking ranking = rank_features(train_m);
  write_file(cfg.out_path("ranking.csv"), ranking_to_csv(ranking));
  const std::string table = render_ranking_table(ranking);
  write_file(cfg.out_path("ranking.txt"), table);
  std::fputs(table.c_str(), stdout);
  return 0;
}

int cmd_bootstrap(CliState& state) {
  const RunConfig& cfg = state.cfg;
  const DesignMatrix all = load_combo_or_subset(cfg, FeatureSet::Combo);
  const auto [train_ids, test_ids] = split_ids(cfg);
  const DesignMatrix train_m = filter_rows(all, train_ids);
  const DesignMatrix test_m = filter_rows(all, test_ids);
  const auto combo_names = feature_names_for(cfg, all, FeatureSet::Combo);
  const auto static_names = feature_names_for(cfg, all, FeatureSet::Static);
  Hyperparams hp = cfg.classifier;
  const int n_samples = state.n_samples.value_or(1000);
  const BootstrapResult result = bootstrap_compare(
      train_m, test_m, combo_names, static_names, n_samples,
      derive_seed(cfg.seed, "bootstrap"), hp, state.resample_test,
      !state.unpaired);
  write_file(cfg.out_path("bootstrap.json"),
             bootstrap_to_json(result).dump(2) + "\n");
  std::printf("bootstrap combo vs static (%s): n=%d mean_diff=%.6f t=%.4f "
              "p=%.6g%s\n",
              result.paired ? "paired" : "unpaired", result.n_samples,
              result.mean_diff, result.t_statistic, result.p_value,
              result.identical ? " (no difference)" : "");
  return 0;
}

int cmd_baseline(CliState& state) {
  const RunConfig& cfg = state.cfg;
  const auto docs = read_documents_jsonl(cfg.out_path("documents.jsonl"));
  const auto [train_ids, test_ids] = split_ids(cfg);
  std::vector<EduDocument> test_docs, train_docs;
  for (const auto& d : docs) {
    if (test_ids.count(d.doc_id)) test_docs.push_back(d);
    else if (train_ids.count(d.doc_id)) train_docs.push_back(d);
  }

  BaselineConfig bcfg;
  bcfg.llm = cfg.llm;
  if (cfg.baseline_few_shot) {
    bcfg.mode = BaselineConfig::Mode::FewShot;
    bcfg.shots_per_class = cfg.shots_per_class;
    // seeded exemplar draw from the training split, per class
    std::array<std::vector<const EduDocument*>, 3> pools;
    for (const auto& d : train_docs)
      pools[static_cast<int>(*d.level)].push_back(&d);
    for (Level level : kAllLevels) {
      auto& pool = pools[static_cast<int>(level)];
      SplitMix64 rng(derive_seed(cfg.seed, std::string("baseline.exemplars.") +
                                               to_string(level)));
      seeded_shuffle(pool, rng);
      if (static_cast<int>(pool.size()) < bcfg.shots_per_class)
        throw CapacityError("not enough training documents for exemplars");
      for (int i = 0; i < bcfg.shots_per_class; ++i)
        bcfg.exemplars.push_back(*pool[i]);
    }
  }

  ResponseCache cache(cfg.cache_file());
  const BaselineOutcome outcome = run_baseline(bcfg, test_docs, cache);
  const EvalReport report = evaluate_baseline(outcome, test_docs);

  nlohmann::ordered_json j;
  j["mode"] = cfg.baseline_few_shot ? "few_shot" : "zero_shot";
  j["invalid_rate"] = outcome.invalid_rate;
  j["class_distribution"] = outcome.class_distribution;
  nlohmann::ordered_json preds;
  for (const auto& [id, level] : outcome.predictions)
    preds[id] = to_string(level);
  j["predictions"] = preds;
  j["eval"] = report_to_json(report);
  const std::string stem = cfg.baseline_few_shot ? "baseline_few_shot"
                                                 : "baseline_zero_shot";
  write_file(cfg.out_path(stem + ".json"), j.dump(2) + "\n");

  std::printf("%s baseline on %d test documents\n",
              cfg.baseline_few_shot ? "few-shot" : "zero-shot",
              outcome.total);
  std::printf("invalid responses: %.2f%% (defaulted to elementary)\n",
              outcome.invalid_rate * 100.0);
  std::fputs(render_eval_table(report).c_str(), stdout);
  return 0;
}

int cmd_report(CliState& state) {
  const RunConfig& cfg = state.cfg;
  std::string out = "Method          Macro-F1\n";
  char buf[128];
  bool any = false;
  const std::pair<const char*, const char*> rows[] = {
      {"Prompt-based Reg.", "eval_prompt.json"},
      {"Static Reg.", "eval_static.json"},
      {"Combo Reg.", "eval_combo.json"},
      {"Zero-shot LLM", "baseline_zero_shot.json"},
      {"Few-shot LLM", "baseline_few_shot.json"}};
  for (const auto& [label, file] : rows) {
    const fs::path p = cfg.out_path(file);
    if (!fs::exists(p)) continue;
    const auto j = nlohmann::json::parse(read_file(p));
    const double macro = j.contains("macro_f1")
                             ? j.at("macro_f1").get<double>()
                             : j.at("eval").at("macro_f1").get<double>();
    std::snprintf(buf, sizeof(buf), "%-18s %.2f\n", label, macro);
    out += buf;
    any = true;
  }
  if (!any) throw DomainError("no eval or baseline outputs found; run eval first");
  write_file(cfg.out_path("report.txt"), out);
  std::fputs(out.c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Education-level text difficulty classification toolkit"};
  app.require_subcommand(1);
  CliState state;

  app.add_option("--config", state.config_path, "JSON config file");
  app.add_option("--seed", state.seed, "root seed for every stage");
  app.add_option("--output-dir", state.output_dir, "output directory");
  app.add_option("--cache", state.cache, "LLM response cache file");

  auto* ingest = app.add_subcommand("ingest", "build the balanced dataset");
  ingest->add_option("--input", state.input, "ScienceQA problems.json");
  ingest->add_option("--per-class", state.per_class, "documents per level");
  ingest->add_option("--train-fraction", state.train_fraction,
                     "train share in (0,1)");
  ingest->add_flag("--no-stratify", state.no_stratify,
                   "split globally instead of per level");

  auto* featurize =
      app.add_subcommand("featurize", "compute static and prompt features");
  featurize->add_option("--feature-set", state.feature_set,
                        "static | prompt | combo");
  featurize->add_option("--base-url", state.base_url, "LLM endpoint");
  featurize->add_option("--model", state.model_name, "LLM model name");
  featurize->add_option("--max-parallel", state.max_parallel,
                        "in-flight request cap");
  featurize->add_option("--retry-count", state.retry_count, "LLM retries");
  featurize->add_option("--annotations", state.annotations,
                        "sidecar annotations (JSONL)");
  featurize->add_option("--syllables", state.syllables,
                        "syllable dictionary TSV");

  auto* train_cmd = app.add_subcommand("train", "fit the softmax regression");
  train_cmd->add_option("--feature-set", state.feature_set,
                        "static | prompt | combo");
  train_cmd->add_flag("--all", state.all_sets, "train all three feature sets");
  train_cmd->add_option("--l2", state.l2, "L2 strength (negative = 1/n)");
  train_cmd->add_option("--max-iters", state.max_iters, "iteration cap");
  train_cmd->add_option("--tolerance", state.tolerance,
                        "gradient max-norm stop");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate on the test split");
  eval_cmd->add_option("--feature-set", state.feature_set,
                       "static | prompt | combo");
  eval_cmd->add_flag("--all", state.all_sets,
                     "evaluate all three feature sets");

  app.add_subcommand("rank", "univariate F-test feature ranking");

  auto* bootstrap_cmd =
      app.add_subcommand("bootstrap", "combo vs static significance");
  bootstrap_cmd->add_option("--n-samples", state.n_samples,
                            "bootstrap iterations (default 1000)");
  bootstrap_cmd->add_flag("--resample-test", state.resample_test,
                          "resample the test set too");
  bootstrap_cmd->add_flag("--unpaired", state.unpaired,
                          "independent resamples + two-sample t-test");

  auto* baseline_cmd =
      app.add_subcommand("baseline", "direct LLM classification");
  baseline_cmd->add_flag("--few-shot", state.few_shot,
                         "use exemplars from the training split");
  baseline_cmd->add_option("--shots-per-class", state.shots_per_class,
                           "exemplars per level (default 2)");
  baseline_cmd->add_option("--base-url", state.base_url, "LLM endpoint");
  baseline_cmd->add_option("--model", state.model_name, "LLM model name");

  app.add_subcommand("report", "summary table over finished runs");

  CLI11_PARSE(app, argc, argv);

  try {
    state.finalize();
    if (app.got_subcommand("ingest")) return cmd_ingest(state);
    if (app.got_subcommand("featurize")) return cmd_featurize(state);
    if (app.got_subcommand("train")) return cmd_train(state);
    if (app.got_subcommand("eval")) return cmd_eval(state);
    if (app.got_subcommand("rank")) return cmd_rank(state);
    if (app.got_subcommand("bootstrap")) return cmd_bootstrap(state);
    if (app.got_subcommand("baseline")) return cmd_baseline(state);
    if (app.got_subcommand("report")) return cmd_report(state);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
