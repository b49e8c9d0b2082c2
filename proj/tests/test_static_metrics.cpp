#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "edulevel/dataset.hpp"
#include "edulevel/feature_io.hpp"
#include "edulevel/prng.hpp"
#include "edulevel/static_metrics.hpp"
#include "support/oracle_static.hpp"
#include "support/resources.hpp"

using namespace edulevel;
using edulevel::testing::data_path;
using edulevel::testing::shipped_resources;

namespace {

EduDocument doc_with(const std::string& question,
                     std::vector<std::string> choices = {},
                     const std::string& solution = {},
                     const std::string& lecture = {}) {
  EduDocument d;
  d.doc_id = "t";
  d.question = question;
  d.choices = std::move(choices);
  d.solution = solution;
  d.lecture = lecture;
  return d;
}

std::string random_sentence_text(SplitMix64& rng) {
  static const char* kWords[] = {
      "the", "cat", "sat", "on", "a", "big", "table", "dogs", "run",
      "quickly", "beautiful", "water", "temperature", "is", "cold", "and",
      "energy", "moves", "through", "it", "animals", "eat", "plants",
      "because", "sun", "heats", "earth", "70", "measurement"};
  std::string text;
  const int n_sentences = 1 + static_cast<int>(rng.next_below(4));
  for (int s = 0; s < n_sentences; ++s) {
    const int n_words = 1 + static_cast<int>(rng.next_below(12));
    for (int w = 0; w < n_words; ++w) {
      std::string word = kWords[rng.next_below(29)];
      if (w == 0 && word[0] >= 'a' && word[0] <= 'z')
        word[0] = static_cast<char>(word[0] - 'a' + 'A');
      text += word;
      text += (w + 1 == n_words) ? "." : " ";
    }
    if (s + 1 < n_sentences) text += " ";
  }
  return text;
}

}  // namespace

TEST_CASE("readability pinned examples") {
  const auto& res = shipped_resources();
  // "The cat sat." → W=3, S=1, Y=3, C=9
  const auto r = readability_indices("The cat sat.", res);
  CHECK(r.flesch_kincaid_ease == doctest::Approx(119.19).epsilon(1e-9));
  CHECK(r.automated_readability_index == doctest::Approx(-5.80).epsilon(1e-9));
  CHECK(r.gunning_fog == doctest::Approx(0.4 * 3.0).epsilon(1e-12));

  TextCounts c{3, 1, 3, 9, 0, 0};
  CHECK(readability_indices(c).smog_index == doctest::Approx(3.1291));
  CHECK_THROWS_AS(readability_indices(TextCounts{0, 1, 0, 0, 0, 0}),
                  DegenerateInputError);
  CHECK_THROWS_AS(readability_indices(TextCounts{3, 0, 3, 9, 0, 0}),
                  DegenerateInputError);
}

TEST_CASE("surface count examples") {
  const auto& res = shipped_resources();
  auto v1 = surface_counts(doc_with("A b?"), res);
  CHECK(v1[StaticFeature::n_words_q] == 2);
  CHECK(v1[StaticFeature::n_words_a_lecture] == 0);

  auto v2 = surface_counts(doc_with("cat cat"), res);
  CHECK(v2[StaticFeature::Num_Unique_Words] == 1);
  CHECK(v2[StaticFeature::Word_Count] == 2);

  auto v3 = surface_counts(doc_with("Cat CAT cat"), res);
  CHECK(v3[StaticFeature::Num_Unique_Words] == 1);
}

TEST_CASE("syntactic count examples") {
  const auto& res = shipped_resources();
  auto v1 = syntactic_counts(doc_with("The dog ran."), res);
  CHECK(v1[StaticFeature::Nouns] == 1);
  CHECK(v1[StaticFeature::Verbs] == 1);
  CHECK(v1[StaticFeature::Prop_Passive_Voice_Verbs] == 0.0);
  CHECK(v1[StaticFeature::Prop_Active_Voice_Verbs] == 1.0);

  // no verbs at all → proportions and ratio all zero
  auto v2 = syntactic_counts(doc_with("The big dog."), res);
  CHECK(v2[StaticFeature::Prop_Active_Voice_Verbs] == 0.0);
  CHECK(v2[StaticFeature::Prop_Passive_Voice_Verbs] == 0.0);
  CHECK(v2[StaticFeature::Ratio_Active_to_Passive_Verbs] == 0.0);

  auto v3 = syntactic_counts(doc_with("The food was eaten."), res);
  CHECK(v3[StaticFeature::Num_Agentless_Passive_Constructions] == 1);
  auto v4 = syntactic_counts(doc_with("The food was eaten by dogs."), res);
  CHECK(v4[StaticFeature::Num_Agentless_Passive_Constructions] == 0);
  CHECK(v4[StaticFeature::Prop_Passive_Voice_Verbs] > 0.0);

  auto v5 = syntactic_counts(doc_with("Never eat unknown unhappy plants."), res);
  CHECK(v5[StaticFeature::Num_Negated_Words_Lead_In] == 1);
  CHECK(v5[StaticFeature::Num_Negated_Words_Stem] == 2);  // unknown, unhappy
}

TEST_CASE("sense stat examples") {
  const auto& res = shipped_resources();
  auto v1 = sense_stats(doc_with("zzblorp glarf"), res);
  CHECK(v1[StaticFeature::Num_Word_Senses] == 0);
  CHECK(v1[StaticFeature::Num_Polysemic_Words] == 0);

  auto v2 = sense_stats(doc_with("The bank opened."), res);
  CHECK(v2[StaticFeature::Num_Word_Senses_For_Nouns] == 10);
  CHECK(v2[StaticFeature::Num_Polysemic_Words] >= 1);

  // auxiliary "is" (lemma be) carries senses but never counts as non-aux
  auto v3 = sense_stats(doc_with("It is here."), res);
  CHECK(v3[StaticFeature::Num_Word_Senses_For_Verbs] == 13);
  CHECK(v3[StaticFeature::Num_Word_Senses_For_Non_Auxiliary_Verbs] == 0);
}

TEST_CASE("compute_static_vector shape and degenerate input") {
  const auto& res = shipped_resources();
  auto v = compute_static_vector(doc_with("The cat sat.", {"a", "b"}), res);
  CHECK(v.size() == 46);
  CHECK(static_feature_names().size() == 46);
  for (double x : v.values) CHECK(std::isfinite(x));

  CHECK_THROWS_AS(compute_static_vector(doc_with("???"), res),
                  DegenerateInputError);

  // identical sections → identical section word counts
  auto sym = compute_static_vector(
      doc_with("The cat sat.", {}, "The cat sat.", "The cat sat."), res);
  CHECK(sym[StaticFeature::n_words_q] == sym[StaticFeature::n_words_a_solution]);
  CHECK(sym[StaticFeature::n_words_q] == sym[StaticFeature::n_words_a_lecture]);
}

TEST_CASE("golden fixture matches the frozen oracle values") {
  const auto& res = shipped_resources();
  const auto docs =
      read_documents_jsonl(data_path("golden/static_golden_docs.jsonl"));
  REQUIRE(docs.size() == 10);
  const DesignMatrix golden =
      read_feature_csv(data_path("golden/static_features_golden.csv"));
  REQUIRE(golden.n() == 10);
  REQUIRE(golden.cols() == 46);

  const auto olex =
      edulevel::testing::oracle::load_oracle_lexicon(EDULEVEL_DATA_DIR);

  for (int i = 0; i < 10; ++i) {
    REQUIRE(golden.doc_ids[i] == docs[i].doc_id);
    const auto impl = compute_static_vector(docs[i], res);
    const auto live_oracle =
        edulevel::testing::oracle::static_features(docs[i], olex);
    for (int j = 0; j < 46; ++j) {
      CAPTURE(docs[i].doc_id);
      CAPTURE(static_feature_names()[j]);
      if (j < 39) {
        // two independent code paths must agree bit for bit here
        CHECK(impl.values[j] == live_oracle[j]);
        // frozen values: exact for integral counts, 1e-9 for derived means
        if (std::rint(golden.rows[i][j]) == golden.rows[i][j])
          CHECK(impl.values[j] == golden.rows[i][j]);
        else
          CHECK(std::fabs(impl.values[j] - golden.rows[i][j]) <= 1e-9);
      } else {
        CHECK(std::fabs(impl.values[j] - golden.rows[i][j]) <= 1e-9);
        CHECK(std::fabs(impl.values[j] - live_oracle[j]) <= 1e-9);
      }
    }
  }
}

TEST_CASE("permuting choices never changes the vector") {
  const auto& res = shipped_resources();
  const auto docs =
      read_documents_jsonl(data_path("golden/static_golden_docs.jsonl"));
  for (const auto& doc : docs) {
    if (doc.choices.size() < 2) continue;
    EduDocument permuted = doc;
    std::reverse(permuted.choices.begin(), permuted.choices.end());
    const auto a = compute_static_vector(doc, res);
    const auto b = compute_static_vector(permuted, res);
    for (int j = 0; j < 46; ++j) {
      CAPTURE(doc.doc_id);
      CAPTURE(static_feature_names()[j]);
      CHECK(a.values[j] == b.values[j]);
    }
  }
}

TEST_CASE("FRE strictly decreases when one word gains a syllable") {
  SplitMix64 rng(301);
  for (int trial = 0; trial < 50; ++trial) {
    TextCounts c;
    c.words = 1 + static_cast<int>(rng.next_below(40));
    c.sentences = 1 + static_cast<int>(rng.next_below(5));
    c.syllables = c.words + static_cast<int>(rng.next_below(40));
    c.alpha_chars = 3 * c.words;
    TextCounts bumped = c;
    bumped.syllables += 1;
    CHECK(readability_indices(bumped).flesch_kincaid_ease <
          readability_indices(c).flesch_kincaid_ease);
  }
}

TEST_CASE("appending a duplicate doubles counts, keeps means") {
  const auto& res = shipped_resources();
  const std::string text =
      "The cat sat on the table. Dogs run quickly through water.";
  const auto v1 = compute_static_vector(doc_with(text), res);
  const auto v2 = compute_static_vector(doc_with(text + " " + text), res);
  CHECK(v2[StaticFeature::Word_Count] == 2 * v1[StaticFeature::Word_Count]);
  CHECK(v2[StaticFeature::Nouns] == 2 * v1[StaticFeature::Nouns]);
  CHECK(std::fabs(v2[StaticFeature::Avg_Sentence_Length] -
                  v1[StaticFeature::Avg_Sentence_Length]) <= 1e-12);
  CHECK(std::fabs(v2[StaticFeature::Word_Length_Syllables] -
                  v1[StaticFeature::Word_Length_Syllables]) <= 1e-12);
  CHECK(std::fabs(v2[StaticFeature::Word_Length_Std_Dev] -
                  v1[StaticFeature::Word_Length_Std_Dev]) <= 1e-12);
}

TEST_CASE("readability formulas re-evaluate exactly on random texts") {
  const auto& res = shipped_resources();
  SplitMix64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const std::string text = random_sentence_text(rng);
    const TextCounts c = gather_counts(annotate(text, res));
    REQUIRE(c.words >= 1);
    REQUIRE(c.sentences >= 1);
    const auto r = readability_indices(c);
    const double W = c.words, S = c.sentences, Y = c.syllables,
                 C = c.alpha_chars, CW = c.complex_words, P = c.adpositions;
    CHECK(r.flesch_kincaid_ease == 206.835 - 1.015 * (W / S) - 84.6 * (Y / W));
    CHECK(r.flesch_kincaid_grade == 0.39 * (W / S) + 11.8 * (Y / W) - 15.59);
    CHECK(r.gunning_fog == 0.4 * (W / S + 100.0 * CW / W));
    CHECK(r.smog_index == 1.0430 * std::sqrt(CW * 30.0 / S) + 3.1291);
    CHECK(r.coleman_liau_index ==
          0.0588 * (100.0 * C / W) - 0.296 * (100.0 * S / W) - 15.8);
    CHECK(r.automated_readability_index == 4.71 * (C / W) + 0.5 * (W / S) - 21.43);
    CHECK(r.traenkle_bailer_index ==
          224.6814 - 79.8304 * (C / W) - 12.24032 * (W / S) -
              1.292857 * (100.0 * P / W));
  }
}

TEST_CASE("sidecar annotations override the built-in analysis") {
  const auto& res = shipped_resources();
  EduDocument doc = doc_with("The cat sat.");
  const auto builtin = compute_static_vector(doc, res);
  // "sat" is lexicon-absent and suffixless, so the built-in tagger defaults
  // it to NOUN alongside "cat"
  CHECK(builtin[StaticFeature::Nouns] == 2);

  // a parser that calls every word a noun and supplies deeper attachments
  std::vector<Sentence> sidecar(1);
  for (const char* word : {"The", "cat", "sat", "."}) {
    Token t;
    t.surface = word;
    t.lemma = to_lower(word);
    t.pos = is_ascii_alpha(static_cast<unsigned char>(word[0])) ? Pos::Noun
                                                                : Pos::Punct;
    t.char_len = static_cast<int>(t.lemma.size());
    t.syllables = t.pos == Pos::Punct ? 0 : 1;
    t.depth = 4;
    sidecar[0].tokens.push_back(std::move(t));
  }
  sidecar[0].noun_phrases.push_back({0, 3});
  const auto overridden = compute_static_vector(doc, res, &sidecar);
  CHECK(overridden[StaticFeature::Nouns] == 3);
  CHECK(overridden[StaticFeature::Verbs] == 0);
  CHECK(overridden[StaticFeature::Distance_To_Root_Nouns] == 4.0);
  CHECK(overridden[StaticFeature::Num_Main_Noun_Phrases] == 1);
}

TEST_CASE("feature csv round trip") {
  const auto& res = shipped_resources();
  const auto docs =
      read_documents_jsonl(data_path("golden/static_golden_docs.jsonl"));
  DesignMatrix m;
  m.feature_names.assign(static_feature_names().begin(),
                         static_feature_names().end());
  for (const auto& doc : docs) {
    const auto v = compute_static_vector(doc, res);
    m.doc_ids.push_back(doc.doc_id);
    m.labels.push_back(*doc.level);
    m.rows.emplace_back(v.values.begin(), v.values.end());
  }
  const auto path =
      std::filesystem::temp_directory_path() / "edulevel_static_rt.csv";
  write_feature_csv(path, m);
  const DesignMatrix back = read_feature_csv(path);
  REQUIRE(back.n() == m.n());
  REQUIRE(back.feature_names == m.feature_names);
  for (int i = 0; i < m.n(); ++i) {
    CHECK(back.doc_ids[i] == m.doc_ids[i]);
    CHECK(back.labels[i] == m.labels[i]);
    for (int j = 0; j < 46; ++j)
      CHECK(back.rows[i][j] ==
            doctest::Approx(m.rows[i][j]).epsilon(1e-11));
  }
}
