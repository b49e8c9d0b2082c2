#pragma once

#include <array>
#include <cmath>
#include <iterator>
#include <string>
#include <unordered_set>
#include <vector>

#include "edulevel/linguistics.hpp"
#include "edulevel/stats.hpp"
#include "edulevel/types.hpp"

namespace edulevel {

/// The 46 static features, in the canonical report order.
enum class StaticFeature : int {
  n_words_q = 0,
  n_words_a_solution,
  n_words_a_lecture,
  Text_Length,
  Word_Count,
  Nouns,
  Verbs,
  Adjectives,
  Adverbs,
  Num_Numbers,
  Num_Commas,
  Num_Complex_Words,
  Num_Unique_Words,
  Num_Content_Words,
  Num_Content_Words_No_Stopwords,
  Word_Length_Syllables,
  Avg_Sentence_Length,
  Num_Prepositional_Phrases,
  Num_Negated_Words_Stem,
  Num_Negated_Words_Lead_In,
  Num_Main_Noun_Phrases,
  Avg_Main_NP_Length,
  Num_Verb_Phrases,
  Prop_Active_Voice_Verbs,
  Prop_Passive_Voice_Verbs,
  Ratio_Active_to_Passive_Verbs,
  Num_Words_Before_Main_Verb,
  Num_Agentless_Passive_Constructions,
  Word_Length_Std_Dev,
  Num_Polysemic_Words,
  Num_Word_Senses,
  Num_Word_Senses_For_Content_Words,
  Num_Word_Senses_For_Nouns,
  Num_Word_Senses_For_Verbs,
  Num_Word_Senses_For_Non_Auxiliary_Verbs,
  Num_Word_Senses_For_Adjectives,
  Num_Word_Senses_For_Adverbs,
  Distance_To_Root_Nouns,
  Distance_To_Root_Verbs,
  flesch_kincaid_grade,
  flesch_kincaid_ease,
  coleman_liau_index,
  automated_readability_index,
  smog_index,
  gunning_fog,
  traenkle_bailer_index
};

inline constexpr int kStaticFeatureCount = 46;

inline const std::array<std::string, kStaticFeatureCount>&
static_feature_names() {
  static const std::array<std::string, kStaticFeatureCount> names = {
      "n_words_q",
      "n_words_a_solution",
      "n_words_a_lecture",
      "Text_Length",
      "Word_Count",
      "Nouns",
      "Verbs",
      "Adjectives",
      "Adverbs",
      "Num_Numbers",
      "Num_Commas",
      "Num_Complex_Words",
      "Num_Unique_Words",
      "Num_Content_Words",
      "Num_Content_Words_No_Stopwords",
      "Word_Length_Syllables",
      "Avg_Sentence_Length",
      "Num_Prepositional_Phrases",
      "Num_Negated_Words_Stem",
      "Num_Negated_Words_Lead_In",
      "Num_Main_Noun_Phrases",
      "Avg_Main_NP_Length",
      "Num_Verb_Phrases",
      "Prop_Active_Voice_Verbs",
      "Prop_Passive_Voice_Verbs",
      "Ratio_Active_to_Passive_Verbs",
      "Num_Words_Before_Main_Verb",
      "Num_Agentless_Passive_Constructions",
      "Word_Length_Std_Dev",
      "Num_Polysemic_Words",
      "Num_Word_Senses",
      "Num_Word_Senses_For_Content_Words",
      "Num_Word_Senses_For_Nouns",
      "Num_Word_Senses_For_Verbs",
      "Num_Word_Senses_For_Non_Auxiliary_Verbs",
      "Num_Word_Senses_For_Adjectives",
      "Num_Word_Senses_For_Adverbs",
      "Distance_To_Root_Nouns",
      "Distance_To_Root_Verbs",
      "flesch_kincaid_grade",
      "flesch_kincaid_ease",
      "coleman_liau_index",
      "automated_readability_index",
      "smog_index",
      "gunning_fog",
      "traenkle_bailer_index"};
  return names;
}

struct StaticFeatureVector {
  std::array<double, kStaticFeatureCount> values{};

  double& operator[](StaticFeature f) { return values[static_cast<int>(f)]; }
  double operator[](StaticFeature f) const {
    return values[static_cast<int>(f)];
  }
  static constexpr int size() { return kStaticFeatureCount; }
};

// ---------------------------------------------------------------------------
// Readability indices from raw counts. Constants are the pinned standard
// definitions; words are tokens with at least one alphanumeric character and
// punctuation never contributes to any count.
// ---------------------------------------------------------------------------

struct TextCounts {
  int words = 0;
  int sentences = 0;
  int syllables = 0;
  int alpha_chars = 0;
  int complex_words = 0;  // >= 3 syllables
  int adpositions = 0;
};

struct ReadabilityIndices {
  double flesch_kincaid_grade = 0;
  double flesch_kincaid_ease = 0;
  double coleman_liau_index = 0;
  double automated_readability_index = 0;
  double smog_index = 0;
  double gunning_fog = 0;
  double traenkle_bailer_index = 0;
};

inline ReadabilityIndices readability_indices(const TextCounts& c) {
  if (c.words < 1 || c.sentences < 1)
    throw DegenerateInputError(
        "readability indices need at least one word and one sentence");
  const double W = c.words;
  const double S = c.sentences;
  const double Y = c.syllables;
  const double C = c.alpha_chars;
  const double CW = c.complex_words;
  const double P = c.adpositions;

  ReadabilityIndices r;
  r.flesch_kincaid_ease = 206.835 - 1.015 * (W / S) - 84.6 * (Y / W);
  r.flesch_kincaid_grade = 0.39 * (W / S) + 11.8 * (Y / W) - 15.59;
  r.gunning_fog = 0.4 * (W / S + 100.0 * CW / W);
  r.smog_index = 1.0430 * std::sqrt(CW * 30.0 / S) + 3.1291;
  r.coleman_liau_index =
      0.0588 * (100.0 * C / W) - 0.296 * (100.0 * S / W) - 15.8;
  r.automated_readability_index = 4.71 * (C / W) + 0.5 * (W / S) - 21.43;
  r.traenkle_bailer_index = 224.6814 - 79.8304 * (C / W) -
                            12.24032 * (W / S) - 1.292857 * (100.0 * P / W);
  return r;
}

inline TextCounts gather_counts(const std::vector<Sentence>& sentences) {
  TextCounts c;
  c.sentences = static_cast<int>(sentences.size());
  for (const Sentence& s : sentences) {
    for (const Token& t : s.tokens) {
      if (t.pos == Pos::Adp) ++c.adpositions;
      if (!t.is_word()) continue;
      ++c.words;
      c.syllables += t.syllables;
      c.alpha_chars += t.char_len;
      if (t.syllables >= 3) ++c.complex_words;
    }
  }
  return c;
}

/// Convenience overload used by tests and the property suite.
inline ReadabilityIndices readability_indices(
    std::string_view text, const LinguisticResources& resources) {
  return readability_indices(gather_counts(annotate(text, resources)));
}

// ---------------------------------------------------------------------------
// Document analysis context: one annotation pass shared by all feature
// groups.
// ---------------------------------------------------------------------------

struct DocumentAnalysis {
  std::string full_text;
  std::vector<Sentence> sentences;
  int question_words = 0;
  int solution_words = 0;
  int lecture_words = 0;
};

namespace detail {

inline int word_count(std::string_view text) {
  int n = 0;
  for (const Token& t : tokenize(text))
    if (t.is_word()) ++n;
  return n;
}

}  // namespace detail

/// Sections (and each answer choice) are annotated as separate fragments, so
/// chunking never runs across a section boundary and permuting the choices
/// cannot change any count. full_text stays the joined string for the
/// character-level features.
inline DocumentAnalysis analyze_document(
    const EduDocument& doc, const LinguisticResources& resources,
    const std::vector<Sentence>* sidecar = nullptr) {
  DocumentAnalysis a;
  a.full_text = doc.full_text();
  if (sidecar) {
    a.sentences = *sidecar;
  } else {
    auto add_section = [&](const std::string& part) {
      if (part.empty()) return;
      auto section = annotate(part, resources);
      a.sentences.insert(a.sentences.end(),
                         std::make_move_iterator(section.begin()),
                         std::make_move_iterator(section.end()));
    };
    add_section(doc.question);
    for (const std::string& choice : doc.choices) add_section(choice);
    add_section(doc.solution);
    add_section(doc.lecture);
  }
  a.question_words = detail::word_count(doc.question);
  a.solution_words = detail::word_count(doc.solution);
  a.lecture_words = detail::word_count(doc.lecture);
  return a;
}

// ---------------------------------------------------------------------------
// Feature groups. Each fills its slice of the vector; compute_static_vector
// composes all of them.
// ---------------------------------------------------------------------------

inline void surface_counts(const DocumentAnalysis& a, const SenseLexicon& lex,
                           StaticFeatureVector& v) {
  v[StaticFeature::n_words_q] = a.question_words;
  v[StaticFeature::n_words_a_solution] = a.solution_words;
  v[StaticFeature::n_words_a_lecture] = a.lecture_words;
  v[StaticFeature::Text_Length] = static_cast<double>(a.full_text.size());

  int words = 0, complex_words = 0, content = 0, content_no_stop = 0;
  int syllables = 0, digits = 0, commas = 0;
  std::unordered_set<std::string> unique_words;
  std::vector<double> alpha_lens;
  for (char ch : a.full_text) {
    if (is_ascii_digit(static_cast<unsigned char>(ch))) ++digits;
    if (ch == ',') ++commas;
  }
  for (const Sentence& s : a.sentences) {
    for (const Token& t : s.tokens) {
      if (t.char_len >= 1) alpha_lens.push_back(t.char_len);
      const bool content_pos = t.pos == Pos::Noun || t.pos == Pos::Verb ||
                               t.pos == Pos::Adj || t.pos == Pos::Adv;
      if (content_pos) {
        ++content;
        if (!lex.is_stopword(t.surface)) ++content_no_stop;
      }
      if (!t.is_word()) continue;
      ++words;
      syllables += t.syllables;
      if (t.syllables >= 3) ++complex_words;
      unique_words.insert(to_lower(t.surface));
    }
  }
  v[StaticFeature::Word_Count] = words;
  v[StaticFeature::Num_Numbers] = digits;
  v[StaticFeature::Num_Commas] = commas;
  v[StaticFeature::Num_Complex_Words] = complex_words;
  v[StaticFeature::Num_Unique_Words] = static_cast<double>(unique_words.size());
  v[StaticFeature::Num_Content_Words] = content;
  v[StaticFeature::Num_Content_Words_No_Stopwords] = content_no_stop;
  v[StaticFeature::Word_Length_Syllables] =
      words > 0 ? static_cast<double>(syllables) / words : 0.0;
  v[StaticFeature::Avg_Sentence_Length] =
      !a.sentences.empty() ? static_cast<double>(words) / a.sentences.size()
                           : 0.0;
  v[StaticFeature::Word_Length_Std_Dev] = stats::population_std(alpha_lens);
}

inline void syntactic_counts(const DocumentAnalysis& a, const SenseLexicon& lex,
                             StaticFeatureVector& v) {
  int nouns = 0, verbs = 0, adjectives = 0, adverbs = 0;
  int prep_phrases = 0, noun_phrases = 0, verb_phrases = 0;
  int np_token_total = 0;
  int passive_vps = 0, agentless = 0;
  int negated_stem = 0, negated_lead_in = 0;
  double words_before_verb_sum = 0;
  int sentences_with_verb = 0;
  double noun_depth_sum = 0, verb_depth_sum = 0;
  int noun_count_for_depth = 0, verb_count_for_depth = 0;

  for (const Sentence& s : a.sentences) {
    for (const Token& t : s.tokens) {
      switch (t.pos) {
        case Pos::Noun: ++nouns; break;
        case Pos::Verb:
        case Pos::Aux: ++verbs; break;
        case Pos::Adj: ++adjectives; break;
        case Pos::Adv: ++adverbs; break;
        default: break;
      }
      if (t.pos == Pos::Noun) {
        noun_depth_sum += t.depth;
        ++noun_count_for_depth;
      }
      if (t.pos == Pos::Verb || t.pos == Pos::Aux) {
        verb_depth_sum += t.depth;
        ++verb_count_for_depth;
      }
      // prefix negation, matched against the lexicon
      if (t.is_word()) {
        const std::string lower = to_lower(t.surface);
        for (const std::string& prefix : lex.negation_prefixes()) {
          if (lower.size() > prefix.size() + 2 &&
              lower.compare(0, prefix.size(), prefix) == 0) {
            const std::string remainder = lower.substr(prefix.size());
            if (lex.has_lemma(remainder) || lex.has_lemma(lemmatize(remainder))) {
              ++negated_stem;
              break;
            }
          }
        }
      }
    }
    if (!s.tokens.empty() &&
        wordlists::lead_in_negators().count(to_lower(s.tokens[0].surface)))
      ++negated_lead_in;

    noun_phrases += static_cast<int>(s.noun_phrases.size());
    for (const Span& np : s.noun_phrases) np_token_total += np.length();
    verb_phrases += static_cast<int>(s.verb_phrases.size());
    for (const Span& vp : s.verb_phrases) {
      bool passive = false;
      for (const PassiveSpan& ps : s.passives) {
        if (ps.span.begin < vp.end && vp.begin < ps.span.end) passive = true;
      }
      if (passive) ++passive_vps;
    }
    for (const PassiveSpan& ps : s.passives)
      if (ps.agentless) ++agentless;

    // ADP token directly heading a noun phrase
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      if (s.tokens[i].pos != Pos::Adp) continue;
      for (const Span& np : s.noun_phrases) {
        if (np.begin == static_cast<int>(i) + 1) {
          ++prep_phrases;
          break;
        }
      }
    }

    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      if (s.tokens[i].pos == Pos::Verb || s.tokens[i].pos == Pos::Aux) {
        words_before_verb_sum += static_cast<double>(i);
        ++sentences_with_verb;
        break;
      }
    }
  }

  const int active_vps = verb_phrases - passive_vps;
  v[StaticFeature::Nouns] = nouns;
  v[StaticFeature::Verbs] = verbs;
  v[StaticFeature::Adjectives] = adjectives;
  v[StaticFeature::Adverbs] = adverbs;
  v[StaticFeature::Num_Prepositional_Phrases] = prep_phrases;
  v[StaticFeature::Num_Negated_Words_Stem] = negated_stem;
  v[StaticFeature::Num_Negated_Words_Lead_In] = negated_lead_in;
  v[StaticFeature::Num_Main_Noun_Phrases] = noun_phrases;
  v[StaticFeature::Avg_Main_NP_Length] =
      noun_phrases > 0 ? static_cast<double>(np_token_total) / noun_phrases
                       : 0.0;
  v[StaticFeature::Num_Verb_Phrases] = verb_phrases;
  v[StaticFeature::Prop_Active_Voice_Verbs] =
      verb_phrases > 0 ? static_cast<double>(active_vps) / verb_phrases : 0.0;
  v[StaticFeature::Prop_Passive_Voice_Verbs] =
      verb_phrases > 0 ? static_cast<double>(passive_vps) / verb_phrases : 0.0;
  // capped, not infinite, when no passives
  v[StaticFeature::Ratio_Active_to_Passive_Verbs] =
      passive_vps > 0 ? static_cast<double>(active_vps) / passive_vps
                      : static_cast<double>(active_vps);
  v[StaticFeature::Num_Words_Before_Main_Verb] =
      sentences_with_verb > 0 ? words_before_verb_sum / sentences_with_verb
                              : 0.0;
  v[StaticFeature::Num_Agentless_Passive_Constructions] = agentless;
  v[StaticFeature::Distance_To_Root_Nouns] =
      noun_count_for_depth > 0 ? noun_depth_sum / noun_count_for_depth : 0.0;
  v[StaticFeature::Distance_To_Root_Verbs] =
      verb_count_for_depth > 0 ? verb_depth_sum / verb_count_for_depth : 0.0;
}

inline void sense_stats(const DocumentAnalysis& a, const SenseLexicon& lex,
                        StaticFeatureVector& v) {
  int polysemic = 0;
  long long total = 0, content = 0, nouns = 0, verbs = 0, non_aux_verbs = 0;
  long long adjectives = 0, adverbs = 0;
  for (const Sentence& s : a.sentences) {
    for (const Token& t : s.tokens) {
      const int senses = lex.sense_count(t.lemma, t.pos);
      if (senses > 1) ++polysemic;
      total += senses;
      const bool is_verb = t.pos == Pos::Verb || t.pos == Pos::Aux;
      if (t.pos == Pos::Noun || t.pos == Pos::Verb || t.pos == Pos::Adj ||
          t.pos == Pos::Adv)
        content += senses;
      if (t.pos == Pos::Noun) nouns += senses;
      if (is_verb) {
        verbs += senses;
        if (!wordlists::auxiliary_lemmas().count(t.lemma))
          non_aux_verbs += senses;
      }
      if (t.pos == Pos::Adj) adjectives += senses;
      if (t.pos == Pos::Adv) adverbs += senses;
    }
  }
  v[StaticFeature::Num_Polysemic_Words] = polysemic;
  v[StaticFeature::Num_Word_Senses] = static_cast<double>(total);
  v[StaticFeature::Num_Word_Senses_For_Content_Words] =
      static_cast<double>(content);
  v[StaticFeature::Num_Word_Senses_For_Nouns] = static_cast<double>(nouns);
  v[StaticFeature::Num_Word_Senses_For_Verbs] = static_cast<double>(verbs);
  v[StaticFeature::Num_Word_Senses_For_Non_Auxiliary_Verbs] =
      static_cast<double>(non_aux_verbs);
  v[StaticFeature::Num_Word_Senses_For_Adjectives] =
      static_cast<double>(adjectives);
  v[StaticFeature::Num_Word_Senses_For_Adverbs] =
      static_cast<double>(adverbs);
}

inline void readability_features(const DocumentAnalysis& a,
                                 StaticFeatureVector& v) {
  const ReadabilityIndices r = readability_indices(gather_counts(a.sentences));
  v[StaticFeature::flesch_kincaid_grade] = r.flesch_kincaid_grade;
  v[StaticFeature::flesch_kincaid_ease] = r.flesch_kincaid_ease;
  v[StaticFeature::coleman_liau_index] = r.coleman_liau_index;
  v[StaticFeature::automated_readability_index] =
      r.automated_readability_index;
  v[StaticFeature::smog_index] = r.smog_index;
  v[StaticFeature::gunning_fog] = r.gunning_fog;
  v[StaticFeature::traenkle_bailer_index] = r.traenkle_bailer_index;
}

/// All 46 features over one document. Throws DegenerateInputError when the
/// full text contains no words.
inline StaticFeatureVector compute_static_vector(
    const EduDocument& doc, const LinguisticResources& resources,
    const std::vector<Sentence>* sidecar = nullptr) {
  const DocumentAnalysis a = analyze_document(doc, resources, sidecar);
  const TextCounts counts = gather_counts(a.sentences);
  if (counts.words == 0)
    throw DegenerateInputError("document " + doc.doc_id + " has no words");
  StaticFeatureVector v;
  surface_counts(a, resources.lexicon, v);
  syntactic_counts(a, resources.lexicon, v);
  sense_stats(a, resources.lexicon, v);
  readability_features(a, v);
  return v;
}

// Spec-shaped convenience wrappers.
inline StaticFeatureVector surface_counts(const EduDocument& doc,
                                          const LinguisticResources& res) {
  StaticFeatureVector v;
  surface_counts(analyze_document(doc, res), res.lexicon, v);
  return v;
}
inline StaticFeatureVector syntactic_counts(const EduDocument& doc,
                                            const LinguisticResources& res) {
  StaticFeatureVector v;
  syntactic_counts(analyze_document(doc, res), res.lexicon, v);
  return v;
}
inline StaticFeatureVector sense_stats(const EduDocument& doc,
                                       const LinguisticResources& res) {
  StaticFeatureVector v;
  sense_stats(analyze_document(doc, res), res.lexicon, v);
  return v;
}

}  // namespace edulevel
