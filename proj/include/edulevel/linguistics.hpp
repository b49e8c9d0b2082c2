#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "edulevel/text_utils.hpp"
#include "edulevel/types.hpp"

namespace edulevel {

/// Coarse part-of-speech tags.
enum class Pos {
  Noun, Verb, Aux, Adj, Adv, Adp, Det, Pron, Num, Conj, Part, Punct, X
};

inline const char* to_string(Pos pos) {
  switch (pos) {
    case Pos::Noun: return "NOUN";
    case Pos::Verb: return "VERB";
    case Pos::Aux: return "AUX";
    case Pos::Adj: return "ADJ";
    case Pos::Adv: return "ADV";
    case Pos::Adp: return "ADP";
    case Pos::Det: return "DET";
    case Pos::Pron: return "PRON";
    case Pos::Num: return "NUM";
    case Pos::Conj: return "CONJ";
    case Pos::Part: return "PART";
    case Pos::Punct: return "PUNCT";
    case Pos::X: return "X";
  }
  return "X";
}

inline std::optional<Pos> pos_from_string(std::string_view s) {
  static const std::unordered_map<std::string_view, Pos> kMap = {
      {"NOUN", Pos::Noun}, {"VERB", Pos::Verb}, {"AUX", Pos::Aux},
      {"ADJ", Pos::Adj},   {"ADV", Pos::Adv},   {"ADP", Pos::Adp},
      {"DET", Pos::Det},   {"PRON", Pos::Pron}, {"NUM", Pos::Num},
      {"CONJ", Pos::Conj}, {"PART", Pos::Part}, {"PUNCT", Pos::Punct},
      {"X", Pos::X}};
  auto it = kMap.find(s);
  if (it == kMap.end()) return std::nullopt;
  return it->second;
}

struct Token {
  std::string surface;
  std::string lemma;
  Pos pos = Pos::X;
  int char_len = 0;   // alphabetic characters (UTF-8 lead bytes count once)
  int syllables = 0;  // 0 for PUNCT/NUM
  int depth = 1;      // distance to root (approximate unless sidecar-supplied)

  bool is_word() const {
    for (unsigned char c : surface)
      if (is_word_byte(c)) return true;
    return false;
  }
};

/// Half-open token-index span [begin, end).
struct Span {
  int begin = 0;
  int end = 0;
  int length() const { return end - begin; }
};

struct PassiveSpan {
  Span span;
  bool agentless = true;
};

struct Sentence {
  std::vector<Token> tokens;
  std::vector<Span> noun_phrases;
  std::vector<Span> verb_phrases;
  std::vector<PassiveSpan> passives;
};

// ---------------------------------------------------------------------------
// Pinned word lists. Closed-class words always take their closed-class tag;
// the lists are disjoint and checked in the order DET, PRON, AUX, ADP, CONJ,
// PART, NUM-words.
// ---------------------------------------------------------------------------
namespace wordlists {

inline const std::unordered_set<std::string>& determiners() {
  static const std::unordered_set<std::string> s = {
      "a", "an", "the", "this", "that", "these", "those", "each", "every",
      "either", "neither", "some", "any", "no", "another", "both", "all",
      "such", "my", "your", "his", "her", "its", "our", "their"};
  return s;
}

inline const std::unordered_set<std::string>& pronouns() {
  static const std::unordered_set<std::string> s = {
      "i", "you", "he", "she", "it", "we", "they", "me", "him", "us", "them",
      "mine", "yours", "hers", "ours", "theirs", "myself", "yourself",
      "himself", "herself", "itself", "ourselves", "yourselves", "themselves",
      "who", "whom", "whose", "which", "anyone", "anything", "everyone",
      "everything", "someone", "something", "nothing", "nobody", "one"};
  return s;
}

inline const std::unordered_set<std::string>& auxiliaries() {
  static const std::unordered_set<std::string> s = {
      "be", "is", "are", "was", "were", "been", "being", "am", "have", "has",
      "had", "having", "do", "does", "did", "will", "would", "can", "could",
      "shall", "should", "may", "might", "must", "ought",
      // clitic contractions of auxiliaries
      "'re", "'ve", "'ll", "'d", "'m"};
  return s;
}

/// Lemmas counted as auxiliary verbs for the "non-auxiliary verb" metrics.
inline const std::unordered_set<std::string>& auxiliary_lemmas() {
  static const std::unordered_set<std::string> s = {
      "be", "have", "do", "will", "would", "can", "could", "shall", "should",
      "may", "might", "must", "ought"};
  return s;
}

inline const std::unordered_set<std::string>& adpositions() {
  static const std::unordered_set<std::string> s = {
      "of", "in", "on", "at", "by", "for", "with", "from", "into", "onto",
      "over", "under", "between", "among", "through", "during", "after",
      "before", "above", "below", "about", "against", "across", "behind",
      "beyond", "within", "without", "toward", "towards", "upon", "off",
      "near", "along", "around", "amid", "despite", "except", "per",
      "inside", "outside", "beneath", "beside", "like"};
  return s;
}

inline const std::unordered_set<std::string>& conjunctions() {
  static const std::unordered_set<std::string> s = {
      "and", "or", "but", "nor", "so", "yet", "because", "although", "though",
      "while", "whereas", "if", "unless", "until", "since", "when",
      "whenever", "where", "wherever", "whether", "than", "as"};
  return s;
}

inline const std::unordered_set<std::string>& particles() {
  static const std::unordered_set<std::string> s = {"to", "not", "n't", "'s"};
  return s;
}

/// Subordinating conjunctions that count as clause-boundary markers for the
/// depth approximation (together with commas).
inline const std::unordered_set<std::string>& clause_markers() {
  static const std::unordered_set<std::string> s = {
      "because", "although", "though", "since", "while", "whereas", "if",
      "unless", "until", "when", "whenever", "where", "wherever", "that",
      "which", "who", "whom", "whose"};
  return s;
}

/// Irregular past participles that do not end in -ed/-en.
inline const std::unordered_set<std::string>& irregular_participles() {
  static const std::unordered_set<std::string> s = {
      "brought", "bought", "built", "caught", "taught", "thought", "done",
      "made", "said", "told", "sold", "found", "felt", "held", "kept",
      "left", "lost", "meant", "met", "paid", "read", "sent", "sung",
      "sunk", "drunk", "begun", "won", "worn", "torn", "sworn", "born",
      "borne", "known", "shown", "grown", "thrown", "drawn", "blown",
      "flown", "sewn", "put", "set", "cut", "hit", "hurt", "let", "shut",
      "understood", "stood", "heard", "laid", "led", "fed", "bred",
      "spent", "bent", "lent", "swept", "slept", "wept", "crept"};
  return s;
}

inline const std::unordered_set<std::string>& be_forms() {
  // pinned passive trigger list
  static const std::unordered_set<std::string> s = {
      "be", "is", "are", "was", "were", "been", "being"};
  return s;
}

inline const std::unordered_map<std::string, std::string>& irregular_lemmas() {
  static const std::unordered_map<std::string, std::string> m = {
      {"is", "be"},      {"are", "be"},     {"was", "be"},
      {"were", "be"},    {"been", "be"},    {"being", "be"},
      {"am", "be"},      {"'m", "be"},      {"'re", "be"},
      {"has", "have"},   {"had", "have"},   {"having", "have"},
      {"'ve", "have"},   {"does", "do"},    {"did", "do"},
      {"done", "do"},    {"'ll", "will"},   {"went", "go"},
      {"gone", "go"},    {"ran", "run"},    {"ate", "eat"},
      {"eaten", "eat"},  {"saw", "see"},    {"seen", "see"},
      {"made", "make"},  {"said", "say"},   {"took", "take"},
      {"taken", "take"}, {"came", "come"},  {"gave", "give"},
      {"given", "give"}, {"knew", "know"},  {"known", "know"},
      {"got", "get"},    {"gotten", "get"}, {"wrote", "write"},
      {"written", "write"}, {"children", "child"}, {"men", "man"},
      {"women", "woman"}, {"feet", "foot"}, {"teeth", "tooth"},
      {"mice", "mouse"}, {"better", "good"}, {"best", "good"},
      {"found", "find"}, {"thought", "think"}, {"grew", "grow"},
      {"grown", "grow"}, {"left", "leave"}, {"felt", "feel"}};
  return m;
}

inline const std::vector<std::string>& default_negation_prefixes() {
  static const std::vector<std::string> v = {"un", "in", "im", "ir",
                                             "dis", "non"};
  return v;
}

inline const std::unordered_set<std::string>& lead_in_negators() {
  static const std::unordered_set<std::string> s = {"no", "not", "never",
                                                    "n't"};
  return s;
}

}  // namespace wordlists

// ---------------------------------------------------------------------------
// Lemmatizer: lowercased surface with pinned inflectional suffix stripping.
// ---------------------------------------------------------------------------
namespace detail {

inline bool is_vowel_letter(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

inline bool is_closed_class(const std::string& lower) {
  using namespace wordlists;
  return determiners().count(lower) || pronouns().count(lower) ||
         auxiliaries().count(lower) || adpositions().count(lower) ||
         conjunctions().count(lower) || particles().count(lower);
}

/// Undouble a final doubled consonant after suffix stripping ("stopp"→"stop");
/// 'l' and 's' are left alone so "tell"/"class" survive.
inline void undouble(std::string& stem) {
  const std::size_t n = stem.size();
  if (n >= 3 && stem[n - 1] == stem[n - 2] && !is_vowel_letter(stem[n - 1]) &&
      stem[n - 1] != 'l' && stem[n - 1] != 's') {
    stem.pop_back();
  }
}

/// Restore the silent e a stem lost to -ing/-ed ("mak"→"make"): stem ends in
/// consonant preceded by exactly one vowel preceded by a consonant.
inline void restore_e(std::string& stem) {
  const std::size_t n = stem.size();
  if (n >= 3 && !is_vowel_letter(stem[n - 1]) && is_vowel_letter(stem[n - 2]) &&
      stem[n - 2] != 'y' && !is_vowel_letter(stem[n - 3])) {
    stem += 'e';
  }
}

}  // namespace detail

inline std::string lemmatize(std::string_view surface) {
  std::string w = to_lower(surface);
  const auto& irregular = wordlists::irregular_lemmas();
  if (auto it = irregular.find(w); it != irregular.end()) return it->second;
  if (detail::is_closed_class(w)) return w;

  const std::size_t n = w.size();
  auto ends_with = [&w](std::string_view suf) {
    return w.size() >= suf.size() &&
           w.compare(w.size() - suf.size(), suf.size(), suf) == 0;
  };

  if (n >= 5 && ends_with("ies")) {
    return w.substr(0, n - 3) + "y";
  }
  if (n >= 6 && ends_with("ing")) {
    std::string stem = w.substr(0, n - 3);
    detail::undouble(stem);
    if (stem == w.substr(0, n - 3)) detail::restore_e(stem);
    return stem;
  }
  if (n >= 4 && ends_with("ed")) {
    if (ends_with("eed")) return w.substr(0, n - 1);  // "freed"→"free"
    if (n >= 5 && ends_with("ied")) return w.substr(0, n - 3) + "y";
    std::string stem = w.substr(0, n - 2);
    detail::undouble(stem);
    if (stem == w.substr(0, n - 2)) detail::restore_e(stem);
    return stem;
  }
  if (n >= 4 && ends_with("es")) {
    if (ends_with("sses")) return w.substr(0, n - 2);
    if (ends_with("xes") || ends_with("ches") || ends_with("shes") ||
        ends_with("zes") || ends_with("oes"))
      return w.substr(0, n - 2);
    return w.substr(0, n - 1);  // "makes"→"make"
  }
  if (n >= 4 && ends_with("s") && !ends_with("ss") && !ends_with("is") &&
      !ends_with("us")) {
    return w.substr(0, n - 1);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Syllable counting
// ---------------------------------------------------------------------------

/// Optional word→count dictionary (TSV). Heuristic fallback keeps the
/// artifact self-contained when no pronunciation data is shipped.
class SyllableDict {
 public:
  SyllableDict() = default;

  static SyllableDict load(const std::filesystem::path& path) {
    SyllableDict dict;
    int line_no = 0;
    std::istringstream in(read_file(path));
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      auto cols = split_on(t, '\t');
      if (cols.size() != 2)
        throw FormatError("syllable dictionary " + path.string() + " line " +
                          std::to_string(line_no) + ": expected 2 columns");
      int count = 0;
      try {
        count = std::stoi(cols[1]);
      } catch (const std::exception&) {
        throw FormatError("syllable dictionary " + path.string() + " line " +
                          std::to_string(line_no) + ": bad count");
      }
      dict.counts_[to_lower(cols[0])] = count;
    }
    return dict;
  }

  std::optional<int> lookup(std::string_view word) const {
    auto it = counts_.find(to_lower(word));
    if (it == counts_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t size() const { return counts_.size(); }

 private:
  std::unordered_map<std::string, int> counts_;
};

/// Heuristic syllable count: maximal vowel groups {a,e,i,o,u,y}, minus a
/// trailing silent e (kept when the word ends in consonant+"le"), minimum 1
/// for words containing any alphabetic character. Non-alphabetic input → 0.
inline int count_syllables(std::string_view word) {
  // only ASCII letters take part; anything else breaks vowel groups
  std::string letters;
  letters.reserve(word.size());
  bool any_alpha = false;
  for (unsigned char c : word) {
    if (is_ascii_alpha(c)) {
      letters.push_back(ascii_lower(static_cast<char>(c)));
      any_alpha = true;
    } else if (is_utf8_lead(c)) {
      any_alpha = true;
      letters.push_back('\0');  // non-ASCII letter: consonant placeholder
    }
  }
  if (!any_alpha) return 0;

  int groups = 0;
  bool in_group = false;
  for (char c : letters) {
    const bool vowel = detail::is_vowel_letter(c);
    if (vowel && !in_group) ++groups;
    in_group = vowel;
  }

  const std::size_t n = letters.size();
  if (n >= 2 && letters[n - 1] == 'e' &&
      !detail::is_vowel_letter(letters[n - 2])) {
    const bool consonant_le =
        n >= 3 && letters[n - 2] == 'l' && !detail::is_vowel_letter(letters[n - 3]);
    if (!consonant_le) --groups;
  }
  return groups < 1 ? 1 : groups;
}

inline int count_syllables(std::string_view word, const SyllableDict* dict) {
  if (dict) {
    if (auto hit = dict->lookup(word)) return *hit;
  }
  return count_syllables(word);
}

// ---------------------------------------------------------------------------
// Tokenizer: whitespace split, leading/trailing punctuation detached one
// character at a time, English clitics split off the end.
// ---------------------------------------------------------------------------
namespace detail {

inline int alphabetic_char_count(std::string_view s) {
  int n = 0;
  for (unsigned char c : s) {
    if (is_ascii_alpha(c) || is_utf8_lead(c)) ++n;
  }
  return n;
}

inline void split_clitics(std::string core, std::vector<std::string>& out) {
  static const std::vector<std::string> kClitics = {"n't", "'re", "'ve",
                                                    "'ll", "'s",  "'d"};
  std::vector<std::string> tail;
  bool matched = true;
  while (matched && core.size() > 1) {
    matched = false;
    const std::string lower = to_lower(core);
    for (const auto& clitic : kClitics) {
      if (lower.size() > clitic.size() &&
          lower.compare(lower.size() - clitic.size(), clitic.size(), clitic) ==
              0) {
        tail.push_back(core.substr(core.size() - clitic.size()));
        core.erase(core.size() - clitic.size());
        matched = true;
        break;
      }
    }
  }
  out.push_back(std::move(core));
  for (auto it = tail.rbegin(); it != tail.rend(); ++it)
    out.push_back(std::move(*it));
}

}  // namespace detail

inline std::vector<Token> tokenize(std::string_view text) {
  std::vector<std::string> surfaces;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && is_ascii_space(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= n) break;
    std::size_t start = i;
    while (i < n && !is_ascii_space(static_cast<unsigned char>(text[i]))) ++i;
    std::string_view chunk = text.substr(start, i - start);

    // peel leading punctuation
    std::size_t b = 0, e = chunk.size();
    while (b < e && !is_word_byte(static_cast<unsigned char>(chunk[b]))) {
      surfaces.emplace_back(1, chunk[b]);
      ++b;
    }
    // peel trailing punctuation (collected, emitted after the core)
    std::vector<char> trailing;
    while (e > b && !is_word_byte(static_cast<unsigned char>(chunk[e - 1]))) {
      trailing.push_back(chunk[e - 1]);
      --e;
    }
    if (e > b) {
      detail::split_clitics(std::string(chunk.substr(b, e - b)), surfaces);
    }
    for (auto it = trailing.rbegin(); it != trailing.rend(); ++it)
      surfaces.emplace_back(1, *it);
  }

  std::vector<Token> tokens;
  tokens.reserve(surfaces.size());
  for (auto& s : surfaces) {
    Token t;
    t.char_len = detail::alphabetic_char_count(s);
    t.syllables = count_syllables(s);
    t.lemma = lemmatize(s);
    t.surface = std::move(s);
    tokens.push_back(std::move(t));
  }
  return tokens;
}

// ---------------------------------------------------------------------------
// Sentence splitting
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& default_abbreviations() {
  static const std::vector<std::string> v = {
      "dr",  "mr",   "mrs", "ms",  "prof", "sr",   "jr",  "st",
      "etc", "e.g",  "i.e", "vs",  "cf",   "fig",  "no",  "al",
      "approx", "dept", "inc", "ltd", "co", "corp", "ave", "blvd"};
  return v;
}

/// Sentences end at {., !, ?} followed by whitespace + uppercase or by
/// end-of-text. A '.' is suppressed when the word before it is a listed
/// abbreviation. Text without a terminator yields a single sentence.
inline std::vector<std::string> split_sentences(
    std::string_view text,
    const std::vector<std::string>& abbreviations = default_abbreviations()) {
  std::set<std::string> abbrev(abbreviations.begin(), abbreviations.end());
  std::vector<std::string> sentences;
  const std::size_t n = text.size();
  std::size_t start = 0;

  auto word_before = [&](std::size_t pos) -> std::string {
    // maximal run of non-whitespace immediately before pos, leading
    // punctuation stripped
    std::size_t e = pos;
    std::size_t b = e;
    while (b > start && !is_ascii_space(static_cast<unsigned char>(text[b - 1])))
      --b;
    while (b < e && !is_word_byte(static_cast<unsigned char>(text[b]))) ++b;
    return to_lower(text.substr(b, e - b));
  };

  std::size_t i = 0;
  while (i < n) {
    const char c = text[i];
    if (c == '.' || c == '!' || c == '?') {
      const bool is_period = c == '.';
      // consume the full terminator run (ellipses, "?!")
      std::size_t term_end = i + 1;
      while (term_end < n &&
             (text[term_end] == '.' || text[term_end] == '!' ||
              text[term_end] == '?'))
        ++term_end;
      // closing quotes/brackets belong to the sentence
      while (term_end < n && (text[term_end] == '"' || text[term_end] == '\'' ||
                              text[term_end] == ')' || text[term_end] == ']'))
        ++term_end;

      bool boundary = false;
      if (term_end >= n) {
        boundary = true;
      } else if (is_ascii_space(static_cast<unsigned char>(text[term_end]))) {
        std::size_t next = term_end;
        while (next < n && is_ascii_space(static_cast<unsigned char>(text[next])))
          ++next;
        boundary = next < n && text[next] >= 'A' && text[next] <= 'Z';
      }
      if (boundary && is_period && term_end - i == 1 &&
          abbrev.count(word_before(i)) > 0) {
        boundary = false;
      }
      if (boundary) {
        std::string sentence = trim(text.substr(start, term_end - start));
        if (!sentence.empty()) sentences.push_back(std::move(sentence));
        start = term_end;
      }
      i = term_end;
    } else {
      ++i;
    }
  }
  std::string rest = trim(text.substr(start));
  if (!rest.empty()) sentences.push_back(std::move(rest));
  return sentences;
}

// ---------------------------------------------------------------------------
// Sense lexicon
// ---------------------------------------------------------------------------

/// Read-only lexicon: (lemma, pos) → sense count, a stopword set, a majority
/// tag per lemma (derived from the sense entries), and negation prefixes.
class SenseLexicon {
 public:
  SenseLexicon() : negation_prefixes_(wordlists::default_negation_prefixes()) {}

  /// TSV columns: lemma, pos, sense_count.
  static SenseLexicon load(const std::filesystem::path& sense_tsv) {
    SenseLexicon lex;
    int line_no = 0;
    std::istringstream in(read_file(sense_tsv));
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      auto cols = split_on(t, '\t');
      if (cols.size() != 3)
        throw FormatError("sense lexicon " + sense_tsv.string() + " line " +
                          std::to_string(line_no) + ": expected 3 columns");
      auto pos = pos_from_string(cols[1]);
      if (!pos)
        throw FormatError("sense lexicon " + sense_tsv.string() + " line " +
                          std::to_string(line_no) + ": unknown pos " + cols[1]);
      int count = 0;
      try {
        count = std::stoi(cols[2]);
      } catch (const std::exception&) {
        throw FormatError("sense lexicon " + sense_tsv.string() + " line " +
                          std::to_string(line_no) + ": bad sense count");
      }
      if (count < 1)
        throw FormatError("sense lexicon " + sense_tsv.string() + " line " +
                          std::to_string(line_no) + ": sense_count must be >= 1");
      lex.add_entry(to_lower(cols[0]), *pos, count);
    }
    return lex;
  }

  void add_entry(const std::string& lemma, Pos pos, int sense_count) {
    entries_[key(lemma, pos)] = sense_count;
    auto [it, inserted] = majority_.try_emplace(lemma, pos, sense_count);
    if (!inserted && sense_count > it->second.second) {
      it->second = {pos, sense_count};
    }
  }

  void set_stopwords(std::vector<std::string> words) {
    stopwords_.clear();
    for (auto& w : words) stopwords_.insert(to_lower(w));
  }

  void set_negation_prefixes(std::vector<std::string> prefixes) {
    negation_prefixes_ = std::move(prefixes);
  }

  /// Stored sense count or 0 when absent. AUX folds to VERB for lookup.
  int sense_count(std::string_view lemma, Pos pos) const {
    if (pos == Pos::Aux) pos = Pos::Verb;
    auto it = entries_.find(key(std::string(lemma), pos));
    return it == entries_.end() ? 0 : it->second;
  }

  bool is_polysemic(std::string_view lemma, Pos pos) const {
    return sense_count(lemma, pos) > 1;
  }

  std::optional<Pos> majority_tag(std::string_view lemma) const {
    auto it = majority_.find(std::string(lemma));
    if (it == majority_.end()) return std::nullopt;
    return it->second.first;
  }

  bool is_stopword(std::string_view word) const {
    return stopwords_.count(to_lower(word)) > 0;
  }

  /// Any entry under any pos; used by the prefix-negation metric.
  bool has_lemma(std::string_view lemma) const {
    return majority_.count(std::string(lemma)) > 0;
  }

  const std::vector<std::string>& negation_prefixes() const {
    return negation_prefixes_;
  }

  std::size_t entry_count() const { return entries_.size(); }
  const std::unordered_set<std::string>& stopwords() const { return stopwords_; }

 private:
  static std::string key(const std::string& lemma, Pos pos) {
    return lemma + '\x1f' + to_string(pos);
  }

  std::unordered_map<std::string, int> entries_;
  std::unordered_map<std::string, std::pair<Pos, int>> majority_;
  std::unordered_set<std::string> stopwords_;
  std::vector<std::string> negation_prefixes_;
};

inline int sense_count(const SenseLexicon& lexicon, std::string_view lemma,
                       Pos pos) {
  return lexicon.sense_count(lemma, pos);
}

// ---------------------------------------------------------------------------
// POS tagging: closed-class lists, then lexicon majority tag, then suffix
// rules, then NOUN.
// ---------------------------------------------------------------------------
namespace detail {

inline bool looks_numeric(const std::string& surface) {
  bool digit = false;
  for (unsigned char c : surface) {
    if (is_ascii_digit(c)) {
      digit = true;
    } else if (c != '.' && c != ',' && c != '-' && c != '/' && c != ':' &&
               c != '%') {
      return false;
    }
  }
  return digit;
}

inline std::optional<Pos> suffix_tag(const std::string& lower) {
  static const std::vector<std::pair<std::string, Pos>> kRules = {
      {"ly", Pos::Adv},    {"tion", Pos::Noun}, {"sion", Pos::Noun},
      {"ment", Pos::Noun}, {"ness", Pos::Noun}, {"ity", Pos::Noun},
      {"ship", Pos::Noun}, {"hood", Pos::Noun}, {"ism", Pos::Noun},
      {"ize", Pos::Verb},  {"ise", Pos::Verb},  {"ify", Pos::Verb},
      {"ate", Pos::Verb},  {"ous", Pos::Adj},   {"ful", Pos::Adj},
      {"able", Pos::Adj},  {"ible", Pos::Adj},  {"ive", Pos::Adj},
      {"ical", Pos::Adj},  {"ic", Pos::Adj},    {"al", Pos::Adj},
      {"ish", Pos::Adj},   {"less", Pos::Adj},  {"est", Pos::Adj},
      {"ing", Pos::Verb},  {"ed", Pos::Verb}};
  for (const auto& [suffix, pos] : kRules) {
    if (lower.size() > suffix.size() + 1 &&
        lower.compare(lower.size() - suffix.size(), suffix.size(), suffix) == 0)
      return pos;
  }
  return std::nullopt;
}

}  // namespace detail

inline void tag_pos(std::vector<Token>& tokens, const SenseLexicon& lexicon) {
  using namespace wordlists;
  for (Token& tok : tokens) {
    bool has_word_byte = false;
    for (unsigned char c : tok.surface)
      if (is_word_byte(c)) has_word_byte = true;
    if (!has_word_byte) {
      tok.pos = Pos::Punct;
      tok.syllables = 0;
      continue;
    }
    const std::string lower = to_lower(tok.surface);
    if (detail::looks_numeric(lower)) {
      tok.pos = Pos::Num;
      tok.syllables = 0;
      continue;
    }
    if (determiners().count(lower)) { tok.pos = Pos::Det; continue; }
    if (pronouns().count(lower)) { tok.pos = Pos::Pron; continue; }
    if (auxiliaries().count(lower)) { tok.pos = Pos::Aux; continue; }
    if (adpositions().count(lower)) { tok.pos = Pos::Adp; continue; }
    if (conjunctions().count(lower)) { tok.pos = Pos::Conj; continue; }
    if (particles().count(lower)) { tok.pos = Pos::Part; continue; }
    if (auto tag = lexicon.majority_tag(lower)) { tok.pos = *tag; continue; }
    if (auto tag = lexicon.majority_tag(tok.lemma)) { tok.pos = *tag; continue; }
    if (auto tag = detail::suffix_tag(lower)) { tok.pos = *tag; continue; }
    tok.pos = Pos::Noun;
  }
}

// ---------------------------------------------------------------------------
// Phrase chunking: NP = DET? ADJ* NOUN+, VP = maximal run over
// {AUX, VERB, PART, ADV} containing at least one VERB/AUX.
// ---------------------------------------------------------------------------

inline void chunk_phrases(Sentence& sentence) {
  sentence.noun_phrases.clear();
  sentence.verb_phrases.clear();
  const auto& toks = sentence.tokens;
  const int n = static_cast<int>(toks.size());

  int i = 0;
  while (i < n) {
    int j = i;
    if (j < n && toks[j].pos == Pos::Det) ++j;
    while (j < n && toks[j].pos == Pos::Adj) ++j;
    int noun_start = j;
    while (j < n && toks[j].pos == Pos::Noun) ++j;
    if (j > noun_start) {
      sentence.noun_phrases.push_back({i, j});
      i = j;
    } else {
      ++i;
    }
  }

  i = 0;
  while (i < n) {
    auto in_run = [&](int k) {
      const Pos p = toks[k].pos;
      return p == Pos::Aux || p == Pos::Verb || p == Pos::Part || p == Pos::Adv;
    };
    if (!in_run(i)) { ++i; continue; }
    int j = i;
    bool has_verb = false;
    while (j < n && in_run(j)) {
      if (toks[j].pos == Pos::Verb || toks[j].pos == Pos::Aux) has_verb = true;
      ++j;
    }
    if (has_verb) sentence.verb_phrases.push_back({i, j});
    i = j;
  }
}

// ---------------------------------------------------------------------------
// Voice detection: be-form followed within 2 tokens by a past participle;
// agentless unless "by" appears within 3 tokens after the participle.
// ---------------------------------------------------------------------------
namespace detail {

inline bool looks_like_participle(const Token& tok) {
  if (tok.pos != Pos::Verb && tok.pos != Pos::Aux) return false;
  const std::string lower = to_lower(tok.surface);
  if (wordlists::irregular_participles().count(lower)) return true;
  auto ends = [&lower](std::string_view suf) {
    return lower.size() > suf.size() &&
           lower.compare(lower.size() - suf.size(), suf.size(), suf) == 0;
  };
  return ends("ed") || ends("en");
}

}  // namespace detail

inline void detect_voice(Sentence& sentence) {
  sentence.passives.clear();
  const auto& toks = sentence.tokens;
  const int n = static_cast<int>(toks.size());
  int next_free = 0;  // keeps spans non-overlapping
  for (int i = 0; i < n; ++i) {
    if (i < next_free) continue;
    if (!wordlists::be_forms().count(to_lower(toks[i].surface))) continue;
    for (int j = i + 1; j <= i + 2 && j < n; ++j) {
      if (!detail::looks_like_participle(toks[j])) continue;
      bool agentless = true;
      for (int k = j + 1; k <= j + 3 && k < n; ++k) {
        if (to_lower(toks[k].surface) == "by") {
          agentless = false;
          break;
        }
      }
      sentence.passives.push_back({{i, j + 1}, agentless});
      next_free = j + 1;
      break;
    }
  }
}

/// Approximate dependency depth: 1 + clause-boundary markers (commas and
/// pinned subordinators) preceding the token in its sentence. Sidecar
/// annotations supply true depths when available.
inline void assign_depths(Sentence& sentence) {
  int markers = 0;
  for (Token& tok : sentence.tokens) {
    tok.depth = 1 + markers;
    if (tok.surface == ",") ++markers;
    else if (wordlists::clause_markers().count(to_lower(tok.surface))) ++markers;
  }
}

// ---------------------------------------------------------------------------
// Full pipeline
// ---------------------------------------------------------------------------

struct LinguisticResources {
  SenseLexicon lexicon;
  SyllableDict syllables;
  std::vector<std::string> abbreviations = default_abbreviations();
  bool use_syllable_dict = false;
};

inline std::vector<Sentence> annotate(
    std::string_view text, const LinguisticResources& resources) {
  std::vector<Sentence> sentences;
  for (const std::string& raw : split_sentences(text, resources.abbreviations)) {
    Sentence s;
    s.tokens = tokenize(raw);
    if (resources.use_syllable_dict) {
      for (Token& t : s.tokens)
        t.syllables = count_syllables(t.surface, &resources.syllables);
    }
    tag_pos(s.tokens, resources.lexicon);
    for (Token& t : s.tokens) {
      if (t.pos == Pos::Punct || t.pos == Pos::Num) t.syllables = 0;
    }
    chunk_phrases(s);
    detect_voice(s);
    assign_depths(s);
    sentences.push_back(std::move(s));
  }
  return sentences;
}

// ---------------------------------------------------------------------------
// Sidecar annotations: JSON-lines records that replace the built-in
// heuristics with a real parser's output.
// ---------------------------------------------------------------------------

inline std::map<std::string, std::vector<Sentence>> load_external_annotations(
    const std::filesystem::path& path) {
  std::map<std::string, std::vector<Sentence>> out;
  std::istringstream in(read_file(path));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("annotations " + path.string() + " line " +
                        std::to_string(line_no) + ": " + e.what());
    }
    auto require = [&](const nlohmann::json& obj, const char* field)
        -> const nlohmann::json& {
      if (!obj.contains(field))
        throw FormatError("annotations " + path.string() + " line " +
                          std::to_string(line_no) + ": missing field \"" +
                          field + "\"");
      return obj.at(field);
    };
    const std::string doc_id = require(record, "doc_id").get<std::string>();
    std::vector<Sentence> sentences;
    for (const auto& js : require(record, "sentences")) {
      Sentence s;
      for (const auto& jt : require(js, "tokens")) {
        Token t;
        t.surface = require(jt, "surface").get<std::string>();
        const std::string pos_str = require(jt, "pos").get<std::string>();
        auto pos = pos_from_string(pos_str);
        if (!pos)
          throw FormatError("annotations " + path.string() + " line " +
                            std::to_string(line_no) + ": unknown pos \"" +
                            pos_str + "\"");
        t.pos = *pos;
        t.lemma = require(jt, "lemma").get<std::string>();
        t.depth = require(jt, "depth").get<int>();
        t.char_len = detail::alphabetic_char_count(t.surface);
        t.syllables = (t.pos == Pos::Punct || t.pos == Pos::Num)
                          ? 0
                          : count_syllables(t.surface);
        s.tokens.push_back(std::move(t));
      }
      auto read_spans = [&](const char* field) {
        std::vector<Span> spans;
        for (const auto& jp : require(js, field)) {
          if (!jp.is_array() || jp.size() != 2)
            throw FormatError("annotations " + path.string() + " line " +
                              std::to_string(line_no) + ": bad span in \"" +
                              field + "\"");
          Span sp{jp[0].get<int>(), jp[1].get<int>()};
          if (sp.begin < 0 || sp.end > static_cast<int>(s.tokens.size()) ||
              sp.begin >= sp.end)
            throw FormatError("annotations " + path.string() + " line " +
                              std::to_string(line_no) + ": span out of bounds in \"" +
                              field + "\"");
          spans.push_back(sp);
        }
        return spans;
      };
      s.noun_phrases = read_spans("noun_phrases");
      s.verb_phrases = read_spans("verb_phrases");
      for (const auto& jp : require(js, "passives")) {
        PassiveSpan ps;
        const auto& span = require(jp, "span");
        if (!span.is_array() || span.size() != 2)
          throw FormatError("annotations " + path.string() + " line " +
                            std::to_string(line_no) + ": bad passive span");
        ps.span = {span[0].get<int>(), span[1].get<int>()};
        ps.agentless = require(jp, "agentless").get<bool>();
        s.passives.push_back(ps);
      }
      sentences.push_back(std::move(s));
    }
    out[doc_id] = std::move(sentences);
  }
  return out;
}

/// Sidecar doc_ids must refer to known documents.
inline void validate_annotation_ids(
    const std::map<std::string, std::vector<Sentence>>& annotations,
    const std::set<std::string>& known_ids) {
  for (const auto& [doc_id, unused] : annotations) {
    if (!known_ids.count(doc_id))
      throw FormatError("annotations refer to unknown doc_id: " + doc_id);
  }
}

}  // namespace edulevel
