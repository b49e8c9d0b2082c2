#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace edulevel {

/// Three-way education level collapsed from US K-12 grades.
enum class Level : int { Elementary = 0, Middle = 1, High = 2 };

inline constexpr std::array<Level, 3> kAllLevels = {Level::Elementary,
                                                    Level::Middle, Level::High};

inline const char* to_string(Level level) {
  switch (level) {
    case Level::Elementary: return "elementary";
    case Level::Middle: return "middle";
    case Level::High: return "high";
  }
  return "elementary";
}

/// Label phrasing used in prompts ("elementary school", ...).
inline const char* level_label(Level level) {
  switch (level) {
    case Level::Elementary: return "elementary school";
    case Level::Middle: return "middle school";
    case Level::High: return "high school";
  }
  return "elementary school";
}

inline std::optional<Level> level_from_string(std::string_view s) {
  if (s == "elementary") return Level::Elementary;
  if (s == "middle") return Level::Middle;
  if (s == "high") return Level::High;
  return std::nullopt;
}

// Error taxonomy. Everything user-facing derives from Error so the CLI can
// report one message and exit nonzero.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FormatError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct CapacityError : Error { using Error::Error; };
struct DegenerateInputError : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };
struct TransportError : Error { using Error::Error; };
struct EndpointError : Error { using Error::Error; };
struct CacheError : Error { using Error::Error; };
struct LeakageError : Error { using Error::Error; };

/// One ScienceQA-style item: question, answer choices, solution text,
/// lecture text, optional grade-band label.
struct EduDocument {
  std::string doc_id;
  std::string question;
  std::vector<std::string> choices;
  std::string solution;
  std::string lecture;
  std::optional<Level> level;

  /// Question, choices, solution and lecture joined by single spaces.
  /// Empty sections are skipped so the text never carries stray blanks.
  std::string full_text() const {
    std::string out;
    auto append = [&out](const std::string& part) {
      if (part.empty()) return;
      if (!out.empty()) out += ' ';
      out += part;
    };
    append(question);
    for (const auto& choice : choices) append(choice);
    append(solution);
    append(lecture);
    return out;
  }
};

}  // namespace edulevel
