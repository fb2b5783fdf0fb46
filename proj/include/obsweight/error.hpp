#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace obsweight {

enum class ErrorKind {
  Parse,
  Validation,
  Taxonomy,
  Aggregation,
  IncompleteQuestionnaire,
  Lookup,
  Reconciliation,
  UndefinedScore,
  Comparison,
  Conflict,
  UnsupportedSize,
  Io,
};

// Base of every error raised by the library. The kind decides the CLI exit
// code: Io maps to 2, everything else to 1.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Taxonomy: return "taxonomy";
    case ErrorKind::Aggregation: return "aggregation";
    case ErrorKind::IncompleteQuestionnaire: return "incomplete-questionnaire";
    case ErrorKind::Lookup: return "lookup";
    case ErrorKind::Reconciliation: return "reconciliation";
    case ErrorKind::UndefinedScore: return "undefined-score";
    case ErrorKind::Comparison: return "comparison";
    case ErrorKind::Conflict: return "conflict";
    case ErrorKind::UnsupportedSize: return "unsupported-size";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

// Error that carries a list of individual problems (gaps, orphans, ...).
class ListError : public Error {
public:
  ListError(ErrorKind kind, const std::string& headline, std::vector<std::string> items)
      : Error(kind, compose(headline, items)), items_(std::move(items)) {}

  const std::vector<std::string>& items() const noexcept { return items_; }

private:
  static std::string compose(const std::string& headline, const std::vector<std::string>& items) {
    std::string out = headline;
    for (std::size_t i = 0; i < items.size(); ++i) {
      out += (i == 0) ? ": " : ", ";
      out += items[i];
    }
    return out;
  }

  std::vector<std::string> items_;
};

inline int exit_code_for(ErrorKind kind) noexcept {
  return kind == ErrorKind::Io ? 2 : 1;
}

}  // namespace obsweight
