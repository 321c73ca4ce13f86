#pragma once

#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace exo {

/// Operands whose shapes do not fit together (mismatched source/target, bad index).
class ShapeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A structure that was supposed to satisfy a law does not.
class ValidationError : public std::invalid_argument {
public:
  ValidationError(std::string law, std::vector<std::size_t> witness, const std::string& what)
      : std::invalid_argument(what), law_(std::move(law)), witness_(std::move(witness)) {}

  const std::string& law() const noexcept { return law_; }
  const std::vector<std::size_t>& witness() const noexcept { return witness_; }

private:
  std::string law_;
  std::vector<std::size_t> witness_;
};

/// A multi-stage computation failed; `stage()` names the step.
class StageError : public std::runtime_error {
public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

private:
  std::string stage_;
};

struct Issue {
  std::string code;
  std::string message;
  std::vector<std::size_t> witness;
};

/// Accumulated findings of a total checker. Empty means the checked law holds.
struct ValidationReport {
  std::vector<Issue> issues;
  std::size_t checked = 0;

  bool ok() const noexcept { return issues.empty(); }

  void add(std::string code, std::string message, std::vector<std::size_t> witness = {}) {
    issues.push_back({std::move(code), std::move(message), std::move(witness)});
  }

  void merge(const ValidationReport& other, const std::string& prefix = {}) {
    checked += other.checked;
    for (const auto& issue : other.issues) {
      issues.push_back({issue.code, prefix.empty() ? issue.message : prefix + ": " + issue.message,
                        issue.witness});
    }
  }

  std::string to_string() const {
    std::ostringstream out;
    for (const auto& issue : issues) {
      out << issue.code << ": " << issue.message;
      if (!issue.witness.empty()) {
        out << " [witness";
        for (auto w : issue.witness) out << ' ' << w;
        out << ']';
      }
      out << '\n';
    }
    return out.str();
  }
};

namespace detail {

template <typename... Args>
std::string concat(const Args&... args) {
  std::ostringstream out;
  (out << ... << args);
  return out.str();
}

} // namespace detail
} // namespace exo
