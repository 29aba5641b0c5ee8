#pragma once

#include <stdexcept>
#include <string>

namespace tclrl {

// std::invalid_argument covers malformed inputs; the types below cover the
// remaining failure modes of the library.

/// Operation called on an object that is not ready for it (e.g. predict before fit).
class InvalidState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Scaled cost requested with identical full-state and no-control baselines.
class DegenerateBaseline : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Network training produced a non-finite loss.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, double last_finite_loss)
      : std::runtime_error(what), last_finite_loss_(last_finite_loss) {}
  double last_finite_loss() const noexcept { return last_finite_loss_; }

 private:
  double last_finite_loss_;
};

/// Malformed input file. `line` is 1-based; 0 when the error is not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, int line, const std::string& msg)
      : std::runtime_error(file + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + msg),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace tclrl
