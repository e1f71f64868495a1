#ifndef PAUC_ERRORS_HPP
#define PAUC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pauc {

// Base for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& msg) : Error(msg) {}
};

// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, long line)
      : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

// A dataset ended up with zero positives or zero negatives.
class EmptyClassError : public Error {
 public:
  explicit EmptyClassError(const std::string& msg) : Error(msg) {}
};

// FPR range is invalid or too narrow for the sample at hand.
class DegenerateRangeError : public Error {
 public:
  explicit DegenerateRangeError(const std::string& msg) : Error(msg) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& msg) : Error(msg) {}
};

// Optimizer failed to meet its tolerance; carries the best residual seen.
class SolverError : public Error {
 public:
  SolverError(const std::string& msg, double residual, long iterations)
      : Error(msg + " (residual " + std::to_string(residual) + " after " +
              std::to_string(iterations) + " iterations)"),
        residual_(residual),
        iterations_(iterations) {}
  double residual() const { return residual_; }
  long iterations() const { return iterations_; }

 private:
  double residual_;
  long iterations_;
};

// Model file version mismatch or corruption; names the offending section.
class ModelFormatError : public Error {
 public:
  ModelFormatError(const std::string& msg, const std::string& section)
      : Error(msg + " [section: " + section + "]"), section_(section) {}
  const std::string& section() const { return section_; }

 private:
  std::string section_;
};

}  // namespace pauc

#endif  // PAUC_ERRORS_HPP
