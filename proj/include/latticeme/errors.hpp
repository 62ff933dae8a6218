#ifndef LATTICEME_ERRORS_HPP
#define LATTICEME_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace latticeme {

// Invalid parameter values, dimension mismatches, contract violations.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input files; line/col are 1-based, 0 when not applicable.
struct ParseError : std::runtime_error {
  int line = 0;
  int col = 0;
  ParseError(const std::string& msg, int line_, int col_ = 0)
      : std::runtime_error(msg), line(line_), col(col_) {}
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Cholesky failure; pivot is the 0-based index of the failing diagonal.
struct FactorizationError : std::runtime_error {
  int pivot;
  FactorizationError(const std::string& msg, int pivot_)
      : std::runtime_error(msg), pivot(pivot_) {}
};

struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace latticeme

#endif
