#pragma once

#include <stdexcept>
#include <string>

namespace plopt {

// Input text/JSON could not be parsed. Carries a position when known.
struct ParseError : std::runtime_error {
  int line = 0;
  int column = 0;
  ParseError(const std::string& msg, int line_ = 0, int column_ = 0)
      : std::runtime_error(line_ > 0 ? msg + " (line " + std::to_string(line_) +
                                           (column_ > 0 ? ", column " + std::to_string(column_) : "") + ")"
                                     : msg),
        line(line_),
        column(column_) {}
};

// A configured resource cap (branch cap, node budget, enumeration cap) was hit.
struct CapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Precondition or contract violation on a call.
struct ContractError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A solver or verifier found the artifact itself inconsistent
// (e.g. no fixed point where one is guaranteed).
struct InternalCheckError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace plopt
