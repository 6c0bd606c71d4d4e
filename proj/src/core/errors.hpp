#pragma once

#include <stdexcept>
#include <string>

namespace sepne {

// Malformed or unsatisfiable user data: parse failures, unknown node labels,
// inconsistent partition files, label sets that cannot be split as requested.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numeric failure on otherwise well-formed input, e.g. a normal-equation
// system that is not positive definite or a zero-rank landmark core.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sepne
