#pragma once

#include <stdexcept>
#include <string>

namespace hclgp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated invariant on a domain type (construction or decoding).
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace hclgp
