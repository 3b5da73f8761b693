#pragma once

#include <stdexcept>
#include <string>

namespace recip {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Structural violations of the graph assumptions (loops, asymmetry, disconnection).
class GraphError : public Error {
 public:
  using Error::Error;
};

// Arguments outside their documented domain: times outside [0,1], unknown vertices, bad parameters.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed input documents.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Integration failures, underflow, quadrature non-convergence, fits outside the expansion regime.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace recip
