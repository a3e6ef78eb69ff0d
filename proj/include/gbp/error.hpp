#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace gbp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed model file; the message carries line/field context.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A model parsed or constructed fine but violates GaussianModel invariants.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

class NonpositiveDiagonal : public Error {
 public:
  NonpositiveDiagonal(std::size_t node, double value);
  std::size_t node() const { return node_; }

 private:
  std::size_t node_;
};

// Symmetric elimination met a pivot <= 1e-12 * max|a_ii|.
class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(std::size_t pivot_index, double pivot);
  std::size_t pivot_index() const { return pivot_index_; }
  double pivot() const { return pivot_; }

 private:
  std::size_t pivot_index_;
  double pivot_;
};

class NotATree : public Error {
 public:
  using Error::Error;
};

// Power iteration ran out of iterations. The bracket [lower, upper] is still a
// rigorous enclosure of the spectral radius.
class DidNotConverge : public Error {
 public:
  DidNotConverge(std::size_t iterations, double lower, double upper);
  std::size_t iterations() const { return iterations_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }

 private:
  std::size_t iterations_;
  double lower_;
  double upper_;
};

class LimitExceeded : public Error {
 public:
  using Error::Error;
};

class NotWalkSummable : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class SizeLimit : public Error {
 public:
  using Error::Error;
};

class Unsatisfiable : public Error {
 public:
  using Error::Error;
};

}  // namespace gbp
