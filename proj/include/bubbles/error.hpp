#pragma once

#include <stdexcept>
#include <string>

namespace bubbles {

enum class ErrorKind {
  Config,               // malformed or inconsistent configuration
  Quadrature,           // adaptive quadrature did not reach tolerance
  Support,              // sampler could not bracket the density CDF
  TailMass,             // kernel mass beyond the grid exceeds tail tolerance
  Monotonicity,         // Picard iterate moved against the theoretical direction
  HypothesisViolation,  // solver hypothesis (inf a, sup x b) fails on the grid
  CertificateRejected,  // a declared bound is contradicted numerically
  DegenerateModel,      // model outside the admissible class (a_k = 1, b_l = 1, ...)
  NonConvergence,       // iteration cap reached
  Internal,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Quadrature failure; carries the estimated absolute error of the last attempt.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double residual)
      : Error(ErrorKind::Quadrature, what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Monotone-iteration defect; `index` is the offending grid node.
class MonotonicityError : public Error {
 public:
  MonotonicityError(const std::string& what, std::size_t index, std::size_t iteration)
      : Error(ErrorKind::Monotonicity, what), index_(index), iteration_(iteration) {}
  std::size_t index() const noexcept { return index_; }
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t index_;
  std::size_t iteration_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Quadrature: return "quadrature";
    case ErrorKind::Support: return "support";
    case ErrorKind::TailMass: return "tail-mass";
    case ErrorKind::Monotonicity: return "monotonicity";
    case ErrorKind::HypothesisViolation: return "hypothesis-violation";
    case ErrorKind::CertificateRejected: return "certificate-rejected";
    case ErrorKind::DegenerateModel: return "degenerate-model";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::Internal: return "internal";
  }
  return "unknown";
}

}  // namespace bubbles
