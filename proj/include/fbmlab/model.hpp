// Core model types shared by every fbmlab module.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fbmlab {

/// Invalid argument: Hurst index outside (0,1), negative time, etc.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The asymptotic formulas were asked for outside the region where their
/// threshold functions are defined (e.g. nonpositive numerator of m(u)).
class PreconditionError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Numerical breakdown: failed factorization, failed circulant embedding,
/// a fixed-point iteration that did not converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Model X_t = sigma*B_H(t) - sigma^2 t^{2H}/2 + mu*t with sigma fixed to 1.
struct ModelParams {
  double hurst = 0.5;
  double drift = 0.0;
  double horizon = 1.0;
  double sigma = 1.0;

  /// Throws DomainError unless 0 < H < 1, T > 0 and sigma == 1.
  void validate() const;
};

/// Uniform grid t_k = k*T/n_steps, k = 0..n_steps.
struct GridSpec {
  std::size_t n_steps = 1;
  double horizon = 1.0;

  void validate() const;
  [[nodiscard]] double step() const { return horizon / static_cast<double>(n_steps); }
  [[nodiscard]] double time(std::size_t k) const {
    return k == n_steps ? horizon : static_cast<double>(k) * step();
  }
  [[nodiscard]] std::size_t size() const { return n_steps + 1; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

void validate_hurst(double hurst);

std::string describe(const ModelParams& params);

}  // namespace fbmlab
