// Exact samplers for fractional Brownian motion on uniform grids and the
// trend transform X_t = B_H(t) - t^{2H}/2 + mu*t.
#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fbmlab/model.hpp"

namespace fbmlab {

enum class PathKind { raw_fbm, trended };

/// A sampled trajectory. values[k] is the value at grid.time(k); values[0] == 0.
struct FbmPath {
  std::vector<double> values;
  GridSpec grid;
  double hurst = 0.5;
  std::uint64_t seed = 0;
  PathKind kind = PathKind::raw_fbm;
  std::optional<double> drift;  ///< set once the trend has been applied
};

/// Cov(B_H(s), B_H(t)) = (s^{2H} + t^{2H} - |s-t|^{2H}) / 2.
double fbm_covariance(double s, double t, double hurst);

/// Autocovariance of unit-step fractional Gaussian noise at integer lag k.
double fgn_autocovariance(std::size_t lag, double hurst);

enum class SamplerKind { cholesky, circulant, brownian, automatic };

std::string_view to_string(SamplerKind kind);
SamplerKind parse_sampler_kind(std::string_view name);

/// Common interface of the exact samplers. Implementations are immutable after
/// construction and may be shared across threads.
class PathSampler {
 public:
  PathSampler(GridSpec grid, double hurst);
  virtual ~PathSampler() = default;
  PathSampler(const PathSampler&) = delete;
  PathSampler& operator=(const PathSampler&) = delete;

  [[nodiscard]] const GridSpec& grid() const { return grid_; }
  [[nodiscard]] double hurst() const { return hurst_; }
  [[nodiscard]] virtual std::string_view name() const = 0;

  /// Writes two independent raw fBm paths drawn from `seed`. Both spans must
  /// have grid().size() elements.
  virtual void fill_pair(std::uint64_t seed, std::span<double> first,
                         std::span<double> second) const = 0;

  /// First path of the pair generated from `seed`.
  [[nodiscard]] FbmPath sample(std::uint64_t seed) const;

 protected:
  GridSpec grid_;
  double hurst_;
};

/// Lower Cholesky factor of the covariance of (B_H(t_1), ..., B_H(t_n)).
/// O(n^3) setup, so n is capped.
class CholeskySampler final : public PathSampler {
 public:
  static constexpr std::size_t kDefaultCap = 2048;

  CholeskySampler(GridSpec grid, double hurst, std::size_t max_steps = kDefaultCap);

  [[nodiscard]] std::string_view name() const override { return "cholesky"; }
  void fill_pair(std::uint64_t seed, std::span<double> first,
                 std::span<double> second) const override;

  [[nodiscard]] bool used_jitter() const { return used_jitter_; }
  [[nodiscard]] const Eigen::MatrixXd& factor() const { return factor_; }

 private:
  Eigen::MatrixXd factor_;
  bool used_jitter_ = false;
};

/// Circulant embedding of the fractional Gaussian noise autocovariance,
/// diagonalised by FFT; the real and imaginary parts of one transform give two
/// independent increment sequences.
class CirculantSampler final : public PathSampler {
 public:
  CirculantSampler(GridSpec grid, double hurst);
  ~CirculantSampler() override;

  [[nodiscard]] std::string_view name() const override { return "circulant"; }
  void fill_pair(std::uint64_t seed, std::span<double> first,
                 std::span<double> second) const override;

  [[nodiscard]] std::size_t embedding_size() const { return embedding_size_; }
  [[nodiscard]] std::span<const double> eigenvalues() const { return eigenvalues_; }

 private:
  bool try_embedding(std::size_t size);

  std::size_t embedding_size_ = 0;
  std::vector<double> eigenvalues_;
  std::vector<double> scale_;  // sqrt(lambda_k / m), clamped at 0
  void* plan_ = nullptr;       // fftw_plan
};

/// H = 1/2 only: cumulative sums of independent N(0, dt) increments.
class BrownianSampler final : public PathSampler {
 public:
  explicit BrownianSampler(GridSpec grid);

  [[nodiscard]] std::string_view name() const override { return "brownian"; }
  void fill_pair(std::uint64_t seed, std::span<double> first,
                 std::span<double> second) const override;
};

/// `automatic` picks brownian for H == 1/2 and circulant otherwise.
std::unique_ptr<PathSampler> make_sampler(const GridSpec& grid, double hurst, SamplerKind kind,
                                          std::size_t cholesky_cap = CholeskySampler::kDefaultCap);

FbmPath sample_fbm_cholesky(const GridSpec& grid, double hurst, std::uint64_t seed,
                            std::size_t max_steps = CholeskySampler::kDefaultCap);
FbmPath sample_fbm_circulant(const GridSpec& grid, double hurst, std::uint64_t seed);

/// Deterministic part -t^{2H}/2 + mu*t on the grid.
std::vector<double> trend_values(const GridSpec& grid, const ModelParams& params);

/// values'[k] = values[k] - t_k^{2H}/2 + mu*t_k. Requires a raw path.
FbmPath apply_trend(const FbmPath& path, const ModelParams& params);

/// CSV with header `t,value`, 17 significant digits.
void write_path_csv(std::ostream& os, const FbmPath& path);

}  // namespace fbmlab
