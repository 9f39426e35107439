#include "fbmlab/fbm.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>

#include <fftw3.h>

#include "fbmlab/rng.hpp"

namespace fbmlab {

namespace {

// FFTW planning is not thread-safe; execution on distinct arrays is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

constexpr double kNegativeEigenTolerance = 1e-10;
constexpr double kCholeskyJitter = 1e-12;

void check_spans(const GridSpec& grid, std::span<double> first, std::span<double> second) {
  if (first.size() != grid.size() || second.size() != grid.size()) {
    throw DomainError("sampler output span does not match grid size");
  }
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n)
      : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (data == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

}  // namespace

double fbm_covariance(double s, double t, double hurst) {
  validate_hurst(hurst);
  if (s < 0.0 || t < 0.0) {
    throw DomainError("fbm_covariance needs nonnegative times");
  }
  const double two_h = 2.0 * hurst;
  return 0.5 * (std::pow(s, two_h) + std::pow(t, two_h) - std::pow(std::abs(s - t), two_h));
}

double fgn_autocovariance(std::size_t lag, double hurst) {
  const double k = static_cast<double>(lag);
  const double two_h = 2.0 * hurst;
  if (lag == 0) return 1.0;
  return 0.5 * (std::pow(k + 1.0, two_h) - 2.0 * std::pow(k, two_h) + std::pow(k - 1.0, two_h));
}

std::string_view to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::cholesky: return "cholesky";
    case SamplerKind::circulant: return "circulant";
    case SamplerKind::brownian: return "brownian";
    case SamplerKind::automatic: return "auto";
  }
  return "auto";
}

SamplerKind parse_sampler_kind(std::string_view name) {
  if (name == "cholesky") return SamplerKind::cholesky;
  if (name == "circulant") return SamplerKind::circulant;
  if (name == "brownian") return SamplerKind::brownian;
  if (name == "auto" || name == "automatic") return SamplerKind::automatic;
  throw DomainError("unknown sampler '" + std::string(name) + "'");
}

PathSampler::PathSampler(GridSpec grid, double hurst) : grid_(grid), hurst_(hurst) {
  grid_.validate();
  validate_hurst(hurst_);
}

FbmPath PathSampler::sample(std::uint64_t seed) const {
  FbmPath path;
  path.values.resize(grid_.size());
  std::vector<double> discard(grid_.size());
  fill_pair(seed, path.values, discard);
  path.grid = grid_;
  path.hurst = hurst_;
  path.seed = seed;
  path.kind = PathKind::raw_fbm;
  return path;
}

// ---------------------------------------------------------------------------
// Cholesky

CholeskySampler::CholeskySampler(GridSpec grid, double hurst, std::size_t max_steps)
    : PathSampler(grid, hurst) {
  const std::size_t n = grid_.n_steps;
  if (n > max_steps) {
    std::ostringstream os;
    os << "Cholesky sampler limited to " << max_steps << " steps, got " << n;
    throw DomainError(os.str());
  }
  Eigen::MatrixXd cov(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double c = fbm_covariance(grid_.time(i + 1), grid_.time(j + 1), hurst_);
      cov(i, j) = c;
      cov(j, i) = c;
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    const double jitter = kCholeskyJitter * std::pow(grid_.horizon, 2.0 * hurst_);
    cov.diagonal().array() += jitter;
    llt.compute(cov);
    used_jitter_ = true;
    if (llt.info() != Eigen::Success) {
      throw NumericalError("covariance matrix is not positive definite even after jitter");
    }
  }
  factor_ = llt.matrixL();
}

void CholeskySampler::fill_pair(std::uint64_t seed, std::span<double> first,
                                std::span<double> second) const {
  check_spans(grid_, first, second);
  const auto n = static_cast<Eigen::Index>(grid_.n_steps);
  NormalSource normals(seed);
  Eigen::VectorXd z(n);
  for (std::span<double> out : {first, second}) {
    normals.fill({z.data(), static_cast<std::size_t>(n)});
    Eigen::Map<Eigen::VectorXd> tail(out.data() + 1, n);
    tail.noalias() = factor_.triangularView<Eigen::Lower>() * z;
    out[0] = 0.0;
  }
}

// ---------------------------------------------------------------------------
// Circulant embedding

CirculantSampler::CirculantSampler(GridSpec grid, double hurst) : PathSampler(grid, hurst) {
  std::size_t size = 2;
  while (size < 2 * grid_.n_steps) size <<= 1;
  if (!try_embedding(size) && !try_embedding(2 * size)) {
    std::ostringstream os;
    os << "circulant embedding failed (negative eigenvalue) for H=" << hurst_
       << " n=" << grid_.n_steps << " at sizes " << size << " and " << 2 * size;
    throw NumericalError(os.str());
  }
  std::lock_guard lock(fftw_planner_mutex());
  FftwBuffer buffer(embedding_size_);
  plan_ = fftw_plan_dft_1d(static_cast<int>(embedding_size_), buffer.data, buffer.data,
                           FFTW_FORWARD, FFTW_ESTIMATE);
  if (plan_ == nullptr) throw NumericalError("FFTW planning failed");
}

CirculantSampler::~CirculantSampler() {
  if (plan_ != nullptr) {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
  }
}

bool CirculantSampler::try_embedding(std::size_t size) {
  FftwBuffer row(size);
  for (std::size_t j = 0; j < size; ++j) {
    const std::size_t lag = j <= size / 2 ? j : size - j;
    row.data[j][0] = fgn_autocovariance(lag, hurst_);
    row.data[j][1] = 0.0;
  }
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(size), row.data, row.data, FFTW_FORWARD,
                                      FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
  }
  std::vector<double> eig(size);
  for (std::size_t j = 0; j < size; ++j) eig[j] = row.data[j][0];
  const double max_eig = *std::max_element(eig.begin(), eig.end());
  const double min_eig = *std::min_element(eig.begin(), eig.end());
  if (min_eig < -kNegativeEigenTolerance * max_eig) return false;

  embedding_size_ = size;
  eigenvalues_ = std::move(eig);
  scale_.resize(size);
  const double m = static_cast<double>(size);
  for (std::size_t j = 0; j < size; ++j) {
    scale_[j] = std::sqrt(std::max(eigenvalues_[j], 0.0) / m);
  }
  return true;
}

void CirculantSampler::fill_pair(std::uint64_t seed, std::span<double> first,
                                 std::span<double> second) const {
  check_spans(grid_, first, second);
  const std::size_t m = embedding_size_;
  FftwBuffer buffer(m);
  NormalSource normals(seed);
  for (std::size_t j = 0; j < m; ++j) {
    const double re = normals();
    const double im = normals();
    buffer.data[j][0] = scale_[j] * re;
    buffer.data[j][1] = scale_[j] * im;
  }
  fftw_execute_dft(static_cast<fftw_plan>(plan_), buffer.data, buffer.data);

  const double scale = std::pow(grid_.step(), hurst_);
  double a = 0.0;
  double b = 0.0;
  first[0] = 0.0;
  second[0] = 0.0;
  for (std::size_t k = 0; k < grid_.n_steps; ++k) {
    a += buffer.data[k][0];
    b += buffer.data[k][1];
    first[k + 1] = scale * a;
    second[k + 1] = scale * b;
  }
}

// ---------------------------------------------------------------------------
// Brownian

BrownianSampler::BrownianSampler(GridSpec grid) : PathSampler(grid, 0.5) {}

void BrownianSampler::fill_pair(std::uint64_t seed, std::span<double> first,
                                std::span<double> second) const {
  check_spans(grid_, first, second);
  const double sd = std::sqrt(grid_.step());
  NormalSource normals(seed);
  for (std::span<double> out : {first, second}) {
    double acc = 0.0;
    out[0] = 0.0;
    for (std::size_t k = 1; k < out.size(); ++k) {
      acc += sd * normals();
      out[k] = acc;
    }
  }
}

// ---------------------------------------------------------------------------

std::unique_ptr<PathSampler> make_sampler(const GridSpec& grid, double hurst, SamplerKind kind,
                                          std::size_t cholesky_cap) {
  switch (kind) {
    case SamplerKind::cholesky:
      return std::make_unique<CholeskySampler>(grid, hurst, cholesky_cap);
    case SamplerKind::circulant:
      return std::make_unique<CirculantSampler>(grid, hurst);
    case SamplerKind::brownian:
      if (hurst != 0.5) throw DomainError("brownian sampler requires H = 1/2");
      return std::make_unique<BrownianSampler>(grid);
    case SamplerKind::automatic:
      if (hurst == 0.5) return std::make_unique<BrownianSampler>(grid);
      return std::make_unique<CirculantSampler>(grid, hurst);
  }
  throw DomainError("unknown sampler kind");
}

FbmPath sample_fbm_cholesky(const GridSpec& grid, double hurst, std::uint64_t seed,
                            std::size_t max_steps) {
  return CholeskySampler(grid, hurst, max_steps).sample(seed);
}

FbmPath sample_fbm_circulant(const GridSpec& grid, double hurst, std::uint64_t seed) {
  return CirculantSampler(grid, hurst).sample(seed);
}

std::vector<double> trend_values(const GridSpec& grid, const ModelParams& params) {
  params.validate();
  std::vector<double> trend(grid.size());
  const double two_h = 2.0 * params.hurst;
  for (std::size_t k = 0; k < trend.size(); ++k) {
    const double t = grid.time(k);
    trend[k] = -0.5 * std::pow(t, two_h) + params.drift * t;
  }
  return trend;
}

FbmPath apply_trend(const FbmPath& path, const ModelParams& params) {
  if (path.kind != PathKind::raw_fbm) {
    throw DomainError("apply_trend expects a raw fBm path");
  }
  if (path.values.size() != path.grid.size()) {
    throw DomainError("path length does not match its grid");
  }
  if (path.hurst != params.hurst || path.grid.horizon != params.horizon) {
    throw DomainError("path was sampled under different H or T than " + describe(params));
  }
  const std::vector<double> trend = trend_values(path.grid, params);
  FbmPath out = path;
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] += trend[k];
  out.kind = PathKind::trended;
  out.drift = params.drift;
  return out;
}

void write_path_csv(std::ostream& os, const FbmPath& path) {
  const auto old_precision = os.precision(17);
  os << "t,value\n";
  for (std::size_t k = 0; k < path.values.size(); ++k) {
    os << path.grid.time(k) << ',' << path.values[k] << '\n';
  }
  os.precision(old_precision);
}

}  // namespace fbmlab
