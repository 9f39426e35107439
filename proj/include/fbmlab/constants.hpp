// Simulation estimates of Pickands and Piterbarg constants, with a
// thread-safe provider that serves closed forms, cached values, or fresh
// simulations.
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace fbmlab {

enum class ConstantKind { pickands, piterbarg };
enum class Provenance { simulated, closed_form, cached, supplied };

std::string_view to_string(ConstantKind kind);
std::string_view to_string(Provenance provenance);
ConstantKind parse_constant_kind(std::string_view name);
Provenance parse_provenance(std::string_view name);

struct ConstantEstimate {
  ConstantKind kind = ConstantKind::pickands;
  double hurst = 0.5;
  std::optional<double> nu;
  /// Truncation horizons. One entry for a truncated estimate, the fitted
  /// ladder for an extrapolated Pickands constant.
  std::vector<double> b;
  double eta = 0.0;
  std::size_t n_sim = 0;
  std::uint64_t seed = 0;
  double value = 0.0;
  double std_error = 0.0;
  Provenance provenance = Provenance::simulated;
  std::string note;
};

/// E sup_{t in {0, eta, ..., b}} exp(sqrt2 B_H(t) - (1 + nu) t^{2H}) by plain
/// Monte Carlo, for every b of `horizons` from one set of paths sampled on
/// [0, max b]. Returns one truncated estimate per horizon. H may be 1, where
/// B_1(t) = t*Z.
std::vector<ConstantEstimate> estimate_truncated_sups(double hurst, double nu,
                                                      const std::vector<double>& horizons,
                                                      double eta, std::size_t n_sim,
                                                      std::uint64_t seed, unsigned threads = 0);

/// H_H([0,b]) = E sup_{[0,b]} exp(sqrt2 B_H(t) - t^{2H}) on the eta-grid.
ConstantEstimate estimate_pickands_truncated(double hurst, double b, double eta,
                                             std::size_t n_sim, std::uint64_t seed,
                                             unsigned threads = 0);

/// H_H: intercept of the affine fit of H_H([0,b])/b against 1/b over
/// `b_ladder`, with a delete-group jackknife standard error.
ConstantEstimate estimate_pickands(double hurst, const std::vector<double>& b_ladder, double eta,
                                   std::size_t n_sim, std::uint64_t seed, unsigned threads = 0);

/// P_H^nu([0,b]) = E sup_{[0,b]} exp(sqrt2 B_H(t) - (1+nu) t^{2H}) on the eta-grid.
ConstantEstimate estimate_piterbarg(double hurst, double nu, double b, double eta,
                                    std::size_t n_sim, std::uint64_t seed, unsigned threads = 0);

struct EstimationSettings {
  std::vector<double> b_ladder{2.0, 4.0, 8.0};
  double piterbarg_b = 16.0;
  double eta = 1.0 / 256.0;
  std::size_t n_sim = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

/// Serves constants to the asymptotic formulas. Closed forms (Pickands at
/// H = 1/2, Piterbarg at H = 1/2) always win; other values come from the cache
/// or, under simulate_if_missing, from a fresh simulation that is then cached.
/// Safe for concurrent use; cache writes are serialised.
class ConstantsProvider {
 public:
  enum class Policy { closed_form_first, simulate_if_missing };

  explicit ConstantsProvider(Policy policy = Policy::simulate_if_missing,
                             EstimationSettings settings = {});

  ConstantEstimate pickands(double hurst);
  ConstantEstimate piterbarg(double hurst, double nu);

  /// Looks up (or simulates) a Pickands constant for an explicit ladder.
  ConstantEstimate pickands(double hurst, const std::vector<double>& b_ladder, double eta,
                            std::size_t n_sim, std::uint64_t seed);
  ConstantEstimate piterbarg(double hurst, double nu, double b, double eta, std::size_t n_sim,
                             std::uint64_t seed);

  /// Cache lookup, else simulation; closed forms and supplied values are
  /// bypassed. Used to check a closed form against its estimator.
  ConstantEstimate simulated_pickands(double hurst, const std::vector<double>& b_ladder, double eta,
                                      std::size_t n_sim, std::uint64_t seed,
                                      bool allow_simulation = true);
  ConstantEstimate simulated_piterbarg(double hurst, double nu, double b, double eta,
                                       std::size_t n_sim, std::uint64_t seed,
                                       bool allow_simulation = true);

  /// Adds or replaces an entry keyed by its own simulation parameters.
  void insert(const ConstantEstimate& estimate);

  /// Registers a value that is used for (kind, H, nu) regardless of settings.
  void supply(ConstantKind kind, double hurst, std::optional<double> nu, double value,
              double std_error = 0.0);

  [[nodiscard]] std::vector<ConstantEstimate> entries() const;
  [[nodiscard]] Policy policy() const { return policy_; }
  [[nodiscard]] const EstimationSettings& settings() const { return settings_; }

  /// Reads a JSON array of ConstantEstimate records; missing file is not an error.
  void load(const std::filesystem::path& file);
  /// Writes the cache atomically (temporary file + rename).
  void save(const std::filesystem::path& file) const;

 private:
  using Key = std::tuple<int, long long, long long, std::vector<long long>, long long, std::size_t,
                         std::uint64_t>;
  static Key make_key(ConstantKind kind, double hurst, std::optional<double> nu,
                      const std::vector<double>& b, double eta, std::size_t n_sim,
                      std::uint64_t seed);
  static std::tuple<int, long long, long long> short_key(ConstantKind kind, double hurst,
                                                         std::optional<double> nu);

  ConstantEstimate cached_or_simulated(const Key& key, bool allow_simulation,
                                       const std::string& what,
                                       const std::function<ConstantEstimate()>& run);
  std::optional<ConstantEstimate> find_supplied(ConstantKind kind, double hurst,
                                                std::optional<double> nu) const;
  std::optional<ConstantEstimate> closed_form(ConstantKind kind, double hurst,
                                              std::optional<double> nu) const;

  Policy policy_;
  EstimationSettings settings_;
  mutable std::shared_mutex mutex_;
  std::map<Key, ConstantEstimate> cache_;
  std::map<std::tuple<int, long long, long long>, ConstantEstimate> supplied_;
};

/// Default cache location: $FBMLAB_CACHE, else ./fbmlab_constants.json.
std::filesystem::path default_cache_path();

}  // namespace fbmlab
