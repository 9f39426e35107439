#include "fbmlab/constants.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>

#include "fbmlab/fbm.hpp"
#include "fbmlab/json_io.hpp"
#include "fbmlab/model.hpp"
#include "fbmlab/parallel.hpp"
#include "fbmlab/rng.hpp"
#include "fbmlab/special.hpp"

namespace fbmlab {

std::string_view to_string(ConstantKind kind) {
  return kind == ConstantKind::pickands ? "pickands" : "piterbarg";
}

std::string_view to_string(Provenance provenance) {
  switch (provenance) {
    case Provenance::simulated: return "simulated";
    case Provenance::closed_form: return "closed_form";
    case Provenance::cached: return "cached";
    case Provenance::supplied: return "supplied";
  }
  return "simulated";
}

ConstantKind parse_constant_kind(std::string_view name) {
  if (name == "pickands") return ConstantKind::pickands;
  if (name == "piterbarg") return ConstantKind::piterbarg;
  throw DomainError("constant kind must be 'pickands' or 'piterbarg', got '" + std::string(name) +
                    "'");
}

Provenance parse_provenance(std::string_view name) {
  if (name == "simulated") return Provenance::simulated;
  if (name == "closed_form") return Provenance::closed_form;
  if (name == "cached") return Provenance::cached;
  if (name == "supplied") return Provenance::supplied;
  throw DomainError("unknown provenance '" + std::string(name) + "'");
}

namespace {

constexpr int kJackknifeGroups = 20;

struct SupSamples {
  std::vector<std::size_t> horizon_index;
  std::vector<double> sups;  // row-major: path i, horizon h
  std::size_t n_paths = 0;
  std::size_t n_horizons = 0;

  [[nodiscard]] double at(std::size_t path, std::size_t h) const {
    return sups[path * n_horizons + h];
  }
};

void check_estimation_args(double hurst, const std::vector<double>& horizons, double eta,
                           std::size_t n_sim) {
  if (!(hurst > 0.0 && hurst <= 1.0)) {
    throw DomainError("constant estimation needs H in (0,1]");
  }
  if (horizons.empty()) throw DomainError("at least one truncation horizon is required");
  if (!(eta > 0.0)) throw DomainError("grid step eta must be positive");
  if (n_sim < 1000) throw DomainError("constant estimation needs at least 1000 simulations");
  for (double b : horizons) {
    if (!(b > 0.0)) throw DomainError("truncation horizon b must be positive");
    if (eta > b / 16.0 * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "grid step eta=" << eta << " too coarse for b=" << b << " (need eta <= b/16)";
      throw DomainError(os.str());
    }
  }
}

std::size_t steps_for(double b, double eta) {
  const double ratio = b / eta;
  const auto n = static_cast<std::size_t>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(n)) > 1e-9 * ratio) {
    std::ostringstream os;
    os << "truncation horizon b=" << b << " is not a multiple of eta=" << eta;
    throw DomainError(os.str());
  }
  return n;
}

SupSamples simulate_sups(double hurst, double nu, const std::vector<double>& horizons, double eta,
                         std::size_t n_sim, std::uint64_t seed, unsigned threads) {
  SupSamples out;
  out.n_paths = n_sim;
  out.n_horizons = horizons.size();
  for (double b : horizons) out.horizon_index.push_back(steps_for(b, eta));
  const std::size_t n_steps =
      *std::max_element(out.horizon_index.begin(), out.horizon_index.end());
  out.sups.assign(n_sim * out.n_horizons, 0.0);

  const GridSpec grid{n_steps, static_cast<double>(n_steps) * eta};
  const double two_h = 2.0 * hurst;
  std::vector<double> drift(grid.size());
  for (std::size_t k = 0; k < drift.size(); ++k) {
    drift[k] = (1.0 + nu) * std::pow(grid.time(k), two_h);
  }

  // B_1(t) = t Z exactly; every other H goes through an exact sampler.
  std::unique_ptr<PathSampler> sampler;
  if (hurst != 1.0) sampler = make_sampler(grid, hurst, SamplerKind::automatic);

  // (grid index, horizon slot) in scan order
  std::vector<std::pair<std::size_t, std::size_t>> order;
  for (std::size_t h = 0; h < out.n_horizons; ++h) order.emplace_back(out.horizon_index[h], h);
  std::sort(order.begin(), order.end());

  const std::size_t n_pairs = (n_sim + 1) / 2;
  parallel_for_ranges(n_pairs, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> a(grid.size());
    std::vector<double> b(grid.size());
    for (std::size_t pair = begin; pair < end; ++pair) {
      const std::uint64_t s = stream_seed(seed, pair);
      if (sampler) {
        sampler->fill_pair(s, a, b);
      } else {
        NormalSource normals(s);
        const double za = normals();
        const double zb = normals();
        for (std::size_t k = 0; k < grid.size(); ++k) {
          a[k] = grid.time(k) * za;
          b[k] = grid.time(k) * zb;
        }
      }
      for (std::size_t c = 0; c < 2; ++c) {
        const std::size_t path = 2 * pair + c;
        if (path >= n_sim) break;
        const std::vector<double>& v = c == 0 ? a : b;
        double best = -std::numeric_limits<double>::infinity();
        std::size_t next = 0;
        for (std::size_t k = 0; k < grid.size() && next < order.size(); ++k) {
          best = std::max(best, std::numbers::sqrt2 * v[k] - drift[k]);
          while (next < order.size() && order[next].first == k) {
            out.sups[path * out.n_horizons + order[next].second] = std::exp(best);
            ++next;
          }
        }
      }
    }
  });
  return out;
}

double mean_of(const SupSamples& s, std::size_t h, std::size_t skip_begin = 0,
               std::size_t skip_end = 0) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.n_paths; ++i) {
    if (i >= skip_begin && i < skip_end) continue;
    sum += s.at(i, h);
    ++n;
  }
  return sum / static_cast<double>(n);
}

double std_error_of(const SupSamples& s, std::size_t h) {
  const double mean = mean_of(s, h);
  double ss = 0.0;
  for (std::size_t i = 0; i < s.n_paths; ++i) {
    const double d = s.at(i, h) - mean;
    ss += d * d;
  }
  const double n = static_cast<double>(s.n_paths);
  return std::sqrt(ss / (n - 1.0) / n);
}

// Ordinary least squares intercept of y against x.
std::optional<double> affine_intercept(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) return std::nullopt;
  const double intercept = my - (sxy / sxx) * mx;
  if (!std::isfinite(intercept)) return std::nullopt;
  return intercept;
}

}  // namespace

std::vector<ConstantEstimate> estimate_truncated_sups(double hurst, double nu,
                                                      const std::vector<double>& horizons,
                                                      double eta, std::size_t n_sim,
                                                      std::uint64_t seed, unsigned threads) {
  check_estimation_args(hurst, horizons, eta, n_sim);
  if (nu < 0.0) throw DomainError("nu must be nonnegative");
  const SupSamples s = simulate_sups(hurst, nu, horizons, eta, n_sim, seed, threads);
  std::vector<ConstantEstimate> out;
  for (std::size_t h = 0; h < horizons.size(); ++h) {
    ConstantEstimate e;
    e.kind = nu == 0.0 ? ConstantKind::pickands : ConstantKind::piterbarg;
    e.hurst = hurst;
    if (nu != 0.0) e.nu = nu;
    e.b = {horizons[h]};
    e.eta = eta;
    e.n_sim = n_sim;
    e.seed = seed;
    e.value = mean_of(s, h);
    e.std_error = std_error_of(s, h);
    e.provenance = Provenance::simulated;
    e.note = "truncated expectation on [0,b]";
    out.push_back(std::move(e));
  }
  return out;
}

ConstantEstimate estimate_pickands_truncated(double hurst, double b, double eta,
                                             std::size_t n_sim, std::uint64_t seed,
                                             unsigned threads) {
  return estimate_truncated_sups(hurst, 0.0, {b}, eta, n_sim, seed, threads).front();
}

ConstantEstimate estimate_piterbarg(double hurst, double nu, double b, double eta,
                                    std::size_t n_sim, std::uint64_t seed, unsigned threads) {
  if (!(nu > 0.0)) throw DomainError("Piterbarg constant needs nu > 0");
  ConstantEstimate e = estimate_truncated_sups(hurst, nu, {b}, eta, n_sim, seed, threads).front();
  e.kind = ConstantKind::piterbarg;
  e.nu = nu;
  e.note = "truncated expectation on [0,b]";
  return e;
}

ConstantEstimate estimate_pickands(double hurst, const std::vector<double>& b_ladder, double eta,
                                   std::size_t n_sim, std::uint64_t seed, unsigned threads) {
  if (b_ladder.size() < 3) throw DomainError("Pickands extrapolation needs at least 3 horizons");
  if (!std::is_sorted(b_ladder.begin(), b_ladder.end()) ||
      std::adjacent_find(b_ladder.begin(), b_ladder.end()) != b_ladder.end()) {
    throw DomainError("b_ladder must be strictly increasing");
  }
  check_estimation_args(hurst, b_ladder, eta, n_sim);
  const SupSamples s = simulate_sups(hurst, 0.0, b_ladder, eta, n_sim, seed, threads);

  const std::size_t nh = b_ladder.size();
  std::vector<double> x(nh);
  for (std::size_t h = 0; h < nh; ++h) x[h] = 1.0 / b_ladder[h];
  auto ratios = [&](std::size_t skip_begin, std::size_t skip_end) {
    std::vector<double> y(nh);
    for (std::size_t h = 0; h < nh; ++h) y[h] = mean_of(s, h, skip_begin, skip_end) / b_ladder[h];
    return y;
  };

  ConstantEstimate e;
  e.kind = ConstantKind::pickands;
  e.hurst = hurst;
  e.b = b_ladder;
  e.eta = eta;
  e.n_sim = n_sim;
  e.seed = seed;
  e.provenance = Provenance::simulated;

  const std::optional<double> intercept = affine_intercept(x, ratios(0, 0));
  std::vector<double> pseudo;
  const std::size_t group = n_sim / kJackknifeGroups;
  for (int g = 0; g < kJackknifeGroups && intercept; ++g) {
    const std::size_t lo = static_cast<std::size_t>(g) * group;
    const std::size_t hi = g + 1 == kJackknifeGroups ? n_sim : lo + group;
    if (auto v = affine_intercept(x, ratios(lo, hi))) pseudo.push_back(*v);
  }

  if (!intercept || *intercept <= 0.0 || pseudo.size() != kJackknifeGroups) {
    // Fall back to the largest-b ratio with an inflated error.
    const std::size_t last = nh - 1;
    e.value = mean_of(s, last) / b_ladder[last];
    e.std_error = 3.0 * std_error_of(s, last) / b_ladder[last] + std::abs(e.value);
    e.note = "degenerate affine fit; largest-b ratio reported with inflated standard error";
    return e;
  }
  const double g = static_cast<double>(kJackknifeGroups);
  const double mean = std::accumulate(pseudo.begin(), pseudo.end(), 0.0) / g;
  double ss = 0.0;
  for (double v : pseudo) ss += (v - mean) * (v - mean);
  e.value = *intercept;
  e.std_error = std::sqrt((g - 1.0) / g * ss);
  e.note = "intercept of affine fit of H([0,b])/b against 1/b";
  return e;
}

// ---------------------------------------------------------------------------
// Provider

namespace {
long long round_key(double v) { return std::llround(v * 1e6); }
}  // namespace

ConstantsProvider::ConstantsProvider(Policy policy, EstimationSettings settings)
    : policy_(policy), settings_(std::move(settings)) {}

ConstantsProvider::Key ConstantsProvider::make_key(ConstantKind kind, double hurst,
                                                   std::optional<double> nu,
                                                   const std::vector<double>& b, double eta,
                                                   std::size_t n_sim, std::uint64_t seed) {
  std::vector<long long> bk;
  for (double v : b) bk.push_back(round_key(v));
  return {static_cast<int>(kind), round_key(hurst), nu ? round_key(*nu) : -1, std::move(bk),
          std::llround(eta * 1e12), n_sim, seed};
}

std::tuple<int, long long, long long> ConstantsProvider::short_key(ConstantKind kind,
                                                                   double hurst,
                                                                   std::optional<double> nu) {
  return {static_cast<int>(kind), round_key(hurst), nu ? round_key(*nu) : -1};
}

std::optional<ConstantEstimate> ConstantsProvider::closed_form(ConstantKind kind, double hurst,
                                                               std::optional<double> nu) const {
  ConstantEstimate e;
  e.kind = kind;
  e.hurst = hurst;
  e.nu = nu;
  e.provenance = Provenance::closed_form;
  if (kind == ConstantKind::pickands && hurst == 0.5) {
    e.value = 1.0;
    e.note = "Brownian Pickands constant (literature value)";
    return e;
  }
  if (kind == ConstantKind::pickands && hurst == 1.0) {
    e.value = 1.0 / std::sqrt(std::numbers::pi);
    e.note = "degenerate H = 1 value 1/sqrt(pi)";
    return e;
  }
  if (kind == ConstantKind::piterbarg && hurst == 0.5 && nu) {
    e.value = piterbarg_half(*nu);
    e.note = "1 + 1/nu";
    return e;
  }
  return std::nullopt;
}

ConstantEstimate ConstantsProvider::pickands(double hurst) {
  return pickands(hurst, settings_.b_ladder, settings_.eta, settings_.n_sim, settings_.seed);
}

ConstantEstimate ConstantsProvider::piterbarg(double hurst, double nu) {
  return piterbarg(hurst, nu, settings_.piterbarg_b, settings_.eta, settings_.n_sim,
                   settings_.seed);
}

ConstantEstimate ConstantsProvider::cached_or_simulated(const Key& key, bool allow_simulation,
                                                        const std::string& what,
                                                        const std::function<ConstantEstimate()>& run) {
  {
    std::shared_lock lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) {
      ConstantEstimate e = it->second;
      e.provenance = Provenance::cached;
      return e;
    }
  }
  if (!allow_simulation) throw std::runtime_error(what + " is neither closed-form nor cached");
  std::unique_lock lock(mutex_);
  if (auto it = cache_.find(key); it != cache_.end()) {
    ConstantEstimate e = it->second;
    e.provenance = Provenance::cached;
    return e;
  }
  ConstantEstimate e = run();
  cache_[key] = e;
  return e;
}

std::optional<ConstantEstimate> ConstantsProvider::find_supplied(ConstantKind kind, double hurst,
                                                                 std::optional<double> nu) const {
  std::shared_lock lock(mutex_);
  if (auto it = supplied_.find(short_key(kind, hurst, nu)); it != supplied_.end()) {
    return it->second;
  }
  return std::nullopt;
}

ConstantEstimate ConstantsProvider::pickands(double hurst, const std::vector<double>& b_ladder,
                                             double eta, std::size_t n_sim, std::uint64_t seed) {
  if (auto cf = closed_form(ConstantKind::pickands, hurst, std::nullopt)) return *cf;
  if (auto s = find_supplied(ConstantKind::pickands, hurst, std::nullopt)) return *s;
  return simulated_pickands(hurst, b_ladder, eta, n_sim, seed,
                            policy_ == Policy::simulate_if_missing);
}

ConstantEstimate ConstantsProvider::piterbarg(double hurst, double nu, double b, double eta,
                                              std::size_t n_sim, std::uint64_t seed) {
  if (auto cf = closed_form(ConstantKind::piterbarg, hurst, nu)) return *cf;
  if (auto s = find_supplied(ConstantKind::piterbarg, hurst, nu)) return *s;
  return simulated_piterbarg(hurst, nu, b, eta, n_sim, seed,
                             policy_ == Policy::simulate_if_missing);
}

ConstantEstimate ConstantsProvider::simulated_pickands(double hurst,
                                                       const std::vector<double>& b_ladder,
                                                       double eta, std::size_t n_sim,
                                                       std::uint64_t seed, bool allow_simulation) {
  std::ostringstream what;
  what << "Pickands constant for H=" << hurst;
  return cached_or_simulated(
      make_key(ConstantKind::pickands, hurst, std::nullopt, b_ladder, eta, n_sim, seed),
      allow_simulation, what.str(), [&] {
        return estimate_pickands(hurst, b_ladder, eta, n_sim, seed, settings_.threads);
      });
}

ConstantEstimate ConstantsProvider::simulated_piterbarg(double hurst, double nu, double b,
                                                        double eta, std::size_t n_sim,
                                                        std::uint64_t seed,
                                                        bool allow_simulation) {
  std::ostringstream what;
  what << "Piterbarg constant for H=" << hurst << " nu=" << nu;
  return cached_or_simulated(
      make_key(ConstantKind::piterbarg, hurst, nu, {b}, eta, n_sim, seed), allow_simulation,
      what.str(),
      [&] { return estimate_piterbarg(hurst, nu, b, eta, n_sim, seed, settings_.threads); });
}

void ConstantsProvider::insert(const ConstantEstimate& estimate) {
  std::unique_lock lock(mutex_);
  ConstantEstimate e = estimate;
  if (e.provenance == Provenance::cached) e.provenance = Provenance::simulated;
  cache_[make_key(e.kind, e.hurst, e.nu, e.b, e.eta, e.n_sim, e.seed)] = std::move(e);
}

void ConstantsProvider::supply(ConstantKind kind, double hurst, std::optional<double> nu,
                               double value, double std_error) {
  if (!(value > 0.0)) throw DomainError("supplied constants must be positive");
  ConstantEstimate e;
  e.kind = kind;
  e.hurst = hurst;
  e.nu = nu;
  e.value = value;
  e.std_error = std_error;
  e.provenance = Provenance::supplied;
  e.note = "supplied by caller";
  std::unique_lock lock(mutex_);
  supplied_[short_key(kind, hurst, nu)] = std::move(e);
}

std::vector<ConstantEstimate> ConstantsProvider::entries() const {
  std::shared_lock lock(mutex_);
  std::vector<ConstantEstimate> out;
  for (const auto& [key, e] : cache_) out.push_back(e);
  return out;
}

void ConstantsProvider::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) return;
  const nlohmann::json doc = nlohmann::json::parse(in);
  if (!doc.is_array()) throw std::runtime_error("constants cache must be a JSON array");
  for (const auto& item : doc) insert(constant_from_json(item));
}

void ConstantsProvider::save(const std::filesystem::path& file) const {
  nlohmann::json doc = nlohmann::json::array();
  for (const ConstantEstimate& e : entries()) doc.push_back(to_json(e));
  write_file_atomically(file, doc.dump(2) + "\n");
}

std::filesystem::path default_cache_path() {
  if (const char* env = std::getenv("FBMLAB_CACHE"); env != nullptr && *env != '\0') {
    return env;
  }
  return "fbmlab_constants.json";
}

}  // namespace fbmlab
