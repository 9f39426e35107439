#include "fbmlab/path_stats.hpp"

#include <cmath>
#include <string>

namespace fbmlab {

std::string_view to_string(Functional f) {
  return f == Functional::drawdown ? "drawdown" : "drawup";
}

Functional parse_functional(std::string_view name) {
  if (name == "drawdown") return Functional::drawdown;
  if (name == "drawup") return Functional::drawup;
  throw DomainError("functional must be 'drawdown' or 'drawup', got '" + std::string(name) + "'");
}

void TailQuery::validate() const {
  params.validate();
  if (!(u > 0.0) || std::isnan(u)) {
    throw DomainError("threshold u must be positive");
  }
}

double max_drawdown(std::span<const double> values, std::size_t stride) {
  if (values.empty()) return 0.0;
  if (stride == 0) throw DomainError("stride must be positive");
  double peak = values[0];
  double worst = 0.0;
  for (std::size_t k = 0; k < values.size(); k += stride) {
    const double v = values[k];
    if (v >= peak) {
      peak = v;
    } else if (peak - v > worst) {
      worst = peak - v;
    }
  }
  return worst;
}

double max_drawup(std::span<const double> values, std::size_t stride) {
  if (values.empty()) return 0.0;
  if (stride == 0) throw DomainError("stride must be positive");
  double trough = values[0];
  double best = 0.0;
  for (std::size_t k = 0; k < values.size(); k += stride) {
    const double v = values[k];
    if (v <= trough) {
      trough = v;
    } else if (v - trough > best) {
      best = v - trough;
    }
  }
  return best;
}

double max_drawdown(const FbmPath& path) { return max_drawdown(path.values); }
double max_drawup(const FbmPath& path) { return max_drawup(path.values); }

double max_functional(Functional f, std::span<const double> values, std::size_t stride) {
  return f == Functional::drawdown ? max_drawdown(values, stride) : max_drawup(values, stride);
}

bool exceeds(const TailQuery& query, const FbmPath& path) {
  if (path.kind != PathKind::trended) {
    throw DomainError("exceeds() needs a trended path");
  }
  const ModelParams& p = query.params;
  if (path.hurst != p.hurst || path.grid.horizon != p.horizon ||
      (path.drift && *path.drift != p.drift)) {
    throw DomainError("path parameters do not match the query (" + describe(p) + ")");
  }
  if (path.values.size() != path.grid.size()) {
    throw DomainError("path length does not match its grid");
  }
  return max_functional(query.functional, path.values) > query.u;
}

}  // namespace fbmlab
