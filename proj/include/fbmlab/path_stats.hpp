// Maximum drawdown / drawup of sampled paths and the exceedance indicator.
#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "fbmlab/fbm.hpp"
#include "fbmlab/model.hpp"

namespace fbmlab {

enum class Functional { drawdown, drawup };

std::string_view to_string(Functional f);
Functional parse_functional(std::string_view name);

/// P(sup_{[0,T]} D_t > u) or P(sup_{[0,T]} U_t > u) under `params`.
struct TailQuery {
  Functional functional = Functional::drawdown;
  double u = 1.0;
  ModelParams params;

  void validate() const;
};

/// max_k (max_{j<=k} v_j - v_k), visiting every `stride`-th point.
double max_drawdown(std::span<const double> values, std::size_t stride = 1);
/// max_k (v_k - min_{j<=k} v_j), visiting every `stride`-th point.
double max_drawup(std::span<const double> values, std::size_t stride = 1);

double max_drawdown(const FbmPath& path);
double max_drawup(const FbmPath& path);

double max_functional(Functional f, std::span<const double> values, std::size_t stride = 1);

/// Grid indicator of {sup D_t > u} (or U_t). The path must be a trended path
/// sampled under query.params.
bool exceeds(const TailQuery& query, const FbmPath& path);

}  // namespace fbmlab
