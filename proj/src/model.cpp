#include "fbmlab/model.hpp"

#include <cmath>
#include <sstream>

namespace fbmlab {

void validate_hurst(double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0)) {
    std::ostringstream os;
    os << "Hurst index must lie in (0,1), got " << hurst;
    throw DomainError(os.str());
  }
}

void ModelParams::validate() const {
  validate_hurst(hurst);
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw DomainError("horizon T must be positive and finite, got " + std::to_string(horizon));
  }
  if (!std::isfinite(drift)) {
    throw DomainError("drift mu must be finite");
  }
  if (sigma != 1.0) {
    throw DomainError("volatility is fixed to 1 in this model, got " + std::to_string(sigma));
  }
}

void GridSpec::validate() const {
  if (n_steps < 1) {
    throw DomainError("grid needs at least one step");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw DomainError("grid horizon must be positive and finite");
  }
}

std::string describe(const ModelParams& params) {
  std::ostringstream os;
  os << "H=" << params.hurst << " mu=" << params.drift << " T=" << params.horizon;
  return os.str();
}

}  // namespace fbmlab
