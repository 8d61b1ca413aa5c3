#include "pairlink/franson.hpp"

#include <cmath>

#include "pairlink/errors.hpp"

namespace pairlink::franson {

void FransonConfig::validate() const {
  require(fsr > 0.0, "FSR must be positive");
  require(photon_bandwidth > 0.0 && pump_linewidth > 0.0, "bandwidths must be positive");
  require(visibility >= 0.0 && visibility <= 1.0, "visibility must lie in [0,1]");
}

FeasibilityReport franson_feasibility(const FransonConfig& cfg) {
  cfg.validate();
  FeasibilityReport r;
  r.delay = 1.0 / cfg.fsr;
  r.photon_coherence = 1.0 / cfg.photon_bandwidth;
  r.pump_coherence = 1.0 / cfg.pump_linewidth;
  r.pass = r.photon_coherence < r.delay && r.delay < r.pump_coherence;
  return r;
}

double franson_fringe(const FransonConfig& cfg, double phi_sum) {
  require(cfg.visibility >= 0.0 && cfg.visibility <= 1.0, "visibility must lie in [0, 1]");
  return 0.25 * (1.0 + cfg.visibility * std::cos(phi_sum + cfg.phase_offset));
}

std::vector<FringeSample> fringe_vs_voltage(const FransonConfig& cfg,
                                            std::span<const double> voltages) {
  std::vector<FringeSample> out;
  out.reserve(voltages.size());
  for (double v : voltages) out.push_back({v, franson_fringe(cfg, cfg.phase_per_volt * v)});
  return out;
}

}  // namespace pairlink::franson
