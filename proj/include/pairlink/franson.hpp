#pragma once

#include <span>
#include <vector>

namespace pairlink::franson {

struct FransonConfig {
  double fsr = 2.5e9;               // Hz, both interferometers
  double photon_bandwidth = 100e9;  // Hz
  double pump_linewidth = 5e3;      // Hz
  double visibility = 0.991;
  double phase_per_volt = 1.5707963267948966;  // rad/V on the piezo
  double phase_offset = 0.0;                   // rad

  void validate() const;
};

struct FeasibilityReport {
  double delay;             // s, 1/fsr
  double photon_coherence;  // s, 1/photon_bandwidth
  double pump_coherence;    // s, 1/pump_linewidth
  bool pass;                // photon_coherence < delay < pump_coherence
};

FeasibilityReport franson_feasibility(const FransonConfig& cfg);

// Central-peak coincidence rate relative to the unfiltered rate:
// (1 + V cos(phi_sum + offset)) / 4.
double franson_fringe(const FransonConfig& cfg, double phi_sum);

struct FringeSample {
  double voltage;
  double relative_rate;
};

std::vector<FringeSample> fringe_vs_voltage(const FransonConfig& cfg,
                                            std::span<const double> voltages);

}  // namespace pairlink::franson
