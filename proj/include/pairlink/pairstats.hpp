#pragma once

#include "pairlink/photonics.hpp"

namespace pairlink::pairstats {

using photonics::Wavelength;

struct SourceSpec {
  double pair_rate_per_mw = 1.4e5;       // pairs s^-1 mW^-1
  double spectral_brightness = 4.8e3;    // pairs s^-1 mW^-1 GHz^-1 (metadata only)
  double bandwidth = 287e9;              // Hz
  double heralding_signal = 0.55;        // 810 nm arm
  double heralding_idler = 0.48;         // 1550 nm arm
  double intrinsic_pol_error = 0.0025;   // Z basis, (1 - V_HV)/2
  double intrinsic_pol_error_x = 0.0035; // X basis, (1 - V_DA)/2

  void validate() const;
};

struct ChannelSpec {
  Wavelength wavelength;
  double loss_db = 0.0;
  double detector_efficiency = 1.0;
  double dark_rate = 0.0;     // Hz
  double jitter_sigma = 0.0;  // s

  void validate() const;
};

/// Error probability implied by a fringe visibility, (1 - V)/2.
double error_from_visibility(double visibility);

// Measured source: 1.4e5 pairs/s/mW, 287 GHz bandwidth, 55 % / 48 %
// heralding, 99.5 % (H/V) and 99.3 % (D/A) polarization visibility.
SourceSpec measured_source();
// Si-APD at 810 nm (60 %, 200 Hz dark) and SNSPD at 1550 nm (80 %, 50 Hz).
ChannelSpec si_apd_810(double loss_db = 0.0);
ChannelSpec snspd_1550(double loss_db = 0.0);

inline constexpr double kDefaultWindow = 900e-12;  // s
inline constexpr double kFullPumpMw = 125.0;

struct CountModel {
  double pair_rate;  // Hz
  double singles_a;
  double singles_b;
  double true_coinc;
  double accidental;
  double mu_per_window;
  double window;  // s
};

double pair_rate(const SourceSpec& source, double pump_mw);

/// heralding * 10^(-loss/10) * detector efficiency.
double arm_transmission(const ChannelSpec& channel, double heralding);

/// Channel a is the signal arm (heralding_signal), b the idler arm.
CountModel count_model(const SourceSpec& source, const ChannelSpec& ch_a,
                       const ChannelSpec& ch_b, double pump_mw, double window);

enum class CarConvention {
  total_over_accidental,  // (C + A) / A
  true_over_accidental,   // C / A
};

/// Throws UndefinedResult when the accidental rate is zero (infinite CAR).
double car(const CountModel& model,
           CarConvention convention = CarConvention::total_over_accidental);

/// A / (C + A); throws UndefinedResult with no coincidences at all.
double accidental_share(const CountModel& model);

}  // namespace pairlink::pairstats
