#pragma once

#include <optional>
#include <vector>

#include "pairlink/pairstats.hpp"

namespace pairlink::qkd {

using pairstats::ChannelSpec;
using pairstats::CountModel;
using pairstats::SourceSpec;

struct LinkSpec {
  SourceSpec source;
  ChannelSpec ch_signal;  // 810 nm, free-space arm
  ChannelSpec ch_idler;   // 1550 nm, fiber arm
  double window = pairstats::kDefaultWindow;
  double ec_efficiency = 1.1;  // error-correction inefficiency f >= 1
  double sifting_factor = 0.5;

  void validate() const;
};

// 30 dB hybrid link: 15 dB on each arm, 900 ps window, measured source and
// detectors.
LinkSpec hybrid_link();

struct KeyRatePoint {
  double pump_mw;
  double sifted_rate;  // Hz
  double qber_z;
  double qber_x;
  double skr;  // bit/s
};

struct QberResult {
  double qber_z;
  double qber_x;
  CountModel counts;
};

/// -x log2 x - (1-x) log2 (1-x), exact zero at both endpoints.
double binary_entropy(double x);

/// Accidentals carry error probability 1/2 in both bases. Throws
/// UndefinedResult when there are no coincidences.
QberResult link_qber(const LinkSpec& link, double pump_mw);

/// Asymptotic BBM92: q R_sift [1 - f h(e_z) - h(e_x)], clamped at 0.
KeyRatePoint secret_key_rate(const LinkSpec& link, double pump_mw);

struct SweepResult {
  std::vector<KeyRatePoint> points;
  std::optional<double> p_opt;             // argmax skr, refined
  std::optional<double> p_at_qberz_5pct;   // first 5 % crossing of qber_z
};

inline constexpr double kQberTarget = 0.05;

/// Uniform grid of n >= 16 powers over [p_min, p_max]. p_opt is empty when
/// the key rate vanishes on the whole grid.
SweepResult pump_sweep(const LinkSpec& link, double p_min, double p_max, int n);

}  // namespace pairlink::qkd
