#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "pairlink/franson.hpp"
#include "pairlink/pairstats.hpp"
#include "pairlink/polarization.hpp"

namespace pairlink::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every analysis parameter, in interface units (nm, ps, GHz, mW). Defaults
// mirror the measured source and the hybrid link.
struct RunConfig {
  struct Source {
    double pair_rate_per_mw = 1.4e5;
    double spectral_brightness = 4.8e3;
    double bandwidth_ghz = 287.0;
    double heralding_signal = 0.55;
    double heralding_idler = 0.48;
    double visibility_hv = 0.995;
    double visibility_da = 0.993;
  } source;

  struct Channel {
    double wavelength_nm;
    double loss_db;
    double detector_efficiency;
    double dark_rate_hz;
    double jitter_ps = 0.0;
  };
  Channel channel_signal{810.0, 15.0, 0.60, 200.0};
  Channel channel_idler{1550.0, 15.0, 0.80, 50.0};

  struct Qkd {
    double window_ps = 900.0;
    double ec_efficiency = 1.1;
    double sifting_factor = 0.5;
    double p_min_mw = 1.0;
    double p_max_mw = 2000.0;
    int points = 400;
    double report_pump_mw = 125.0;
  } qkd;

  // Back-to-back characterization bench (no link loss).
  struct Lab {
    double pair_rate_per_mw = 1.0e5;
    double loss_signal_db = 0.0;
    double loss_idler_db = 0.0;
    double window_ps = 900.0;
    double pump_mw = 125.0;
    double p_min_mw = 10.0;
    double p_max_mw = 125.0;
    int points = 12;
    double duration_s = 0.05;
    int seeds = 5;
    double accidental_offset_ns = 100.0;
  } lab;

  struct Beam {
    std::vector<double> wavelengths_nm{532.0, 810.0, 1550.0};
    std::vector<double> waists_um{200.0, 145.0, 140.0};
    bool wavelengths_set = false;
    bool waists_set = false;
  } beam;

  struct Franson {
    double fsr_ghz = 2.5;
    double photon_bandwidth_ghz = 100.0;
    double pump_linewidth_khz = 5.0;
    double visibility = 0.991;
    double phase_per_volt = 1.5707963267948966;
    double phase_offset = 0.0;
    double v_min = 0.0;
    double v_max = 8.0;
    int points = 161;
  } franson;

  struct Polarization {
    double visibility = 0.995;  // Werner weight of the fringe state
    polarization::PolLabel fixed = polarization::PolLabel::H;
    int points = 180;
    std::string axis = "analyzer";  // analyzer | hwp
  } polarization;

  struct Tomography {
    double werner_p = 1.0;
    double mean_total = 1e6;
    double integration_s = 1.0;
  } tomography;

  struct Run {
    std::uint64_t seed = 1;
    std::string output_dir = ".";
  } run;

  pairstats::SourceSpec source_spec() const;
  pairstats::SourceSpec lab_source_spec() const;
  pairstats::ChannelSpec signal_channel(double loss_db) const;
  pairstats::ChannelSpec idler_channel(double loss_db) const;
  franson::FransonConfig franson_config() const;
};

// Applies "section.key = value" to cfg. Unknown keys and malformed values
// throw ConfigError.
void set_config_value(RunConfig& cfg, const std::string& dotted_key, const std::string& value);

// INI-style text: "[section]" headers, "key = value" lines, '#' or ';'
// comments. Duplicate keys are rejected.
void apply_config(RunConfig& cfg, std::istream& in);

// Cross-field checks performed after all overrides are applied.
void validate_config(const RunConfig& cfg);

// The full default configuration as a commented config file.
std::string default_config_text();

}  // namespace pairlink::cli
