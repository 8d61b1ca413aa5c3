#include "pairlink/pairstats.hpp"

#include <cmath>

#include "pairlink/errors.hpp"

namespace pairlink::pairstats {

namespace {
bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }
}  // namespace

void SourceSpec::validate() const {
  require(pair_rate_per_mw >= 0.0 && spectral_brightness >= 0.0 && bandwidth >= 0.0,
          "source rates must be non-negative");
  require(is_probability(heralding_signal) && is_probability(heralding_idler),
          "heralding efficiencies must lie in [0,1]");
  require(is_probability(intrinsic_pol_error) && is_probability(intrinsic_pol_error_x),
          "intrinsic polarization errors must lie in [0,1]");
}

void ChannelSpec::validate() const {
  require(loss_db >= 0.0, "channel loss must be non-negative");
  require(is_probability(detector_efficiency), "detector efficiency must lie in [0,1]");
  require(dark_rate >= 0.0, "dark rate must be non-negative");
  require(jitter_sigma >= 0.0, "jitter must be non-negative");
}

double error_from_visibility(double visibility) {
  require(is_probability(visibility), "visibility must lie in [0,1]");
  return 0.5 * (1.0 - visibility);
}

SourceSpec measured_source() {
  SourceSpec s;
  s.intrinsic_pol_error = error_from_visibility(0.995);
  s.intrinsic_pol_error_x = error_from_visibility(0.993);
  return s;
}

ChannelSpec si_apd_810(double loss_db) {
  return {Wavelength::from_nm(810.0), loss_db, 0.60, 200.0, 0.0};
}

ChannelSpec snspd_1550(double loss_db) {
  return {Wavelength::from_nm(1550.0), loss_db, 0.80, 50.0, 0.0};
}

double pair_rate(const SourceSpec& source, double pump_mw) {
  require(pump_mw >= 0.0, "pump power must be non-negative");
  return source.pair_rate_per_mw * pump_mw;
}

double arm_transmission(const ChannelSpec& channel, double heralding) {
  channel.validate();
  require(is_probability(heralding), "heralding efficiency must lie in [0,1]");
  return heralding * std::pow(10.0, -channel.loss_db / 10.0) * channel.detector_efficiency;
}

CountModel count_model(const SourceSpec& source, const ChannelSpec& ch_a,
                       const ChannelSpec& ch_b, double pump_mw, double window) {
  source.validate();
  require(window > 0.0, "coincidence window must be positive");
  const double rate = pair_rate(source, pump_mw);
  const double ta = arm_transmission(ch_a, source.heralding_signal);
  const double tb = arm_transmission(ch_b, source.heralding_idler);
  CountModel m;
  m.pair_rate = rate;
  m.singles_a = rate * ta + ch_a.dark_rate;
  m.singles_b = rate * tb + ch_b.dark_rate;
  m.true_coinc = rate * ta * tb;
  m.accidental = m.singles_a * m.singles_b * window;
  m.mu_per_window = rate * window;
  m.window = window;
  return m;
}

double car(const CountModel& model, CarConvention convention) {
  if (!(model.accidental > 0.0)) throw UndefinedResult("infinite CAR: accidental rate is zero");
  switch (convention) {
    case CarConvention::true_over_accidental:
      return model.true_coinc / model.accidental;
    case CarConvention::total_over_accidental:
      break;
  }
  return (model.true_coinc + model.accidental) / model.accidental;
}

double accidental_share(const CountModel& model) {
  const double total = model.true_coinc + model.accidental;
  if (!(total > 0.0)) throw UndefinedResult("no coincidences: accidental share undefined");
  return model.accidental / total;
}

}  // namespace pairlink::pairstats
