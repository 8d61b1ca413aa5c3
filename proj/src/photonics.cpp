#include "pairlink/photonics.hpp"

#include <cmath>

#include "pairlink/errors.hpp"

namespace pairlink::photonics {

Wavelength::Wavelength(double meters) : meters_(meters) {
  require(meters > 0.0 && std::isfinite(meters), "wavelength must be positive");
}

BeamParams BeamParams::make(double waist_radius, Wavelength wavelength) {
  return {waist_radius, wavelength, photonics::rayleigh_length(waist_radius, wavelength)};
}

double rayleigh_length(double waist_radius, Wavelength wavelength) {
  require(waist_radius > 0.0, "waist radius must be positive");
  return kPi * waist_radius * waist_radius / wavelength.meters();
}

Wavelength spdc_partner_wavelength(Wavelength pump, Wavelength signal) {
  require(signal.meters() > pump.meters(),
          "signal wavelength must exceed the pump wavelength");
  // lp*ls/(ls-lp) avoids the cancellation of 1/lp - 1/ls.
  const double lp = pump.meters();
  const double ls = signal.meters();
  return Wavelength(lp * ls / (ls - lp));
}

double bandwidth_lambda_to_nu(double delta_lambda, Wavelength center) {
  require(delta_lambda > 0.0, "bandwidth must be positive");
  const double l = center.meters();
  return kSpeedOfLight * delta_lambda / (l * l);
}

double bandwidth_nu_to_lambda(double delta_nu, Wavelength center) {
  require(delta_nu > 0.0, "bandwidth must be positive");
  const double l = center.meters();
  return delta_nu * l * l / kSpeedOfLight;
}

double sinc2_profile(double x, double center, double fwhm) {
  const double arg = 2.0 * kSinc2HalfMaxArgument * (x - center) / fwhm;
  if (std::abs(arg) < 1e-8) return 1.0 - arg * arg / 3.0;
  const double s = std::sin(arg) / arg;
  return s * s;
}

double gaussian_profile(double x, double center, double fwhm) {
  const double u = (x - center) / fwhm;
  return std::exp(-4.0 * std::log(2.0) * u * u);
}

double spectral_density(const SpectralShape& shape, double frequency) {
  switch (shape.profile) {
    case SpectralProfile::sinc2:
      return sinc2_profile(frequency, shape.center_frequency, shape.fwhm_bandwidth);
    case SpectralProfile::gaussian:
      return gaussian_profile(frequency, shape.center_frequency, shape.fwhm_bandwidth);
  }
  return 0.0;
}

}  // namespace pairlink::photonics
