#pragma once

// Wavelength/frequency bookkeeping, Gaussian-beam parameters and the
// spectral line shapes used by the rest of the library. Everything is SI
// internally; the *_nm helpers exist for interface code.

namespace pairlink::photonics {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = 3.14159265358979323846;

// Argument x > 0 at which sinc^2(x) = (sin x / x)^2 equals 1/2.
inline constexpr double kSinc2HalfMaxArgument = 1.39155737825151;

class Wavelength {
 public:
  explicit Wavelength(double meters);
  static Wavelength from_nm(double nm) { return Wavelength(nm * 1e-9); }

  double meters() const { return meters_; }
  double nm() const { return meters_ * 1e9; }
  double frequency() const { return kSpeedOfLight / meters_; }

  friend bool operator==(const Wavelength&, const Wavelength&) = default;

 private:
  double meters_;
};

struct BeamParams {
  double waist_radius;  // m
  Wavelength wavelength;
  double rayleigh_length;  // m

  static BeamParams make(double waist_radius, Wavelength wavelength);
};

enum class SpectralProfile { sinc2, gaussian };

struct SpectralShape {
  double center_frequency;  // Hz
  double fwhm_bandwidth;    // Hz
  SpectralProfile profile = SpectralProfile::sinc2;
};

/// z_R = pi w^2 / lambda. Throws DomainError for a non-positive waist.
double rayleigh_length(double waist_radius, Wavelength wavelength);

/// Energy-conserving SPDC partner: 1/lambda_i = 1/lambda_p - 1/lambda_s.
/// The signal must be strictly longer than the pump.
Wavelength spdc_partner_wavelength(Wavelength pump, Wavelength signal);

/// First-order conversion |d nu| = c d lambda / lambda^2.
double bandwidth_lambda_to_nu(double delta_lambda, Wavelength center);
double bandwidth_nu_to_lambda(double delta_nu, Wavelength center);

/// Peak-normalized line shape on an arbitrary axis: value 1 at `center`,
/// 1/2 at center +- fwhm/2.
double sinc2_profile(double x, double center, double fwhm);
double gaussian_profile(double x, double center, double fwhm);

double spectral_density(const SpectralShape& shape, double frequency);

}  // namespace pairlink::photonics
