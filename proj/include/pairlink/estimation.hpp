#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pairlink::estimation {

struct FitResult {
  std::vector<std::pair<std::string, double>> params;
  double residual_rms = 0.0;
  bool converged = false;
  int iterations = 0;

  double at(std::string_view name) const;  // throws std::out_of_range
};

// Residuals r(p) = model(p) - data and their Jacobian dr/dp.
using ResidualFn =
    std::function<void(const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& jac)>;

struct LmSettings {
  int max_iter = 500;
  double rel_step_tol = 1e-10;
};

struct LmOutcome {
  Eigen::VectorXd params;
  double rss;
  int iterations;
  bool converged;
};

/// Levenberg-Marquardt with Marquardt diagonal scaling.
LmOutcome levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd start,
                              Eigen::Index n_residuals, const LmSettings& settings = {});

struct Cos2Options {
  // Angular scale s in y = A (1 + V cos(s x + phi)) / 2. Empty: fitted.
  std::optional<double> scale = 1.0;
};

/// Fringe fit. Params: amplitude, visibility, phase, scale. Needs >= 8
/// points covering a full period when the scale is known.
FitResult fit_cos2(std::span<const double> x, std::span<const double> y,
                   const Cos2Options& options = {});

/// CAR = k / P + baseline by linear least squares in 1/P. Params: k, baseline.
FitResult fit_inverse_power(std::span<const double> pump_mw, std::span<const double> car,
                            std::optional<double> fixed_baseline = std::nullopt);

/// amplitude * sinc^2 line of given center and FWHM. Params: center, fwhm,
/// amplitude.
FitResult fit_sinc2(std::span<const double> x, std::span<const double> y);

}  // namespace pairlink::estimation
