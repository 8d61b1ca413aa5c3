#include "pairlink/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "pairlink/errors.hpp"
#include "pairlink/photonics.hpp"

namespace pairlink::estimation {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kTwoPi = 2.0 * photonics::kPi;

double wrap_phase(double phi) {
  phi = std::remainder(phi, kTwoPi);
  return phi <= -photonics::kPi ? phi + kTwoPi : phi;
}

void check_finite(std::span<const double> v) {
  for (double d : v) require(std::isfinite(d), "fit data must be finite");
}

double rms(const VectorXd& r) {
  return r.size() == 0 ? 0.0 : std::sqrt(r.squaredNorm() / static_cast<double>(r.size()));
}

// Phase-free linear fit y = a + b cos(s x) + c sin(s x); returns (a,b,c,rss).
Eigen::Vector4d harmonic_fit(std::span<const double> x, std::span<const double> y, double s) {
  const auto n = static_cast<Eigen::Index>(x.size());
  MatrixXd design(n, 3);
  VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = std::cos(s * x[i]);
    design(i, 2) = std::sin(s * x[i]);
    rhs(i) = y[i];
  }
  const VectorXd c = design.colPivHouseholderQr().solve(rhs);
  return {c(0), c(1), c(2), (design * c - rhs).squaredNorm()};
}

// sinc(a) and its derivative.
std::pair<double, double> sinc_and_slope(double a) {
  if (std::abs(a) < 1e-6) return {1.0 - a * a / 6.0, -a / 3.0};
  return {std::sin(a) / a, (a * std::cos(a) - std::sin(a)) / (a * a)};
}

}  // namespace

double FitResult::at(std::string_view name) const {
  for (const auto& [k, v] : params)
    if (k == name) return v;
  throw std::out_of_range("no fit parameter named " + std::string(name));
}

LmOutcome levenberg_marquardt(const ResidualFn& fn, VectorXd p, Eigen::Index n_residuals,
                              const LmSettings& settings) {
  VectorXd r(n_residuals);
  MatrixXd jac(n_residuals, p.size());
  fn(p, r, jac);
  double rss = r.squaredNorm();
  double lambda = 1e-3;
  int iter = 0;
  bool converged = false;

  VectorXd r_try(n_residuals);
  MatrixXd jac_try(n_residuals, p.size());
  while (iter < settings.max_iter) {
    ++iter;
    if (rss == 0.0) {
      converged = true;
      break;
    }
    const MatrixXd jtj = jac.transpose() * jac;
    const VectorXd g = jac.transpose() * r;
    VectorXd diag = jtj.diagonal().cwiseMax(1e-300);
    bool accepted = false;
    VectorXd step;
    while (lambda < 1e20) {
      MatrixXd a = jtj;
      a.diagonal() += lambda * diag;
      step = a.ldlt().solve(-g);
      const VectorXd p_try = p + step;
      fn(p_try, r_try, jac_try);
      const double rss_try = r_try.squaredNorm();
      if (std::isfinite(rss_try) && rss_try < rss) {
        p = p_try;
        r.swap(r_try);
        jac.swap(jac_try);
        rss = rss_try;
        lambda = std::max(lambda / 10.0, 1e-15);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      // No decrease available at working precision.
      converged = true;
      break;
    }
    const double tol = settings.rel_step_tol;
    if ((step.array().abs() <= tol * (p.array().abs() + tol)).all()) {
      converged = true;
      break;
    }
  }
  return {p, rss, iter, converged};
}

FitResult fit_cos2(std::span<const double> x, std::span<const double> y,
                   const Cos2Options& options) {
  require(x.size() == y.size(), "x and y lengths differ");
  require(x.size() >= 8, "cos^2 fit needs at least 8 points");
  check_finite(x);
  check_finite(y);
  const auto n = x.size();
  const auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
  const double span = *xmax_it - *xmin_it;
  require(span > 0.0, "x values must not all coincide");
  const auto [ymin_it, ymax_it] = std::minmax_element(y.begin(), y.end());
  const double ymean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  if (*ymax_it - *ymin_it <= 1e-12 * std::max(1.0, std::abs(ymean))) {
    return {{{"amplitude", 2.0 * ymean},
             {"visibility", 0.0},
             {"phase", 0.0},
             {"scale", options.scale.value_or(0.0)}},
            0.0,
            true,
            0};
  }
  if (options.scale) {
    require(*options.scale > 0.0, "fringe scale must be positive");
    // Uniform samples cover one sample spacing beyond the last point.
    const double coverage = span * *options.scale * static_cast<double>(n) / (n - 1.0);
    require(coverage >= kTwoPi * (1.0 - 1e-9), "data must span at least one fringe period");
  }

  // Seed: phase-free harmonic fit, with a grid over the scale if unknown.
  double s0 = options.scale.value_or(0.0);
  Eigen::Vector4d best;
  if (options.scale) {
    best = harmonic_fit(x, y, s0);
  } else {
    double mean_dx = span / (n - 1.0);
    const double s_lo = photonics::kPi / span;        // half a period over the data
    const double s_hi = photonics::kPi / mean_dx;     // Nyquist
    best(3) = std::numeric_limits<double>::infinity();
    const int grid = 2000;
    for (int k = 0; k < grid; ++k) {
      const double s = s_lo * std::pow(s_hi / s_lo, k / (grid - 1.0));
      const Eigen::Vector4d c = harmonic_fit(x, y, s);
      if (c(3) < best(3)) {
        best = c;
        s0 = s;
      }
    }
  }
  const double a0 = std::max(best(0), 1e-300);
  const double v0 = std::clamp(std::hypot(best(1), best(2)) / a0, 1e-6, 1.0 - 1e-9);
  const double phi0 = std::atan2(-best(2), best(1));

  const bool fit_scale = !options.scale;
  VectorXd p(fit_scale ? 4 : 3);
  p(0) = 2.0 * a0;
  p(1) = std::asin(std::sqrt(v0));
  p(2) = phi0;
  if (fit_scale) p(3) = s0;

  const auto residuals = [&](const VectorXd& q, VectorXd& r, MatrixXd& jac) {
    const double amp = q(0);
    const double su = std::sin(q(1));
    const double vis = su * su;
    const double dvis = std::sin(2.0 * q(1));
    const double s = fit_scale ? q(3) : s0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const double arg = s * x[i] + q(2);
      const double c = std::cos(arg);
      const double sn = std::sin(arg);
      r(ii) = 0.5 * amp * (1.0 + vis * c) - y[i];
      jac(ii, 0) = 0.5 * (1.0 + vis * c);
      jac(ii, 1) = 0.5 * amp * c * dvis;
      jac(ii, 2) = -0.5 * amp * vis * sn;
      if (fit_scale) jac(ii, 3) = -0.5 * amp * vis * sn * x[i];
    }
  };
  const LmOutcome lm = levenberg_marquardt(residuals, p, static_cast<Eigen::Index>(n));

  VectorXd r(static_cast<Eigen::Index>(n));
  MatrixXd jac(static_cast<Eigen::Index>(n), lm.params.size());
  residuals(lm.params, r, jac);
  const double su = std::sin(lm.params(1));
  return {{{"amplitude", lm.params(0)},
           {"visibility", su * su},
           {"phase", wrap_phase(lm.params(2))},
           {"scale", fit_scale ? lm.params(3) : s0}},
          rms(r),
          lm.converged,
          lm.iterations};
}

FitResult fit_inverse_power(std::span<const double> pump_mw, std::span<const double> car,
                            std::optional<double> fixed_baseline) {
  require(pump_mw.size() == car.size(), "pump and CAR lengths differ");
  require(pump_mw.size() >= 3, "inverse-power fit needs at least 3 points");
  check_finite(car);
  for (double p : pump_mw) require(p > 0.0 && std::isfinite(p), "pump powers must be positive");

  const auto n = static_cast<Eigen::Index>(pump_mw.size());
  VectorXd z(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    z(i) = 1.0 / pump_mw[static_cast<std::size_t>(i)];
    y(i) = car[static_cast<std::size_t>(i)];
  }
  double k = 0.0;
  double baseline = 0.0;
  if (fixed_baseline) {
    baseline = *fixed_baseline;
    k = z.dot(y.array().matrix() - VectorXd::Constant(n, baseline)) / z.squaredNorm();
  } else {
    const double zm = z.mean();
    const double ym = y.mean();
    const VectorXd dz = z.array() - zm;
    const double szz = dz.squaredNorm();
    require(szz > 0.0, "inverse-power fit needs at least two distinct pump powers");
    k = dz.dot((y.array() - ym).matrix()) / szz;
    baseline = ym - k * zm;
  }
  const VectorXd r = (k * z.array() + baseline).matrix() - y;
  return {{{"k", k}, {"baseline", baseline}}, rms(r), true, 0};
}

FitResult fit_sinc2(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "x and y lengths differ");
  require(x.size() >= 16, "sinc^2 fit needs at least 16 points");
  check_finite(x);
  check_finite(y);
  const auto n = x.size();
  const auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
  const double span = *xmax_it - *xmin_it;
  require(span > 0.0, "x values must not all coincide");

  // Coarse grid over center and width; amplitude solved linearly.
  std::vector<double> xs(x.begin(), x.end());
  std::sort(xs.begin(), xs.end());
  double min_dx = span;
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (xs[i] > xs[i - 1]) min_dx = std::min(min_dx, xs[i] - xs[i - 1]);

  double best_rss = std::numeric_limits<double>::infinity();
  double c0 = xs[n / 2], w0 = span / 4.0, a0 = 1.0;
  const int n_center = 200;
  const int n_width = 80;
  for (int ic = 0; ic < n_center; ++ic) {
    const double c = *xmin_it + span * ic / (n_center - 1.0);
    for (int iw = 0; iw < n_width; ++iw) {
      const double w = min_dx * std::pow(2.0 * span / min_dx, iw / (n_width - 1.0));
      double fy = 0.0, ff = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double f = photonics::sinc2_profile(x[i], c, w);
        fy += f * y[i];
        ff += f * f;
      }
      if (ff <= 0.0) continue;
      const double a = fy / ff;
      double rss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = a * photonics::sinc2_profile(x[i], c, w) - y[i];
        rss += d * d;
      }
      if (rss < best_rss) {
        best_rss = rss;
        c0 = c;
        w0 = w;
        a0 = a;
      }
    }
  }

  const double k_half = 2.0 * photonics::kSinc2HalfMaxArgument;
  // Parameters: center, log(fwhm), amplitude.
  const auto residuals = [&](const VectorXd& q, VectorXd& r, MatrixXd& jac) {
    const double w = std::exp(q(1));
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const double arg = k_half * (x[i] - q(0)) / w;
      const auto [s, ds] = sinc_and_slope(arg);
      const double f = s * s;
      const double df_darg = 2.0 * s * ds;
      r(ii) = q(2) * f - y[i];
      jac(ii, 0) = q(2) * df_darg * (-k_half / w);
      jac(ii, 1) = q(2) * df_darg * (-arg);
      jac(ii, 2) = f;
    }
  };
  VectorXd p(3);
  p << c0, std::log(w0), a0;
  const LmOutcome lm = levenberg_marquardt(residuals, p, static_cast<Eigen::Index>(n));
  VectorXd r(static_cast<Eigen::Index>(n));
  MatrixXd jac(static_cast<Eigen::Index>(n), 3);
  residuals(lm.params, r, jac);
  return {{{"center", lm.params(0)}, {"fwhm", std::exp(lm.params(1))}, {"amplitude", lm.params(2)}},
          rms(r),
          lm.converged,
          lm.iterations};
}

}  // namespace pairlink::estimation
