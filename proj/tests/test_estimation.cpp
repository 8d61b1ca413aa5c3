#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "generators.hpp"
#include "pairlink/errors.hpp"
#include "pairlink/estimation.hpp"
#include "pairlink/photonics.hpp"

using namespace pairlink;
using namespace pairlink::estimation;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Fringe {
  std::vector<double> x, y;
};

Fringe fringe(double amp, double vis, double phase, double scale, int n, double span) {
  Fringe f;
  for (int i = 0; i < n; ++i) {
    const double x = span * i / n;
    f.x.push_back(x);
    f.y.push_back(amp * (1 + vis * std::cos(scale * x + phase)) / 2);
  }
  return f;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

double sinc2(double x, double c, double fwhm) {
  const double u = 2 * 1.39155737825151 * (x - c) / fwhm;
  return u == 0 ? 1.0 : std::pow(std::sin(u) / u, 2);
}

}  // namespace

TEST_CASE("levenberg-marquardt on a Rosenbrock residual") {
  const ResidualFn fn = [](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& j) {
    r.resize(2);
    j.resize(2, 2);
    r << 10 * (p(1) - p(0) * p(0)), 1 - p(0);
    j << -20 * p(0), 10, -1, 0;
  };
  const auto out = levenberg_marquardt(fn, Eigen::Vector2d(-1.2, 1.0), 2);
  CHECK(out.converged);
  CHECK(out.params(0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(out.params(1) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("cos2 fit recovers noiseless fringes") {
  const auto f = fringe(1000, 0.995, 0.3, 2.0, 90, kPi);
  const auto r = fit_cos2(f.x, f.y, {2.0});
  CHECK(r.converged);
  CHECK(std::abs(r.at("visibility") - 0.995) < 1e-6);
  CHECK(r.at("amplitude") == doctest::Approx(1000).epsilon(1e-9));
  CHECK(r.residual_rms < 1e-6);

  const auto g = fringe(0.5, 0.991, -1.0, kPi / 2, 161, 8.0);
  const auto r2 = fit_cos2(g.x, g.y, Cos2Options{std::nullopt});
  CHECK(std::abs(r2.at("visibility") - 0.991) < 1e-6);
  CHECK(r2.at("scale") == doctest::Approx(kPi / 2).epsilon(1e-8));
}

TEST_CASE("cos2 fit of degenerate and invalid data") {
  std::vector<double> x(20), y(20, 3.0);
  for (int i = 0; i < 20; ++i) x[i] = i * 0.2;
  const auto r = fit_cos2(x, y, {2.0});
  CHECK(r.converged);
  CHECK(r.at("visibility") == 0.0);
  CHECK(r.at("amplitude") == doctest::Approx(6.0));  // y = A/2 when V = 0

  const auto few = fringe(1, 0.9, 0, 2, 6, kPi);
  CHECK_THROWS_AS(fit_cos2(few.x, few.y, {2.0}), DomainError);
  const auto short_span = fringe(1, 0.9, 0, 2, 20, 1.0);
  CHECK_THROWS_AS(fit_cos2(short_span.x, short_span.y, {2.0}), DomainError);
  CHECK_THROWS_AS(fit_cos2(x, std::vector<double>(19, 1.0), {2.0}), DomainError);
}

TEST_CASE("cos2 fit under Poisson noise") {
  std::vector<double> vis;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    auto f = fringe(2e4, 0.991, 0.2, 2.0, 60, kPi);
    for (double& y : f.y) y = static_cast<double>(std::poisson_distribution<long>(y)(rng));
    vis.push_back(fit_cos2(f.x, f.y, {2.0}).at("visibility"));
  }
  CHECK(std::abs(median(vis) - 0.991) < 0.003);
}

TEST_CASE("property: cos2 shape is invariant under y scaling and phase shifts") {
  std::mt19937_64 rng(81);
  for (int i = 0; i < 60; ++i) {
    const double v = testgen::uniform(rng, 0.05, 1.0);
    const double ph = testgen::uniform(rng, -kPi, kPi);
    const double a = testgen::uniform(rng, 0.1, 1e5);
    const auto f = fringe(a, v, ph, 2.0, 48, kPi);
    const auto r = fit_cos2(f.x, f.y, {2.0});
    CHECK(r.at("visibility") == doctest::Approx(v).epsilon(1e-7));

    const double k = testgen::uniform(rng, 1e-3, 1e3);
    std::vector<double> ys = f.y;
    for (double& y : ys) y *= k;
    CHECK(fit_cos2(f.x, ys, {2.0}).at("visibility") == doctest::Approx(v).epsilon(1e-7));

    const auto shifted = fringe(a, v, ph + testgen::uniform(rng, -3, 3), 2.0, 48, kPi);
    CHECK(fit_cos2(shifted.x, shifted.y, {2.0}).at("visibility") ==
          doctest::Approx(v).epsilon(1e-7));
  }
}

TEST_CASE("property: fitted residual never exceeds the generating residual") {
  std::mt19937_64 rng(82);
  for (int i = 0; i < 40; ++i) {
    const double v = testgen::uniform(rng, 0.0, 1.0);
    const auto f = fringe(100, v, testgen::uniform(rng, -3, 3), 2.0, 40, kPi);
    CHECK(fit_cos2(f.x, f.y, {2.0}).residual_rms <= 1e-9);
  }
}

TEST_CASE("inverse power fit") {
  std::vector<double> p, c;
  for (double x = 10; x <= 125; x += 11.5) {
    p.push_back(x);
    c.push_back(11364 / x + 1);
  }
  const auto r = fit_inverse_power(p, c);
  CHECK(r.at("k") == doctest::Approx(11364).epsilon(1e-12));
  CHECK(std::abs(r.at("k") - 11364) < 1e-9 * 11364);
  CHECK(r.at("baseline") == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.residual_rms < 1e-9);
  // 11364/125 + 1 = 91.9 and 1/91.9 is a 1.09 % accidental share.
  CHECK(11364.0 / 125 + 1 == doctest::Approx(91.9).epsilon(1e-3));

  const auto fixed = fit_inverse_power(p, c, 1.0);
  CHECK(fixed.at("baseline") == 1.0);
  CHECK(fixed.at("k") == doctest::Approx(11364).epsilon(1e-12));

  const std::vector<double> flat(p.size(), 42.0);
  CHECK(std::abs(fit_inverse_power(p, flat).at("k")) < 1e-9);

  std::vector<double> neg = p;
  neg[0] = 0;
  CHECK_THROWS_AS(fit_inverse_power(neg, c), DomainError);
  CHECK_THROWS_AS(fit_inverse_power(std::vector<double>{1, 2}, std::vector<double>{1, 2}),
                  DomainError);
}

TEST_CASE("sinc2 fit") {
  std::vector<double> x, y;
  for (int i = 0; i < 81; ++i) {
    x.push_back(1545 + 10.0 * i / 80);
    y.push_back(7.5 * sinc2(x.back(), 1550, 2.3));
  }
  const auto r = fit_sinc2(x, y);
  CHECK(r.converged);
  CHECK(std::abs(r.at("fwhm") - 2.3) < 1e-4);
  CHECK(std::abs(r.at("center") - 1550) < 1e-4);
  CHECK(r.at("amplitude") == doctest::Approx(7.5).epsilon(1e-6));

  std::vector<double> y3 = y;
  for (double& v : y3) v *= 3;
  const auto r3 = fit_sinc2(x, y3);
  CHECK(r3.at("amplitude") == doctest::Approx(22.5).epsilon(1e-6));
  CHECK(r3.at("fwhm") == doctest::Approx(r.at("fwhm")).epsilon(1e-8));
  CHECK(r3.at("center") == doctest::Approx(r.at("center")).epsilon(1e-10));

  std::vector<double> xs(x.begin(), x.begin() + 10), ys(y.begin(), y.begin() + 10);
  CHECK_THROWS_AS(fit_sinc2(xs, ys), DomainError);
}

TEST_CASE("sinc2 fit under multiplicative noise") {
  std::vector<double> fw;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0, 0.05);
    std::vector<double> x, y;
    for (int i = 0; i < 81; ++i) {
      x.push_back(1545 + 10.0 * i / 80);
      y.push_back(sinc2(x.back(), 1550, 2.3) * (1 + g(rng)));
    }
    fw.push_back(fit_sinc2(x, y).at("fwhm"));
  }
  CHECK(std::abs(median(fw) - 2.3) < 0.1);
}

TEST_CASE("fit result lookup") {
  FitResult r;
  r.params = {{"k", 1.0}};
  CHECK(r.at("k") == 1.0);
  CHECK_THROWS_AS(r.at("missing"), std::out_of_range);
}
