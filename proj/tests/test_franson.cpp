#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "generators.hpp"
#include "pairlink/errors.hpp"
#include "pairlink/estimation.hpp"
#include "pairlink/franson.hpp"

using namespace pairlink;
using namespace pairlink::franson;

constexpr double kPi = 3.14159265358979323846;

TEST_CASE("feasibility with the interferometer parameters") {
  const auto r = franson_feasibility(FransonConfig{});
  CHECK(r.delay == doctest::Approx(400e-12));
  CHECK(r.photon_coherence == doctest::Approx(10e-12));
  CHECK(r.pump_coherence == doctest::Approx(200e-6));
  CHECK(r.pass);

  FransonConfig narrow;
  narrow.photon_bandwidth = 1e9;  // 1 ns coherence exceeds the 400 ps delay
  CHECK_FALSE(franson_feasibility(narrow).pass);

  FransonConfig degenerate;
  degenerate.pump_linewidth = degenerate.photon_bandwidth;
  CHECK_FALSE(franson_feasibility(degenerate).pass);
}

TEST_CASE("feasibility is exactly the two strict inequalities") {
  FransonConfig c;
  // Photon coherence equal to the delay fails, just shorter passes.
  c.photon_bandwidth = c.fsr;
  CHECK_FALSE(franson_feasibility(c).pass);
  c.photon_bandwidth = c.fsr * 1.001;
  CHECK(franson_feasibility(c).pass);
  // Pump coherence equal to the delay fails, just longer passes.
  c = FransonConfig{};
  c.pump_linewidth = c.fsr;
  CHECK_FALSE(franson_feasibility(c).pass);
  c.pump_linewidth = c.fsr * 0.999;
  CHECK(franson_feasibility(c).pass);
  // Narrowing the photon bandwidth at fixed delay eventually fails.
  c = FransonConfig{};
  bool failed = false;
  for (double bw = 100e9; bw > 1e6; bw /= 2) {
    c.photon_bandwidth = bw;
    if (!franson_feasibility(c).pass) failed = true;
    if (failed) CHECK_FALSE(franson_feasibility(c).pass);
  }
  CHECK(failed);
}

TEST_CASE("fringe values") {
  FransonConfig c;
  c.visibility = 1.0;
  c.phase_offset = 0.3;
  CHECK(franson_fringe(c, -0.3) == doctest::Approx(0.5));
  CHECK(std::abs(franson_fringe(c, kPi - 0.3)) < 1e-15);
  c.visibility = 0.991;
  c.phase_offset = 0.0;
  std::vector<double> v;
  for (int i = 0; i < 400; ++i) v.push_back(franson_fringe(c, 2 * kPi * i / 400.0));
  const double mx = *std::max_element(v.begin(), v.end());
  const double mn = *std::min_element(v.begin(), v.end());
  CHECK((mx - mn) / (mx + mn) == doctest::Approx(0.991).epsilon(1e-12));
}

TEST_CASE("property: fringe bounded in [0, 1/2]") {
  std::mt19937_64 rng(61);
  for (int i = 0; i < 2000; ++i) {
    FransonConfig c;
    c.visibility = testgen::uniform(rng, 0, 1);
    c.phase_offset = testgen::uniform(rng, -10, 10);
    const double f = franson_fringe(c, testgen::uniform(rng, -100, 100));
    CHECK((f >= 0.0 && f <= 0.5));
  }
}

TEST_CASE("fringe versus voltage") {
  FransonConfig c;
  c.phase_offset = 0.4;
  const std::vector<double> volts{0.0, 1.0, 4.0};
  const auto s = fringe_vs_voltage(c, volts);
  REQUIRE(s.size() == 3);
  CHECK(s[0].voltage == 0.0);
  CHECK(s[0].relative_rate == doctest::Approx(0.25 * (1 + 0.991 * std::cos(0.4))));
  // Period 2 pi / (pi/2) = 4 V.
  CHECK(s[2].relative_rate == doctest::Approx(s[0].relative_rate).epsilon(1e-12));

  c.phase_per_volt = 0.0;
  const std::vector<double> many{0, 1, 2, 3, 5, 8};
  const auto flat = fringe_vs_voltage(c, many);
  for (const auto& x : flat) CHECK(x.relative_rate == flat[0].relative_rate);
}

TEST_CASE("property: dense scans give back the configured visibility") {
  std::mt19937_64 rng(62);
  for (int i = 0; i < 50; ++i) {
    FransonConfig c;
    c.visibility = testgen::uniform(rng, 0, 1);
    c.phase_per_volt = testgen::uniform(rng, 0.5, 5);
    c.phase_offset = testgen::uniform(rng, -3, 3);
    // Extremes from the closed form, sampled where the cosine is +-1.
    const double vmax = (0 - c.phase_offset) / c.phase_per_volt;
    const double vmin = (kPi - c.phase_offset) / c.phase_per_volt;
    const std::vector<double> at{vmax, vmin};
    const auto s = fringe_vs_voltage(c, at);
    const double vis =
        (s[0].relative_rate - s[1].relative_rate) / (s[0].relative_rate + s[1].relative_rate);
    CHECK(vis == doctest::Approx(c.visibility).epsilon(1e-9));
  }
}

TEST_CASE("round trip through the cos2 fit") {
  FransonConfig c;
  std::vector<double> volts;
  for (int i = 0; i < 161; ++i) volts.push_back(8.0 * i / 160.0);
  const auto s = fringe_vs_voltage(c, volts);
  std::vector<double> y;
  for (const auto& x : s) y.push_back(x.relative_rate);
  const auto fit = estimation::fit_cos2(volts, y, {c.phase_per_volt});
  CHECK(fit.converged);
  CHECK(std::abs(fit.at("visibility") - 0.991) < 1e-3);
}

TEST_CASE("config validation") {
  FransonConfig c;
  c.fsr = 0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = FransonConfig{};
  c.visibility = 1.2;
  CHECK_THROWS_AS(franson_fringe(c, 0.0), DomainError);
}
