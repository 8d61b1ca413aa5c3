#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "generators.hpp"
#include "pairlink/errors.hpp"
#include "pairlink/pairstats.hpp"

using namespace pairlink;
using namespace pairlink::pairstats;

namespace {

ChannelSpec channel(double nm, double loss, double eff, double dark) {
  ChannelSpec c{Wavelength::from_nm(nm)};
  c.loss_db = loss;
  c.detector_efficiency = eff;
  c.dark_rate = dark;
  return c;
}

ChannelSpec ideal() { return channel(810, 0, 1, 0); }

SourceSpec lossless_source(double rate_per_mw) {
  SourceSpec s;
  s.pair_rate_per_mw = rate_per_mw;
  s.heralding_signal = 1.0;
  s.heralding_idler = 1.0;
  return s;
}

}  // namespace

TEST_CASE("pair rate") {
  CHECK(pair_rate(measured_source(), 125.0) == doctest::Approx(1.75e7));
  CHECK(pair_rate(measured_source(), 0.0) == 0.0);
  CHECK_THROWS_AS(pair_rate(measured_source(), -1.0), DomainError);
  // Spectral route: 4.8e3 * 287 GHz in GHz units.
  const auto s = measured_source();
  CHECK(s.spectral_brightness * s.bandwidth / 1e9 == doctest::Approx(1.3776e6));
}

TEST_CASE("measured defaults") {
  const auto s = measured_source();
  CHECK(s.heralding_signal == 0.55);
  CHECK(s.heralding_idler == 0.48);
  CHECK(s.intrinsic_pol_error == doctest::Approx((1 - 0.995) / 2));
  CHECK(s.intrinsic_pol_error_x == doctest::Approx((1 - 0.993) / 2));
  CHECK(si_apd_810().detector_efficiency == 0.60);
  CHECK(si_apd_810().dark_rate == 200.0);
  CHECK(snspd_1550().detector_efficiency == 0.80);
  CHECK(snspd_1550().dark_rate == 50.0);
  CHECK(snspd_1550(15).loss_db == 15.0);
  CHECK(error_from_visibility(0.995) == doctest::Approx(0.0025));
}

TEST_CASE("arm transmission") {
  CHECK(arm_transmission(channel(810, 0, 0.6, 0), 0.55) == doctest::Approx(0.33));
  CHECK(arm_transmission(channel(1550, 15, 0.8, 0), 0.48) ==
        doctest::Approx(0.01214).epsilon(1e-3));
  CHECK(arm_transmission(channel(1550, std::numeric_limits<double>::infinity(), 0.8, 0), 0.48) ==
        0.0);
  CHECK_THROWS_AS(arm_transmission(channel(810, -1, 0.5, 0), 0.5), DomainError);
  CHECK_THROWS_AS(arm_transmission(channel(810, 0, 1.5, 0), 0.5), DomainError);
}

TEST_CASE("count model") {
  const auto lossless = count_model(lossless_source(1e5), ideal(), ideal(), 10.0, 1e-9);
  CHECK(lossless.true_coinc == doctest::Approx(1e6));
  CHECK(lossless.mu_per_window == doctest::Approx(1e6 * 1e-9));

  // Singles of 1e6 Hz each through a 1 ns window: 1000 Hz accidentals.
  const auto darks_only =
      count_model(lossless_source(0.0), channel(810, 0, 1, 1e6), channel(1550, 0, 1, 1e6), 0, 1e-9);
  CHECK(darks_only.accidental == doctest::Approx(1000.0));
  CHECK(darks_only.true_coinc == 0.0);
  CHECK_THROWS_AS(count_model(measured_source(), ideal(), ideal(), 1.0, 0.0), DomainError);
}

TEST_CASE("car conventions") {
  CountModel m{};
  m.true_coinc = 100;
  m.accidental = 100;
  CHECK(car(m) == 2.0);
  CHECK(car(m, CarConvention::true_over_accidental) == 1.0);
  m.accidental = 0;
  CHECK_THROWS_AS(car(m), UndefinedResult);
  // 1.1 % accidental share
  m.true_coinc = 98.9;
  m.accidental = 1.1;
  CHECK(car(m) == doctest::Approx(1 / 0.011));
  CHECK(accidental_share(m) == doctest::Approx(0.011));
  CountModel empty{};
  CHECK_THROWS_AS(accidental_share(empty), UndefinedResult);
}

TEST_CASE("dark-free car minus one is k over P") {
  SourceSpec s = measured_source();
  const auto a = channel(810, 0, 0.6, 0);
  const auto b = channel(1550, 0, 0.8, 0);
  const double tau = 900e-12;
  // CAR - 1 = C/A = R ta tb / (R ta R tb tau) = 1/(r P tau)
  const double k = 1.0 / (s.pair_rate_per_mw * tau);
  for (double p = 1; p <= 200; p *= 1.7) {
    const double c = car(count_model(s, a, b, p, tau));
    CHECK((c - 1) * p == doctest::Approx(k).epsilon(1e-12));
  }
}

TEST_CASE("property: dark-free scaling laws") {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 200; ++i) {
    SourceSpec s;
    s.pair_rate_per_mw = testgen::uniform(rng, 1e3, 1e6);
    s.heralding_signal = testgen::uniform(rng, 0.01, 1);
    s.heralding_idler = testgen::uniform(rng, 0.01, 1);
    const auto a = channel(810, testgen::uniform(rng, 0, 30), testgen::uniform(rng, 0.1, 1), 0);
    const auto b = channel(1550, testgen::uniform(rng, 0, 30), testgen::uniform(rng, 0.1, 1), 0);
    const double tau = testgen::uniform(rng, 1e-10, 5e-9);
    const double p = testgen::uniform(rng, 0.1, 1000);
    const double f = testgen::uniform(rng, 1.1, 10);
    const auto m1 = count_model(s, a, b, p, tau);
    const auto m2 = count_model(s, a, b, f * p, tau);
    CHECK(m2.true_coinc == doctest::Approx(f * m1.true_coinc).epsilon(1e-12));
    CHECK(m2.accidental == doctest::Approx(f * f * m1.accidental).epsilon(1e-12));
  }
}

TEST_CASE("property: car is symmetric in the arms and fields are non-negative") {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 200; ++i) {
    SourceSpec s;
    s.pair_rate_per_mw = testgen::uniform(rng, 0, 1e6);
    s.heralding_signal = testgen::uniform(rng, 0, 1);
    s.heralding_idler = s.heralding_signal;
    const auto a = channel(810, testgen::uniform(rng, 0, 30), testgen::uniform(rng, 0, 1),
                           testgen::uniform(rng, 0, 1e4));
    const auto b = channel(1550, testgen::uniform(rng, 0, 30), testgen::uniform(rng, 0, 1),
                           testgen::uniform(rng, 0, 1e4));
    const double tau = testgen::uniform(rng, 1e-10, 5e-9);
    const double p = testgen::uniform(rng, 0, 1000);
    const auto ab = count_model(s, a, b, p, tau);
    const auto ba = count_model(s, b, a, p, tau);
    for (double v : {ab.pair_rate, ab.singles_a, ab.singles_b, ab.true_coinc, ab.accidental,
                     ab.mu_per_window})
      CHECK(v >= 0.0);
    CHECK(ab.mu_per_window == ab.pair_rate * tau);
    if (ab.accidental > 0) CHECK(car(ab) == doctest::Approx(car(ba)).epsilon(1e-12));
  }
}

// With darks, C/A ~ R / ((R ta + da)(R tb + db)) has derivative sign
// da db - R^2 ta tb: CAR rises while darks dominate and falls beyond
// R* = sqrt(da db / (ta tb)).
TEST_CASE("property: car versus pump with darks peaks where pairs overtake darks") {
  std::mt19937_64 rng(43);
  for (int i = 0; i < 50; ++i) {
    SourceSpec s;
    s.pair_rate_per_mw = testgen::uniform(rng, 1e3, 1e6);
    const auto a = channel(810, testgen::uniform(rng, 0, 20), 0.6, testgen::uniform(rng, 1, 1e4));
    const auto b = channel(1550, testgen::uniform(rng, 0, 20), 0.8, testgen::uniform(rng, 1, 1e4));
    const double ta = arm_transmission(a, s.heralding_signal);
    const double tb = arm_transmission(b, s.heralding_idler);
    const double p_star = std::sqrt(a.dark_rate * b.dark_rate / (ta * tb)) / s.pair_rate_per_mw;
    double prev = 0;
    for (double p = p_star / 1000; p < p_star / 1.01; p *= 1.3) {
      const double c = car(count_model(s, a, b, p, 900e-12));
      CHECK(c > prev);
      prev = c;
    }
    prev = std::numeric_limits<double>::infinity();
    for (double p = p_star * 1.01; p < p_star * 1000; p *= 1.3) {
      const double c = car(count_model(s, a, b, p, 900e-12));
      CHECK(c < prev);
      prev = c;
    }
  }
}

TEST_CASE("spec validation") {
  SourceSpec s;
  s.heralding_signal = 1.5;
  CHECK_THROWS_AS(s.validate(), DomainError);
  ChannelSpec c{Wavelength::from_nm(810)};
  c.dark_rate = -1;
  CHECK_THROWS_AS(c.validate(), DomainError);
}
