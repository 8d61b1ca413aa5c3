#include <doctest.h>

#include <cmath>
#include <random>

#include "generators.hpp"
#include "pairlink/errors.hpp"
#include "pairlink/qkd.hpp"

using namespace pairlink;
using namespace pairlink::qkd;

namespace {

double h_by_hand(double x) { return -x * std::log2(x) - (1 - x) * std::log2(1 - x); }

LinkSpec dark_free_link() {
  LinkSpec l = hybrid_link();
  l.ch_signal.dark_rate = 0;
  l.ch_idler.dark_rate = 0;
  l.source.intrinsic_pol_error = 0;
  l.source.intrinsic_pol_error_x = 0;
  return l;
}

}  // namespace

TEST_CASE("binary entropy") {
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.5) == 1.0);
  CHECK(binary_entropy(0.05) == doctest::Approx(0.2864).epsilon(1e-4));
  CHECK(binary_entropy(0.05) == doctest::Approx(h_by_hand(0.05)).epsilon(1e-15));
  CHECK(std::abs(1 - 2 * binary_entropy(0.11)) < 1e-3);
  CHECK_THROWS_AS(binary_entropy(-0.01), DomainError);
  CHECK_THROWS_AS(binary_entropy(1.01), DomainError);
  std::mt19937_64 rng(71);
  for (int i = 0; i < 500; ++i) {
    const double x = testgen::uniform(rng, 0, 1);
    CHECK(binary_entropy(x) == doctest::Approx(binary_entropy(1 - x)).epsilon(1e-12));
  }
}

TEST_CASE("qber from its ingredients") {
  const LinkSpec l = hybrid_link();
  const auto q = link_qber(l, 125.0);
  const auto& m = q.counts;
  const double ez = (0.0025 * m.true_coinc + m.accidental / 2) / (m.true_coinc + m.accidental);
  const double ex = (0.0035 * m.true_coinc + m.accidental / 2) / (m.true_coinc + m.accidental);
  CHECK(q.qber_z == doctest::Approx(ez).epsilon(1e-12));
  CHECK(q.qber_x == doctest::Approx(ex).epsilon(1e-12));

  // Back-to-back at 125 mW with a 1.1 % accidental share.
  const double share = 0.011;
  CHECK(0.0025 * (1 - share) + share / 2 == doctest::Approx(0.0080).epsilon(0.01));
}

TEST_CASE("qber limits") {
  LinkSpec l = dark_free_link();
  CHECK(link_qber(l, 1e-9).qber_z < 1e-9);
  // Darks only, no pairs: pure noise.
  LinkSpec noise = hybrid_link();
  noise.source.pair_rate_per_mw = 0;
  CHECK(link_qber(noise, 100.0).qber_z == doctest::Approx(0.5));
  LinkSpec nothing = dark_free_link();
  CHECK_THROWS_AS(link_qber(nothing, 0.0), UndefinedResult);
}

TEST_CASE("key rate formula") {
  LinkSpec l = hybrid_link();
  const auto p = secret_key_rate(l, 300.0);
  const auto q = link_qber(l, 300.0);
  const double sifted = 0.5 * (q.counts.true_coinc + q.counts.accidental);
  CHECK(p.sifted_rate == doctest::Approx(sifted));
  CHECK(p.skr == doctest::Approx(sifted * (1 - 1.1 * h_by_hand(q.qber_z) - h_by_hand(q.qber_x))));

  LinkSpec ideal = dark_free_link();
  ideal.ec_efficiency = 1.0;
  const auto tiny = secret_key_rate(ideal, 1e-6);
  CHECK(tiny.skr == doctest::Approx(tiny.sifted_rate).epsilon(1e-6));
}

TEST_CASE("hybrid link at full pump") {
  const auto p = secret_key_rate(hybrid_link(), 125.0);
  CHECK(p.skr > 100.0);
}

TEST_CASE("sweep optimum and crossing") {
  const auto s = pump_sweep(hybrid_link(), 1, 2000, 400);
  REQUIRE(s.points.size() == 400);
  REQUIRE(s.p_opt.has_value());
  CHECK(*s.p_opt >= 400);
  CHECK(*s.p_opt <= 1800);
  const auto best = secret_key_rate(hybrid_link(), *s.p_opt);
  CHECK(std::abs(best.qber_z - 0.05) <= 0.02);
  for (const auto& pt : s.points) CHECK(pt.skr <= best.skr + 1e-9);
  REQUIRE(s.p_at_qberz_5pct.has_value());
  CHECK(link_qber(hybrid_link(), *s.p_at_qberz_5pct).qber_z == doctest::Approx(0.05).epsilon(1e-6));

  CHECK_THROWS_AS(pump_sweep(hybrid_link(), 10, 5, 100), DomainError);
  CHECK_THROWS_AS(pump_sweep(hybrid_link(), 1, 100, 8), DomainError);
}

TEST_CASE("sweep with no key") {
  LinkSpec l = hybrid_link();
  l.source.intrinsic_pol_error = 0.2;
  l.source.intrinsic_pol_error_x = 0.2;
  const auto s = pump_sweep(l, 1, 100, 32);
  CHECK_FALSE(s.p_opt.has_value());
  for (const auto& pt : s.points) CHECK(pt.skr == 0.0);
}

TEST_CASE("dark-free key rate is unimodal") {
  const auto s = pump_sweep(dark_free_link(), 1, 5000, 500);
  int sign_changes = 0;
  double prev_diff = 0;
  for (std::size_t i = 1; i < s.points.size(); ++i) {
    const double d = s.points[i].skr - s.points[i - 1].skr;
    if (d == 0) continue;
    if (prev_diff != 0 && (d > 0) != (prev_diff > 0)) ++sign_changes;
    prev_diff = d;
  }
  CHECK(sign_changes == 1);
}

TEST_CASE("property: qber_z non-decreasing in pump without darks") {
  std::mt19937_64 rng(72);
  for (int i = 0; i < 30; ++i) {
    LinkSpec l = dark_free_link();
    l.source.intrinsic_pol_error = testgen::uniform(rng, 0, 0.05);
    l.ch_signal.loss_db = testgen::uniform(rng, 0, 30);
    l.ch_idler.loss_db = testgen::uniform(rng, 0, 30);
    double prev = 0;
    for (double p = 0.5; p < 3000; p *= 1.4) {
      const double q = link_qber(l, p).qber_z;
      CHECK(q >= prev - 1e-15);
      prev = q;
    }
  }
}

TEST_CASE("property: skr non-negative and zero past the threshold") {
  std::mt19937_64 rng(73);
  for (int i = 0; i < 300; ++i) {
    LinkSpec l = hybrid_link();
    l.source.intrinsic_pol_error = testgen::uniform(rng, 0, 0.2);
    l.source.intrinsic_pol_error_x = testgen::uniform(rng, 0, 0.2);
    l.ec_efficiency = testgen::uniform(rng, 1, 1.5);
    const double p = testgen::uniform(rng, 1, 3000);
    const auto pt = secret_key_rate(l, p);
    CHECK(pt.skr >= 0.0);
    if (1 - l.ec_efficiency * h_by_hand(pt.qber_z) - h_by_hand(pt.qber_x) <= 0)
      CHECK(pt.skr == 0.0);
    CHECK((pt.qber_z >= 0 && pt.qber_z <= 0.5));
  }
}

TEST_CASE("property: extra 3 dB per arm quarters true coincidences") {
  std::mt19937_64 rng(74);
  for (int i = 0; i < 50; ++i) {
    LinkSpec l = hybrid_link();
    l.ch_signal.loss_db = testgen::uniform(rng, 0, 20);
    l.ch_idler.loss_db = testgen::uniform(rng, 0, 20);
    LinkSpec m = l;
    m.ch_signal.loss_db += 10 * std::log10(2.0);
    m.ch_idler.loss_db += 10 * std::log10(2.0);
    const double p = testgen::uniform(rng, 1, 1000);
    CHECK(link_qber(m, p).counts.true_coinc ==
          doctest::Approx(link_qber(l, p).counts.true_coinc / 4).epsilon(1e-12));
    CHECK(m.source.intrinsic_pol_error == l.source.intrinsic_pol_error);
  }
}

TEST_CASE("property: halving the window") {
  std::mt19937_64 rng(75);
  for (int i = 0; i < 50; ++i) {
    LinkSpec l = hybrid_link();
    l.window = testgen::uniform(rng, 2e-10, 5e-9);
    LinkSpec h = l;
    h.window = l.window / 2;
    const double p = testgen::uniform(rng, 1, 2000);
    const auto a = link_qber(l, p);
    const auto b = link_qber(h, p);
    CHECK(b.counts.accidental == doctest::Approx(a.counts.accidental / 2).epsilon(1e-12));
    CHECK(pairstats::car(b.counts) > pairstats::car(a.counts));
    CHECK(b.qber_z < a.qber_z);
    CHECK(b.qber_x < a.qber_x);
  }
}

TEST_CASE("link validation") {
  LinkSpec l = hybrid_link();
  l.ec_efficiency = 0.9;
  CHECK_THROWS_AS(secret_key_rate(l, 10), DomainError);
  l = hybrid_link();
  l.window = 0;
  CHECK_THROWS_AS(secret_key_rate(l, 10), DomainError);
}
