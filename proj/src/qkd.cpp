#include "pairlink/qkd.hpp"

#include <algorithm>
#include <cmath>

#include "pairlink/errors.hpp"

namespace pairlink::qkd {

void LinkSpec::validate() const {
  source.validate();
  ch_signal.validate();
  ch_idler.validate();
  require(window > 0.0, "coincidence window must be positive");
  require(ec_efficiency >= 1.0, "error-correction inefficiency must be >= 1");
  require(sifting_factor > 0.0 && sifting_factor <= 1.0, "sifting factor must lie in (0,1]");
}

LinkSpec hybrid_link() {
  return {pairstats::measured_source(), pairstats::si_apd_810(15.0), pairstats::snspd_1550(15.0),
          pairstats::kDefaultWindow, 1.1, 0.5};
}

double binary_entropy(double x) {
  require(x >= 0.0 && x <= 1.0, "binary entropy argument must lie in [0,1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

QberResult link_qber(const LinkSpec& link, double pump_mw) {
  link.validate();
  const CountModel m =
      pairstats::count_model(link.source, link.ch_signal, link.ch_idler, pump_mw, link.window);
  const double total = m.true_coinc + m.accidental;
  if (!(total > 0.0)) throw UndefinedResult("QBER undefined: no coincidences");
  const double noise = 0.5 * m.accidental;
  return {(link.source.intrinsic_pol_error * m.true_coinc + noise) / total,
          (link.source.intrinsic_pol_error_x * m.true_coinc + noise) / total, m};
}

KeyRatePoint secret_key_rate(const LinkSpec& link, double pump_mw) {
  const QberResult q = link_qber(link, pump_mw);
  const double sifted = link.sifting_factor * (q.counts.true_coinc + q.counts.accidental);
  const double fraction =
      1.0 - link.ec_efficiency * binary_entropy(q.qber_z) - binary_entropy(q.qber_x);
  return {pump_mw, sifted, q.qber_z, q.qber_x, std::max(0.0, sifted * fraction)};
}

SweepResult pump_sweep(const LinkSpec& link, double p_min, double p_max, int n) {
  require(p_min >= 0.0 && p_min < p_max, "sweep needs 0 <= p_min < p_max");
  require(n >= 16, "sweep needs at least 16 points");

  SweepResult out;
  out.points.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double p = p_min + (p_max - p_min) * i / (n - 1);
    out.points.push_back(secret_key_rate(link, p));
  }

  const auto best = std::max_element(out.points.begin(), out.points.end(),
                                     [](const auto& a, const auto& b) { return a.skr < b.skr; });
  if (best->skr > 0.0) {
    const auto i = static_cast<std::size_t>(best - out.points.begin());
    double lo = out.points[i == 0 ? 0 : i - 1].pump_mw;
    double hi = out.points[std::min(i + 1, out.points.size() - 1)].pump_mw;
    const auto skr = [&](double p) { return secret_key_rate(link, p).skr; };
    // Golden-section search inside the bracketing grid cells.
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo);
    double x2 = lo + g * (hi - lo);
    double f1 = skr(x1);
    double f2 = skr(x2);
    for (int it = 0; it < 200 && hi - lo > 1e-9 * std::max(1.0, hi); ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + g * (hi - lo);
        f2 = skr(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - g * (hi - lo);
        f1 = skr(x1);
      }
    }
    const double refined = 0.5 * (lo + hi);
    out.p_opt = skr(refined) >= best->skr ? refined : best->pump_mw;
  }

  for (std::size_t i = 0; i < out.points.size(); ++i) {
    if (out.points[i].qber_z < kQberTarget) continue;
    if (i == 0) {
      out.p_at_qberz_5pct = out.points[0].pump_mw;
      break;
    }
    double lo = out.points[i - 1].pump_mw;
    double hi = out.points[i].pump_mw;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (link_qber(link, mid).qber_z < kQberTarget ? lo : hi) = mid;
    }
    out.p_at_qberz_5pct = 0.5 * (lo + hi);
    break;
  }
  return out;
}

}  // namespace pairlink::qkd
