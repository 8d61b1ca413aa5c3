#include "pairlink/timetags.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <string>

#include "pairlink/errors.hpp"

namespace pairlink::timetags {

namespace {

void add_dark_counts(std::vector<double>& tags, double rate, double duration,
                     std::mt19937_64& rng) {
  if (rate <= 0.0) return;
  std::poisson_distribution<long long> count(rate * duration);
  std::uniform_real_distribution<double> when(0.0, duration);
  const long long n = count(rng);
  for (long long i = 0; i < n; ++i) tags.push_back(when(rng));
}

void apply_jitter(std::vector<double>& tags, double sigma, double duration,
                  std::mt19937_64& rng) {
  if (sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& t : tags) t += noise(rng);
    std::erase_if(tags, [duration](double t) { return t < 0.0 || t >= duration; });
  }
  std::sort(tags.begin(), tags.end());
}

}  // namespace

std::pair<TagStream, TagStream> simulate_streams(const pairstats::SourceSpec& source,
                                                 const pairstats::ChannelSpec& ch_a,
                                                 const pairstats::ChannelSpec& ch_b,
                                                 double pump_mw, double duration,
                                                 std::uint64_t seed) {
  require(duration > 0.0, "duration must be positive");
  source.validate();
  const double rate = pairstats::pair_rate(source, pump_mw);
  const double ta = pairstats::arm_transmission(ch_a, source.heralding_signal);
  const double tb = pairstats::arm_transmission(ch_b, source.heralding_idler);

  std::mt19937_64 rng(seed);
  TagStream a{{}, "signal", seed, duration, kRngName};
  TagStream b{{}, "idler", seed, duration, kRngName};
  a.timestamps.reserve(static_cast<std::size_t>(rate * ta * duration * 1.1) + 16);
  b.timestamps.reserve(static_cast<std::size_t>(rate * tb * duration * 1.1) + 16);

  if (rate > 0.0 && (ta > 0.0 || tb > 0.0)) {
    std::exponential_distribution<double> gap(rate);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double t = gap(rng); t < duration; t += gap(rng)) {
      if (u(rng) < ta) a.timestamps.push_back(t);
      if (u(rng) < tb) b.timestamps.push_back(t);
    }
  }
  add_dark_counts(a.timestamps, ch_a.dark_rate, duration, rng);
  add_dark_counts(b.timestamps, ch_b.dark_rate, duration, rng);
  apply_jitter(a.timestamps, ch_a.jitter_sigma, duration, rng);
  apply_jitter(b.timestamps, ch_b.jitter_sigma, duration, rng);
  return {std::move(a), std::move(b)};
}

std::size_t count_coincidences(const TagStream& a, const TagStream& b, double window,
                               double offset) {
  require(window > 0.0, "coincidence window must be positive");
  const double half = 0.5 * window;
  const auto& tb = b.timestamps;
  std::size_t j = 0;
  std::size_t matched = 0;
  for (double ta : a.timestamps) {
    const double centre = ta + offset;
    while (j < tb.size() && tb[j] - centre < -half) ++j;
    if (j == tb.size()) break;
    if (tb[j] - centre <= half) {
      ++matched;
      ++j;
    }
  }
  return matched;
}

double car_estimate(const TagStream& a, const TagStream& b, double window,
                    double accidental_offset) {
  require(std::abs(accidental_offset) > window, "accidental offset must exceed the window");
  const auto accidentals = count_coincidences(a, b, window, accidental_offset);
  if (accidentals == 0)
    throw UndefinedResult("no coincidences in the delayed window; use a longer acquisition");
  return static_cast<double>(count_coincidences(a, b, window, 0.0)) /
         static_cast<double>(accidentals);
}

void write_stream(std::ostream& out, const TagStream& stream, ExportFormat format) {
  for (double t : stream.timestamps) {
    const auto ps = static_cast<std::uint64_t>(std::llround(t * 1e12));
    if (format == ExportFormat::csv) {
      out << ps << '\n';
    } else {
      std::array<char, 8> bytes{};
      for (int k = 0; k < 8; ++k) bytes[k] = static_cast<char>((ps >> (8 * k)) & 0xffu);
      out.write(bytes.data(), bytes.size());
    }
  }
}

std::vector<std::uint64_t> read_stream_ps(std::istream& in, ExportFormat format) {
  std::vector<std::uint64_t> out;
  if (format == ExportFormat::csv) {
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      out.push_back(std::stoull(line));
    }
    return out;
  }
  std::array<char, 8> bytes{};
  while (in.read(bytes.data(), bytes.size())) {
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[k])) << (8 * k);
    out.push_back(v);
  }
  return out;
}

}  // namespace pairlink::timetags
