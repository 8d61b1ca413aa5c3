#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "pairlink/pairstats.hpp"

namespace pairlink::timetags {

inline constexpr const char* kRngName = "mt19937_64";

struct TagStream {
  std::vector<double> timestamps;  // s, sorted, in [0, duration)
  std::string channel_id;
  std::uint64_t seed = 0;
  double duration = 0.0;
  std::string rng = kRngName;
};

// Pair emissions form a Poisson process at pair_rate(pump); each photon is
// detected independently with its arm transmission, jittered by the
// channel's Gaussian sigma, and merged with Poisson dark counts.
std::pair<TagStream, TagStream> simulate_streams(const pairstats::SourceSpec& source,
                                                 const pairstats::ChannelSpec& ch_a,
                                                 const pairstats::ChannelSpec& ch_b,
                                                 double pump_mw, double duration,
                                                 std::uint64_t seed);

// Greedy one-to-one matching in time order: tag a pairs with the earliest
// unused b satisfying |t_b - t_a - offset| <= window/2.
std::size_t count_coincidences(const TagStream& a, const TagStream& b, double window,
                               double offset);

// Coincidences at zero offset over coincidences in a delayed window.
// Throws UndefinedResult when the delayed window is empty.
double car_estimate(const TagStream& a, const TagStream& b, double window,
                    double accidental_offset);

enum class ExportFormat { csv, binary };

// One timestamp per record in integer picoseconds. Binary records are
// little-endian uint64.
void write_stream(std::ostream& out, const TagStream& stream, ExportFormat format);
std::vector<std::uint64_t> read_stream_ps(std::istream& in, ExportFormat format);

}  // namespace pairlink::timetags
