#include "pairlink/config.hpp"

#include <cmath>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "pairlink/errors.hpp"

namespace pairlink::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a number, got '" + v + "'");
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const int i = std::stoi(v, &used);
    if (used == v.size()) return i;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected an integer, got '" + v + "'");
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] != '-') {
      const auto i = std::stoull(v, &used);
      if (used == v.size()) return i;
    }
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  if (out.empty()) throw ConfigError(key + ": expected a comma-separated list");
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto d = [&t](const std::string& key, auto accessor) {
      t[key] = [accessor](RunConfig& c, const std::string& k, const std::string& v) {
        accessor(c) = parse_double(k, v);
      };
    };
    auto i = [&t](const std::string& key, auto accessor) {
      t[key] = [accessor](RunConfig& c, const std::string& k, const std::string& v) {
        accessor(c) = parse_int(k, v);
      };
    };
    d("source.pair_rate_per_mw", [](RunConfig& c) -> double& { return c.source.pair_rate_per_mw; });
    d("source.spectral_brightness", [](RunConfig& c) -> double& { return c.source.spectral_brightness; });
    d("source.bandwidth_ghz", [](RunConfig& c) -> double& { return c.source.bandwidth_ghz; });
    d("source.heralding_signal", [](RunConfig& c) -> double& { return c.source.heralding_signal; });
    d("source.heralding_idler", [](RunConfig& c) -> double& { return c.source.heralding_idler; });
    d("source.visibility_hv", [](RunConfig& c) -> double& { return c.source.visibility_hv; });
    d("source.visibility_da", [](RunConfig& c) -> double& { return c.source.visibility_da; });

    for (const std::string section : {"channel_signal", "channel_idler"}) {
      auto ch = [section](RunConfig& c) -> RunConfig::Channel& {
        return section == "channel_signal" ? c.channel_signal : c.channel_idler;
      };
      d(section + ".wavelength_nm", [ch](RunConfig& c) -> double& { return ch(c).wavelength_nm; });
      d(section + ".loss_db", [ch](RunConfig& c) -> double& { return ch(c).loss_db; });
      d(section + ".detector_efficiency",
        [ch](RunConfig& c) -> double& { return ch(c).detector_efficiency; });
      d(section + ".dark_rate_hz", [ch](RunConfig& c) -> double& { return ch(c).dark_rate_hz; });
      d(section + ".jitter_ps", [ch](RunConfig& c) -> double& { return ch(c).jitter_ps; });
    }

    d("qkd.window_ps", [](RunConfig& c) -> double& { return c.qkd.window_ps; });
    d("qkd.ec_efficiency", [](RunConfig& c) -> double& { return c.qkd.ec_efficiency; });
    d("qkd.sifting_factor", [](RunConfig& c) -> double& { return c.qkd.sifting_factor; });
    d("qkd.p_min_mw", [](RunConfig& c) -> double& { return c.qkd.p_min_mw; });
    d("qkd.p_max_mw", [](RunConfig& c) -> double& { return c.qkd.p_max_mw; });
    i("qkd.points", [](RunConfig& c) -> int& { return c.qkd.points; });
    d("qkd.report_pump_mw", [](RunConfig& c) -> double& { return c.qkd.report_pump_mw; });

    d("lab.pair_rate_per_mw", [](RunConfig& c) -> double& { return c.lab.pair_rate_per_mw; });
    d("lab.loss_signal_db", [](RunConfig& c) -> double& { return c.lab.loss_signal_db; });
    d("lab.loss_idler_db", [](RunConfig& c) -> double& { return c.lab.loss_idler_db; });
    d("lab.window_ps", [](RunConfig& c) -> double& { return c.lab.window_ps; });
    d("lab.pump_mw", [](RunConfig& c) -> double& { return c.lab.pump_mw; });
    d("lab.p_min_mw", [](RunConfig& c) -> double& { return c.lab.p_min_mw; });
    d("lab.p_max_mw", [](RunConfig& c) -> double& { return c.lab.p_max_mw; });
    i("lab.points", [](RunConfig& c) -> int& { return c.lab.points; });
    d("lab.duration_s", [](RunConfig& c) -> double& { return c.lab.duration_s; });
    i("lab.seeds", [](RunConfig& c) -> int& { return c.lab.seeds; });
    d("lab.accidental_offset_ns", [](RunConfig& c) -> double& { return c.lab.accidental_offset_ns; });

    t["beam.wavelengths_nm"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.beam.wavelengths_nm = parse_list(k, v);
      c.beam.wavelengths_set = true;
    };
    t["beam.waists_um"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.beam.waists_um = parse_list(k, v);
      c.beam.waists_set = true;
    };

    d("franson.fsr_ghz", [](RunConfig& c) -> double& { return c.franson.fsr_ghz; });
    d("franson.photon_bandwidth_ghz",
      [](RunConfig& c) -> double& { return c.franson.photon_bandwidth_ghz; });
    d("franson.pump_linewidth_khz", [](RunConfig& c) -> double& { return c.franson.pump_linewidth_khz; });
    d("franson.visibility", [](RunConfig& c) -> double& { return c.franson.visibility; });
    d("franson.phase_per_volt", [](RunConfig& c) -> double& { return c.franson.phase_per_volt; });
    d("franson.phase_offset", [](RunConfig& c) -> double& { return c.franson.phase_offset; });
    d("franson.v_min", [](RunConfig& c) -> double& { return c.franson.v_min; });
    d("franson.v_max", [](RunConfig& c) -> double& { return c.franson.v_max; });
    i("franson.points", [](RunConfig& c) -> int& { return c.franson.points; });

    d("polarization.visibility", [](RunConfig& c) -> double& { return c.polarization.visibility; });
    t["polarization.fixed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      if (v.size() != 1) throw ConfigError(k + ": expected one of H,V,D,A,R,L");
      try {
        c.polarization.fixed = polarization::label_from_char(v[0]);
      } catch (const DomainError&) {
        throw ConfigError(k + ": expected one of H,V,D,A,R,L");
      }
    };
    i("polarization.points", [](RunConfig& c) -> int& { return c.polarization.points; });
    t["polarization.axis"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      if (v != "analyzer" && v != "hwp") throw ConfigError(k + ": expected 'analyzer' or 'hwp'");
      c.polarization.axis = v;
    };

    d("tomography.werner_p", [](RunConfig& c) -> double& { return c.tomography.werner_p; });
    d("tomography.mean_total", [](RunConfig& c) -> double& { return c.tomography.mean_total; });
    d("tomography.integration_s", [](RunConfig& c) -> double& { return c.tomography.integration_s; });

    t["run.seed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.run.seed = parse_u64(k, v);
    };
    t["run.output_dir"] = [](RunConfig& c, const std::string&, const std::string& v) {
      c.run.output_dir = v;
    };
    return t;
  }();
  return table;
}

}  // namespace

pairstats::SourceSpec RunConfig::source_spec() const {
  pairstats::SourceSpec s;
  s.pair_rate_per_mw = source.pair_rate_per_mw;
  s.spectral_brightness = source.spectral_brightness;
  s.bandwidth = source.bandwidth_ghz * 1e9;
  s.heralding_signal = source.heralding_signal;
  s.heralding_idler = source.heralding_idler;
  s.intrinsic_pol_error = pairstats::error_from_visibility(source.visibility_hv);
  s.intrinsic_pol_error_x = pairstats::error_from_visibility(source.visibility_da);
  return s;
}

pairstats::SourceSpec RunConfig::lab_source_spec() const {
  pairstats::SourceSpec s = source_spec();
  s.pair_rate_per_mw = lab.pair_rate_per_mw;
  return s;
}

pairstats::ChannelSpec RunConfig::signal_channel(double loss_db) const {
  return {photonics::Wavelength::from_nm(channel_signal.wavelength_nm), loss_db,
          channel_signal.detector_efficiency, channel_signal.dark_rate_hz,
          channel_signal.jitter_ps * 1e-12};
}

pairstats::ChannelSpec RunConfig::idler_channel(double loss_db) const {
  return {photonics::Wavelength::from_nm(channel_idler.wavelength_nm), loss_db,
          channel_idler.detector_efficiency, channel_idler.dark_rate_hz,
          channel_idler.jitter_ps * 1e-12};
}

franson::FransonConfig RunConfig::franson_config() const {
  return {franson.fsr_ghz * 1e9,    franson.photon_bandwidth_ghz * 1e9,
          franson.pump_linewidth_khz * 1e3, franson.visibility,
          franson.phase_per_volt,   franson.phase_offset};
}

void set_config_value(RunConfig& cfg, const std::string& dotted_key, const std::string& value) {
  const auto it = setters().find(dotted_key);
  if (it == setters().end()) throw ConfigError("unknown config key '" + dotted_key + "'");
  it->second(cfg, dotted_key, trim(value));
}

void apply_config(RunConfig& cfg, std::istream& in) {
  std::string line;
  std::string section;
  std::set<std::string> seen;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "empty key");
    const std::string dotted = section.empty() ? key : section + "." + key;
    if (!seen.insert(dotted).second) throw ConfigError(where + "duplicate key '" + dotted + "'");
    try {
      set_config_value(cfg, dotted, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
}

void validate_config(const RunConfig& cfg) {
  auto check = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  if (cfg.beam.wavelengths_set && !cfg.beam.waists_set)
    throw ConfigError("beam.waists_um is required when beam.wavelengths_nm is set");
  check(cfg.beam.wavelengths_nm.size() == cfg.beam.waists_um.size(),
        "beam.wavelengths_nm and beam.waists_um must have the same length");
  for (double w : cfg.beam.wavelengths_nm) check(w > 0.0, "beam wavelengths must be positive");
  for (double w : cfg.beam.waists_um) check(w > 0.0, "beam waists must be positive");

  const auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  check(cfg.source.pair_rate_per_mw >= 0.0, "source.pair_rate_per_mw must be non-negative");
  check(cfg.lab.pair_rate_per_mw >= 0.0, "lab.pair_rate_per_mw must be non-negative");
  check(prob(cfg.source.heralding_signal) && prob(cfg.source.heralding_idler),
        "heralding efficiencies must lie in [0,1]");
  check(prob(cfg.source.visibility_hv) && prob(cfg.source.visibility_da),
        "source visibilities must lie in [0,1]");
  for (const auto* ch : {&cfg.channel_signal, &cfg.channel_idler}) {
    check(ch->wavelength_nm > 0.0, "channel wavelength must be positive");
    check(ch->loss_db >= 0.0, "channel loss must be non-negative");
    check(prob(ch->detector_efficiency), "detector efficiency must lie in [0,1]");
    check(ch->dark_rate_hz >= 0.0 && ch->jitter_ps >= 0.0, "dark rate and jitter must be >= 0");
  }
  check(cfg.qkd.window_ps > 0.0 && cfg.lab.window_ps > 0.0, "coincidence windows must be positive");
  check(cfg.qkd.ec_efficiency >= 1.0, "qkd.ec_efficiency must be >= 1");
  check(cfg.qkd.sifting_factor > 0.0 && cfg.qkd.sifting_factor <= 1.0,
        "qkd.sifting_factor must lie in (0,1]");
  check(cfg.qkd.p_min_mw >= 0.0 && cfg.qkd.p_min_mw < cfg.qkd.p_max_mw,
        "qkd sweep needs 0 <= p_min_mw < p_max_mw");
  check(cfg.qkd.points >= 16, "qkd.points must be >= 16");
  check(cfg.lab.loss_signal_db >= 0.0 && cfg.lab.loss_idler_db >= 0.0, "lab losses must be >= 0");
  check(cfg.lab.p_min_mw > 0.0 && cfg.lab.p_min_mw <= cfg.lab.p_max_mw,
        "lab sweep needs 0 < p_min_mw <= p_max_mw");
  check(cfg.lab.points >= 1, "lab.points must be >= 1");
  check(cfg.lab.duration_s > 0.0 && cfg.lab.seeds >= 1, "lab.duration_s and lab.seeds must be positive");
  check(cfg.lab.accidental_offset_ns * 1e3 > cfg.lab.window_ps, "lab.accidental_offset_ns must exceed the window");
  check(cfg.franson.fsr_ghz > 0.0 && cfg.franson.photon_bandwidth_ghz > 0.0 &&
            cfg.franson.pump_linewidth_khz > 0.0,
        "franson frequencies must be positive");
  check(prob(cfg.franson.visibility), "franson.visibility must lie in [0,1]");
  check(cfg.franson.points >= 8 && cfg.franson.v_max > cfg.franson.v_min,
        "franson scan needs >= 8 points and v_max > v_min");
  check(prob(cfg.polarization.visibility), "polarization.visibility must lie in [0,1]");
  check(cfg.polarization.points >= 8, "polarization.points must be >= 8");
  check(prob(cfg.tomography.werner_p), "tomography.werner_p must lie in [0,1]");
  check(cfg.tomography.mean_total > 0.0 && cfg.tomography.integration_s > 0.0,
        "tomography.mean_total and integration_s must be positive");
}

std::string default_config_text() {
  return R"(# pairlink default configuration. Every key is optional.

[source]
pair_rate_per_mw = 1.4e5      # pairs/s/mW, measured generation rate
spectral_brightness = 4.8e3   # pairs/s/mW/GHz, metadata only
bandwidth_ghz = 287           # 2.3 nm at 1550 nm
heralding_signal = 0.55       # 810 nm heralding efficiency
heralding_idler = 0.48        # 1550 nm heralding efficiency
visibility_hv = 0.995         # polarization visibility, H/V basis
visibility_da = 0.993         # polarization visibility, D/A basis

[channel_signal]              # 810 nm, Si-APD, free-space arm
wavelength_nm = 810
loss_db = 15
detector_efficiency = 0.60
dark_rate_hz = 200
jitter_ps = 0

[channel_idler]               # 1550 nm, SNSPD, fiber arm
wavelength_nm = 1550
loss_db = 15
detector_efficiency = 0.80
dark_rate_hz = 50
jitter_ps = 0

[qkd]
window_ps = 900
ec_efficiency = 1.1
sifting_factor = 0.5
p_min_mw = 1
p_max_mw = 2000
points = 400
report_pump_mw = 125          # full power of the pump laser

[lab]                         # back-to-back bench for car-sweep
pair_rate_per_mw = 1.0e5      # effective rate reproducing the 1.1 % accidental share
loss_signal_db = 0
loss_idler_db = 0
window_ps = 900
pump_mw = 125
p_min_mw = 10
p_max_mw = 125
points = 12
duration_s = 0.05             # Monte Carlo acquisition per seed
seeds = 5
accidental_offset_ns = 100

[beam]                        # focusing parameters in the crystal
wavelengths_nm = 532, 810, 1550
waists_um = 200, 145, 140

[franson]
fsr_ghz = 2.5
photon_bandwidth_ghz = 100
pump_linewidth_khz = 5
visibility = 0.991
phase_per_volt = 1.5707963267948966
phase_offset = 0
v_min = 0
v_max = 8
points = 161

[polarization]
visibility = 0.995            # Werner weight of the simulated state
fixed = H
points = 180
axis = analyzer               # analyzer | hwp

[tomography]
werner_p = 1                  # 1 = Phi+
mean_total = 1e6
integration_s = 1

[run]
# seed = 1                    # unset: $PAIRLINK_SEED, else 1
output_dir = .
)";
}

}  // namespace pairlink::cli
