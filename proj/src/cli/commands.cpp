#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <sstream>

#include "pairlink/cli.hpp"
#include "pairlink/config.hpp"
#include "pairlink/errors.hpp"
#include "pairlink/estimation.hpp"
#include "pairlink/franson.hpp"
#include "pairlink/pairstats.hpp"
#include "pairlink/photonics.hpp"
#include "pairlink/polarization.hpp"
#include "pairlink/qkd.hpp"
#include "pairlink/timetags.hpp"
#include "pairlink/tomography.hpp"

namespace pairlink::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string summary;
  bool json = false;
};

std::string num(double v) { return fmt::format("{}", v); }

RunConfig load_config(const CommonOptions& opts) {
  RunConfig cfg;
  if (const char* env = std::getenv("PAIRLINK_SEED"); env != nullptr && *env != '\0')
    set_config_value(cfg, "run.seed", env);
  if (!opts.config_path.empty()) {
    std::ifstream in(opts.config_path);
    if (!in) throw ConfigError("cannot open config file '" + opts.config_path + "'");
    apply_config(cfg, in);
  }
  for (const auto& kv : opts.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (opts.seed) cfg.run.seed = *opts.seed;
  validate_config(cfg);
  return cfg;
}

fs::path resolve(const RunConfig& cfg, const std::string& path) {
  fs::path p(path);
  if (p.is_relative() && cfg.run.output_dir != ".") p = fs::path(cfg.run.output_dir) / p;
  return p;
}

// Writes to a file when a path is given, otherwise to the fallback stream.
class Sink {
 public:
  Sink(const RunConfig& cfg, const std::string& path, std::ostream& fallback,
       std::ios::openmode mode = std::ios::out)
      : stream_(&fallback) {
    if (path.empty() || path == "-") return;
    const fs::path p = resolve(cfg, path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    file_ = std::make_unique<std::ofstream>(p, mode | std::ios::trunc);
    if (!*file_) throw ConfigError("cannot write '" + p.string() + "'");
    stream_ = file_.get();
  }
  std::ostream& operator*() { return *stream_; }
  bool is_file() const { return file_ != nullptr; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

// Summary JSON: --summary file, else stdout when the primary output went to
// a file, else stderr.
void emit_summary(const RunConfig& cfg, const CommonOptions& opts, bool primary_in_file,
                  const json& summary, std::ostream& out, std::ostream& err) {
  Sink sink(cfg, opts.summary, primary_in_file ? out : err);
  *sink << summary.dump(2) << '\n';
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(n));
  if (n == 1) {
    v.push_back(lo);
    return v;
  }
  for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1.0));
  return v;
}

json state_to_json(const polarization::TwoQubitState& rho) {
  json arr = json::array();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) arr.push_back({rho.matrix()(i, j).real(), rho.matrix()(i, j).imag()});
  return arr;
}

polarization::Matrix4c matrix_from_pairs(const std::vector<std::pair<double, double>>& entries) {
  if (entries.size() != 16) throw ConfigError("state file must hold 16 complex entries");
  polarization::Matrix4c m;
  for (int k = 0; k < 16; ++k) m(k / 4, k % 4) = {entries[k].first, entries[k].second};
  return m;
}

polarization::TwoQubitState read_state_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open state file '" + path + "'");
  std::vector<std::pair<double, double>> entries;
  if (fs::path(path).extension() == ".json") {
    json j;
    try {
      in >> j;
      const json& arr = j.is_object() ? j.at("state") : j;
      for (const auto& e : arr) entries.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
    } catch (const json::exception& e) {
      throw ConfigError("malformed state file: " + std::string(e.what()));
    }
  } else {
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      std::stringstream ss(line);
      double re = 0.0, im = 0.0;
      char comma = 0;
      if (!(ss >> re >> comma >> im) || comma != ',')
        throw ConfigError("malformed state CSV line '" + line + "'");
      entries.emplace_back(re, im);
    }
  }
  try {
    return polarization::TwoQubitState::from_matrix(matrix_from_pairs(entries));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("state file: ") + e.what());
  }
}

std::pair<std::vector<double>, std::vector<double>> read_xy_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open input '" + path + "'");
  std::vector<double> x, y;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError(fmt::format("{}:{}: expected x,y", path, line_no));
    try {
      const double xv = std::stod(line.substr(0, comma));
      const double yv = std::stod(line.substr(comma + 1));
      x.push_back(xv);
      y.push_back(yv);
    } catch (const std::exception&) {
      if (line_no == 1 && x.empty()) continue;  // header row
      throw ConfigError(fmt::format("{}:{}: malformed number", path, line_no));
    }
  }
  return {x, y};
}

json fit_to_json(const estimation::FitResult& fit) {
  json params = json::object();
  for (const auto& [k, v] : fit.params) params[k] = v;
  return {{"params", params},
          {"residual_rms", fit.residual_rms},
          {"converged", fit.converged},
          {"iterations", fit.iterations}};
}

// ---------------------------------------------------------------- beam

int cmd_beam(const CommonOptions& opts, std::ostream& out, std::ostream&) {
  const RunConfig cfg = load_config(opts);
  Sink sink(cfg, opts.out, out);
  json rows = json::array();
  std::ostringstream csv;
  csv << "wavelength_nm,waist_um,rayleigh_length_mm\n";
  for (std::size_t i = 0; i < cfg.beam.wavelengths_nm.size(); ++i) {
    const double lambda = cfg.beam.wavelengths_nm[i];
    const double waist = cfg.beam.waists_um[i];
    const double zr_mm =
        photonics::rayleigh_length(waist * 1e-6, photonics::Wavelength::from_nm(lambda)) * 1e3;
    csv << num(lambda) << ',' << num(waist) << ',' << num(zr_mm) << '\n';
    rows.push_back({{"wavelength_nm", lambda}, {"waist_um", waist}, {"rayleigh_length_mm", zr_mm}});
  }
  if (opts.json)
    *sink << rows.dump(2) << '\n';
  else
    *sink << csv.str();
  return kExitOk;
}

// ---------------------------------------------------------------- car-sweep

struct CarSweepOptions {
  std::optional<double> p_min, p_max;
  std::optional<int> points;
  std::string mode = "analytic";
  std::string convention = "total";
};

int cmd_car_sweep(const CommonOptions& opts, const CarSweepOptions& co, std::ostream& out,
                  std::ostream& err) {
  const RunConfig cfg = load_config(opts);
  const double p_min = co.p_min.value_or(cfg.lab.p_min_mw);
  const double p_max = co.p_max.value_or(cfg.lab.p_max_mw);
  const int n = co.points.value_or(cfg.lab.points);
  if (n < 1) throw ConfigError("-n must be >= 1");
  if (!(p_min > 0.0) || p_max < p_min || (n > 1 && p_max == p_min))
    throw ConfigError("car-sweep needs 0 < p_min < p_max");
  const auto convention = co.convention == "true" ? pairstats::CarConvention::true_over_accidental
                                                  : pairstats::CarConvention::total_over_accidental;

  const auto source = cfg.lab_source_spec();
  const auto ch_a = cfg.signal_channel(cfg.lab.loss_signal_db);
  const auto ch_b = cfg.idler_channel(cfg.lab.loss_idler_db);
  const double window = cfg.lab.window_ps * 1e-12;

  struct Row {
    double pump, true_coinc, accidental, car;
  };
  std::vector<Row> rows;
  for (double p : linspace(p_min, p_max, n)) {
    if (co.mode == "analytic") {
      const auto m = pairstats::count_model(source, ch_a, ch_b, p, window);
      rows.push_back({p, m.true_coinc, m.accidental, pairstats::car(m, convention)});
    } else {
      double c0 = 0.0, cd = 0.0;
      for (int s = 0; s < cfg.lab.seeds; ++s) {
        const auto [a, b] = timetags::simulate_streams(source, ch_a, ch_b, p, cfg.lab.duration_s,
                                                       cfg.run.seed + static_cast<std::uint64_t>(s));
        c0 += static_cast<double>(timetags::count_coincidences(a, b, window, 0.0));
        cd += static_cast<double>(
            timetags::count_coincidences(a, b, window, cfg.lab.accidental_offset_ns * 1e-9));
      }
      if (cd == 0.0)
        throw UndefinedResult(fmt::format(
            "no accidental coincidences at {} mW; increase lab.duration_s or lab.seeds", p));
      const double t = cfg.lab.duration_s * cfg.lab.seeds;
      const double car = convention == pairstats::CarConvention::true_over_accidental
                             ? (c0 - cd) / cd
                             : c0 / cd;
      rows.push_back({p, (c0 - cd) / t, cd / t, car});
    }
  }

  Sink sink(cfg, opts.out, out);
  *sink << "pump_mw,true_coinc_hz,accidental_hz,car\n";
  for (const auto& r : rows)
    *sink << num(r.pump) << ',' << num(r.true_coinc) << ',' << num(r.accidental) << ','
          << num(r.car) << '\n';

  json summary = {{"mode", co.mode}, {"convention", co.convention}, {"window_ps", cfg.lab.window_ps}};
  const auto at_pump = pairstats::count_model(source, ch_a, ch_b, cfg.lab.pump_mw, window);
  summary["operating_point"] = {
      {"pump_mw", cfg.lab.pump_mw},
      {"total_coinc_hz", at_pump.true_coinc + at_pump.accidental},
      {"accidental_share", pairstats::accidental_share(at_pump)},
      {"car", pairstats::car(at_pump, convention)}};
  if (rows.size() >= 3) {
    std::vector<double> ps, cars;
    for (const auto& r : rows) {
      ps.push_back(r.pump);
      cars.push_back(r.car);
    }
    const auto fit = estimation::fit_inverse_power(ps, cars);
    summary["fit"] = {{"k", fit.at("k")},
                      {"baseline", fit.at("baseline")},
                      {"residual_rms", fit.residual_rms}};
  } else {
    err << "warning: fewer than 3 sweep points, CAR fit skipped\n";
    summary["fit"] = nullptr;
  }
  emit_summary(cfg, opts, sink.is_file(), summary, out, err);
  return kExitOk;
}

// ---------------------------------------------------------------- tomo

struct TomoOptions {
  std::string state_file;
  std::string state;
  std::optional<double> mean_total;
  std::string noise = "poisson";
  std::string input;
  double tol = 1e-10;
  int max_iter = 2000;
};

// "phi-plus", "phi-minus", "mixed" or "werner:P"; empty means werner(default_p).
polarization::TwoQubitState parse_state(const std::string& name, double default_p) {
  if (name.empty()) return polarization::werner(default_p);
  if (name == "phi-plus") return polarization::bell_phi_plus();
  if (name == "phi-minus") return polarization::bell_phi_minus();
  if (name == "mixed") return polarization::TwoQubitState::maximally_mixed();
  if (name.rfind("werner:", 0) == 0) {
    try {
      std::size_t used = 0;
      const std::string arg = name.substr(7);
      const double p = std::stod(arg, &used);
      if (used == arg.size() && p >= 0.0 && p <= 1.0) return polarization::werner(p);
    } catch (const std::exception&) {
    }
  }
  throw ConfigError("unknown --state '" + name + "' (phi-plus, phi-minus, mixed, werner:P)");
}

int cmd_tomo_simulate(const CommonOptions& opts, const TomoOptions& to, std::ostream& out,
                      std::ostream&) {
  const RunConfig cfg = load_config(opts);
  if (!to.state.empty() && !to.state_file.empty())
    throw ConfigError("--state and --state-file are mutually exclusive");
  const auto rho = to.state_file.empty() ? parse_state(to.state, cfg.tomography.werner_p)
                                         : read_state_file(to.state_file);
  const double mean_total = to.mean_total.value_or(cfg.tomography.mean_total);
  if (!(mean_total > 0.0)) throw ConfigError("--mean-total must be positive");
  const auto records = tomography::simulate_counts(
      rho, tomography::standard_16_settings(), mean_total, cfg.run.seed,
      to.noise == "exact" ? tomography::CountNoise::exact_means : tomography::CountNoise::poisson,
      cfg.tomography.integration_s);
  Sink sink(cfg, opts.out, out);
  tomography::write_counts_csv(*sink, records);
  return kExitOk;
}

int cmd_tomo_fit(const CommonOptions& opts, const TomoOptions& to, std::ostream& out,
                 std::ostream& err) {
  const RunConfig cfg = load_config(opts);
  if (to.input.empty()) throw ConfigError("tomo fit needs --input");
  std::ifstream in(to.input);
  if (!in) throw ConfigError("cannot open counts file '" + to.input + "'");
  std::vector<tomography::CountRecord> records;
  try {
    records = tomography::read_counts_csv(in);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  const auto result = tomography::mle_reconstruct(records, to.tol, to.max_iter);
  const auto phi = polarization::bell_phi_plus();
  const json j = {{"state", state_to_json(result.state)},
                  {"log_likelihood", result.log_likelihood},
                  {"iterations", result.iterations},
                  {"converged", result.converged},
                  {"purity", polarization::purity(result.state)},
                  {"fidelity_phi_plus", polarization::fidelity_to_pure(result.state, phi)}};
  Sink sink(cfg, opts.out, out);
  *sink << j.dump(2) << '\n';
  if (!result.converged) {
    err << "error: maximum-likelihood reconstruction did not converge\n";
    return kExitNumeric;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- skr-sweep

struct SweepOptions {
  std::optional<double> p_min, p_max;
  std::optional<int> points;
};

int cmd_skr_sweep(const CommonOptions& opts, const SweepOptions& so, std::ostream& out,
                  std::ostream& err) {
  const RunConfig cfg = load_config(opts);
  qkd::LinkSpec link{cfg.source_spec(),
                     cfg.signal_channel(cfg.channel_signal.loss_db),
                     cfg.idler_channel(cfg.channel_idler.loss_db),
                     cfg.qkd.window_ps * 1e-12,
                     cfg.qkd.ec_efficiency,
                     cfg.qkd.sifting_factor};
  const auto sweep = qkd::pump_sweep(link, so.p_min.value_or(cfg.qkd.p_min_mw),
                                     so.p_max.value_or(cfg.qkd.p_max_mw),
                                     so.points.value_or(cfg.qkd.points));
  Sink sink(cfg, opts.out, out);
  *sink << "pump_mw,sifted_hz,qber_z,qber_x,skr_bps\n";
  for (const auto& p : sweep.points)
    *sink << num(p.pump_mw) << ',' << num(p.sifted_rate) << ',' << num(p.qber_z) << ','
          << num(p.qber_x) << ',' << num(p.skr) << '\n';

  const auto report = qkd::secret_key_rate(link, cfg.qkd.report_pump_mw);
  json summary = {{"p_opt_mw", nullptr},
                  {"p_at_qberz_5pct_mw", nullptr},
                  {"report_pump_mw", cfg.qkd.report_pump_mw},
                  {"skr_at_report_pump_bps", report.skr},
                  {"qber_z_at_report_pump", report.qber_z}};
  if (sweep.p_opt) {
    const auto best = qkd::secret_key_rate(link, *sweep.p_opt);
    summary["p_opt_mw"] = *sweep.p_opt;
    summary["skr_at_p_opt_bps"] = best.skr;
    summary["qber_z_at_p_opt"] = best.qber_z;
  } else {
    err << "warning: key rate is zero over the whole sweep, no optimum\n";
  }
  if (sweep.p_at_qberz_5pct) summary["p_at_qberz_5pct_mw"] = *sweep.p_at_qberz_5pct;
  emit_summary(cfg, opts, sink.is_file(), summary, out, err);
  return kExitOk;
}

// ---------------------------------------------------------------- fringe

int cmd_fringe_polarization(const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load_config(opts);
  const auto rho = polarization::werner(cfg.polarization.visibility);
  const auto scan = polarization::fringe_curve(rho, cfg.polarization.fixed,
                                               static_cast<std::size_t>(cfg.polarization.points));
  // A half-wave plate at angle a rotates the analyzer by 2a.
  const bool hwp = cfg.polarization.axis == "hwp";
  std::vector<double> axis;
  for (double a : scan.swept_angles) axis.push_back(hwp ? 0.5 * a : a);
  const auto fit = estimation::fit_cos2(axis, scan.probabilities, {hwp ? 4.0 : 2.0});

  Sink sink(cfg, opts.out, out);
  *sink << (hwp ? "hwp_angle_rad" : "angle_rad") << ",probability\n";
  for (std::size_t i = 0; i < axis.size(); ++i)
    *sink << num(axis[i]) << ',' << num(scan.probabilities[i]) << '\n';
  json summary = {{"kind", "polarization"},
                  {"fixed", std::string(1, polarization::to_char(cfg.polarization.fixed))},
                  {"axis", cfg.polarization.axis},
                  {"input_visibility", cfg.polarization.visibility},
                  {"fitted_visibility", fit.at("visibility")},
                  {"fit", fit_to_json(fit)}};
  emit_summary(cfg, opts, sink.is_file(), summary, out, err);
  return fit.converged ? kExitOk : kExitNumeric;
}

int cmd_fringe_franson(const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load_config(opts);
  const auto fc = cfg.franson_config();
  const auto volts = linspace(cfg.franson.v_min, cfg.franson.v_max, cfg.franson.points);
  const auto samples = franson::fringe_vs_voltage(fc, volts);
  std::vector<double> rates;
  for (const auto& s : samples) rates.push_back(s.relative_rate);
  const std::optional<double> scale =
      fc.phase_per_volt != 0.0 ? std::optional<double>(std::abs(fc.phase_per_volt)) : std::nullopt;
  const auto fit = estimation::fit_cos2(volts, rates, {scale});
  const auto feas = franson::franson_feasibility(fc);

  Sink sink(cfg, opts.out, out);
  *sink << "voltage,relative_rate\n";
  for (const auto& s : samples) *sink << num(s.voltage) << ',' << num(s.relative_rate) << '\n';
  json summary = {{"kind", "franson"},
                  {"input_visibility", fc.visibility},
                  {"fitted_visibility", fit.at("visibility")},
                  {"fit", fit_to_json(fit)},
                  {"feasibility",
                   {{"delay_s", feas.delay},
                    {"photon_coherence_s", feas.photon_coherence},
                    {"pump_coherence_s", feas.pump_coherence},
                    {"pass", feas.pass}}}};
  emit_summary(cfg, opts, sink.is_file(), summary, out, err);
  return fit.converged ? kExitOk : kExitNumeric;
}

// ---------------------------------------------------------------- tags

struct TagsOptions {
  std::optional<double> pump_mw;
  std::optional<double> duration;
  std::string format = "csv";
  std::string out_a;
  std::string out_b;
};

int cmd_tags(const CommonOptions& opts, const TagsOptions& to, std::ostream& out, std::ostream&) {
  const RunConfig cfg = load_config(opts);
  if (to.out_a.empty() || to.out_b.empty()) throw ConfigError("tags needs --out-a and --out-b");
  const double pump = to.pump_mw.value_or(cfg.lab.pump_mw);
  const double duration = to.duration.value_or(cfg.lab.duration_s);
  if (!(duration > 0.0) || pump < 0.0) throw ConfigError("tags needs duration > 0 and pump >= 0");
  const auto [a, b] =
      timetags::simulate_streams(cfg.lab_source_spec(), cfg.signal_channel(cfg.lab.loss_signal_db),
                                 cfg.idler_channel(cfg.lab.loss_idler_db), pump, duration,
                                 cfg.run.seed);
  const auto fmt_kind = to.format == "binary" ? timetags::ExportFormat::binary
                                              : timetags::ExportFormat::csv;
  const auto mode = to.format == "binary" ? std::ios::out | std::ios::binary : std::ios::out;
  {
    Sink sa(cfg, to.out_a, out, mode);
    timetags::write_stream(*sa, a, fmt_kind);
    Sink sb(cfg, to.out_b, out, mode);
    timetags::write_stream(*sb, b, fmt_kind);
  }
  const double window = cfg.lab.window_ps * 1e-12;
  const json summary = {
      {"seed", cfg.run.seed},
      {"rng", timetags::kRngName},
      {"pump_mw", pump},
      {"duration_s", duration},
      {"tags_a", a.timestamps.size()},
      {"tags_b", b.timestamps.size()},
      {"coincidences", timetags::count_coincidences(a, b, window, 0.0)},
      {"delayed_coincidences",
       timetags::count_coincidences(a, b, window, cfg.lab.accidental_offset_ns * 1e-9)}};
  out << summary.dump(2) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- fit

struct FitOptions {
  std::string input;
  std::optional<double> scale;
  std::optional<double> baseline;
};

int cmd_fit(const std::string& kind, const CommonOptions& opts, const FitOptions& fo,
            std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load_config(opts);
  if (fo.input.empty()) throw ConfigError("fit needs --input");
  const auto [x, y] = read_xy_csv(fo.input);
  estimation::FitResult fit;
  if (kind == "cos2") {
    fit = estimation::fit_cos2(x, y, {fo.scale});
  } else if (kind == "sinc2") {
    fit = estimation::fit_sinc2(x, y);
  } else {
    fit = estimation::fit_inverse_power(x, y, fo.baseline);
  }
  Sink sink(cfg, opts.out, out);
  *sink << fit_to_json(fit).dump(2) << '\n';
  if (!fit.converged) {
    err << "error: fit did not converge\n";
    return kExitNumeric;
  }
  return kExitOk;
}

void add_common(CLI::App* sub, CommonOptions& c, bool with_summary) {
  sub->add_option("-c,--config", c.config_path, "Config file (INI: [section] key = value)");
  sub->add_option("--set", c.sets, "Override a config key, e.g. --set qkd.window_ps=800")
      ->take_all();
  sub->add_option("--seed", c.seed, "RNG seed (default run.seed, else $PAIRLINK_SEED, else 1)");
  sub->add_option("-o,--out", c.out, "Primary output file (default stdout)");
  if (with_summary)
    sub->add_option("--summary", c.summary, "Summary JSON file (default stdout/stderr)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{
      "pairlink: entangled-pair source and hybrid QKD link simulator.\n"
      "Defaults mirror the measured 810/1550 nm source: 1.4e5 pairs/s/mW, heralding 55 %/48 %,\n"
      "Si-APD 60 %/200 Hz, SNSPD 80 %/50 Hz, 15+15 dB link, 900 ps window.\n"
      "Run `pairlink defaults` for the complete commented configuration.",
      "pairlink"};
  app.require_subcommand(1);

  CommonOptions common;

  app.add_subcommand("defaults", "Print the default configuration file");

  auto* beam = app.add_subcommand("beam", "Rayleigh lengths of the focusing table");
  add_common(beam, common, false);
  beam->add_flag("--json", common.json, "Write JSON instead of CSV");

  CarSweepOptions car_opts;
  auto* car = app.add_subcommand("car-sweep", "CAR and coincidence rates versus pump power");
  add_common(car, common, true);
  car->add_option("--p-min", car_opts.p_min, "Lowest pump power, mW (default lab.p_min_mw = 10)");
  car->add_option("--p-max", car_opts.p_max, "Highest pump power, mW (default lab.p_max_mw = 125)");
  car->add_option("-n,--points", car_opts.points, "Number of powers (default lab.points = 12)");
  car->add_option("--mode", car_opts.mode, "analytic | montecarlo")
      ->check(CLI::IsMember({"analytic", "montecarlo"}));
  car->add_option("--convention", car_opts.convention, "CAR convention: total=(C+A)/A, true=C/A")
      ->check(CLI::IsMember({"total", "true"}));

  TomoOptions tomo_opts;
  auto* tomo = app.add_subcommand("tomo", "Two-photon polarization tomography");
  tomo->require_subcommand(1);
  auto* tomo_sim = tomo->add_subcommand("simulate", "Simulate the 16 tomography count rates");
  add_common(tomo_sim, common, false);
  tomo_sim->add_option("--state-file", tomo_opts.state_file,
                       "Density matrix: 16 row-major re,im pairs (.json or CSV)");
  tomo_sim->add_option("--state", tomo_opts.state,
                       "phi-plus | phi-minus | mixed | werner:P (default werner:tomography.werner_p)");
  tomo_sim->add_option("--mean-total", tomo_opts.mean_total,
                       "Mean counts for unit probability (default tomography.mean_total = 1e6)");
  tomo_sim->add_option("--noise", tomo_opts.noise, "poisson | exact")
      ->check(CLI::IsMember({"poisson", "exact"}));
  auto* tomo_fit = tomo->add_subcommand("fit", "Maximum-likelihood reconstruction");
  add_common(tomo_fit, common, false);
  tomo_fit->add_option("-i,--input", tomo_opts.input, "Counts CSV")->required();
  tomo_fit->add_option("--tol", tomo_opts.tol, "Relative log-likelihood tolerance");
  tomo_fit->add_option("--max-iter", tomo_opts.max_iter, "Iteration limit");

  SweepOptions sweep_opts;
  auto* skr = app.add_subcommand("skr-sweep", "Secret key rate and QBER versus pump power");
  add_common(skr, common, true);
  skr->add_option("--p-min", sweep_opts.p_min, "Lowest pump power, mW (default qkd.p_min_mw = 1)");
  skr->add_option("--p-max", sweep_opts.p_max, "Highest pump power, mW (default qkd.p_max_mw = 2000)");
  skr->add_option("-n,--points", sweep_opts.points, "Grid size (default qkd.points = 400)");

  auto* fringe = app.add_subcommand("fringe", "Two-photon interference fringes");
  fringe->require_subcommand(1);
  auto* fr_pol = fringe->add_subcommand("polarization", "Analyzer sweep on a Werner state (V = 0.995)");
  add_common(fr_pol, common, true);
  auto* fr_fra = fringe->add_subcommand("franson", "Franson fringe versus piezo voltage (V = 0.991)");
  add_common(fr_fra, common, true);

  TagsOptions tags_opts;
  auto* tags = app.add_subcommand("tags", "Simulate and export detector time tags (ps)");
  add_common(tags, common, false);
  tags->add_option("--pump", tags_opts.pump_mw, "Pump power, mW (default lab.pump_mw = 125)");
  tags->add_option("--duration", tags_opts.duration, "Acquisition, s (default lab.duration_s)");
  tags->add_option("--format", tags_opts.format, "csv | binary (little-endian uint64)")
      ->check(CLI::IsMember({"csv", "binary"}));
  tags->add_option("--out-a", tags_opts.out_a, "Signal-arm output file")->required();
  tags->add_option("--out-b", tags_opts.out_b, "Idler-arm output file")->required();

  FitOptions fit_opts;
  auto* fit = app.add_subcommand("fit", "Fit a two-column x,y CSV");
  fit->require_subcommand(1);
  std::vector<CLI::App*> fit_subs;
  for (const char* kind : {"cos2", "sinc2", "inverse-power"}) {
    auto* f = fit->add_subcommand(kind, std::string("Fit the ") + kind + " model");
    add_common(f, common, false);
    f->add_option("-i,--input", fit_opts.input, "x,y CSV")->required();
    fit_subs.push_back(f);
  }
  fit_subs[0]->add_option("--scale", fit_opts.scale, "Known angular scale s (omit to fit it)");
  fit_subs[2]->add_option("--baseline", fit_opts.baseline, "Fix the baseline (1 = dark-free)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (app.got_subcommand("defaults")) {
      out << default_config_text();
      return kExitOk;
    }
    if (beam->parsed()) return cmd_beam(common, out, err);
    if (car->parsed()) return cmd_car_sweep(common, car_opts, out, err);
    if (tomo_sim->parsed()) return cmd_tomo_simulate(common, tomo_opts, out, err);
    if (tomo_fit->parsed()) return cmd_tomo_fit(common, tomo_opts, out, err);
    if (skr->parsed()) return cmd_skr_sweep(common, sweep_opts, out, err);
    if (fr_pol->parsed()) return cmd_fringe_polarization(common, out, err);
    if (fr_fra->parsed()) return cmd_fringe_franson(common, out, err);
    if (tags->parsed()) return cmd_tags(common, tags_opts, out, err);
    if (fit_subs[0]->parsed()) return cmd_fit("cos2", common, fit_opts, out, err);
    if (fit_subs[1]->parsed()) return cmd_fit("sinc2", common, fit_opts, out, err);
    if (fit_subs[2]->parsed()) return cmd_fit("inverse-power", common, fit_opts, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UndefinedResult& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  err << app.help();
  return kExitUsage;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace pairlink::cli
