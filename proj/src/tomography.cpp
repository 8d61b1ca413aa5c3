#include "pairlink/tomography.hpp"

#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "pairlink/errors.hpp"

namespace pairlink::tomography {

namespace {

using polarization::AnalyzerSetting;
using polarization::Matrix2c;
using cd = std::complex<double>;
using Params = Eigen::Matrix<double, 16, 1>;

constexpr double kStartDepolarization = 1e-3;

std::array<Matrix2c, 4> paulis() {
  Matrix2c i2 = Matrix2c::Identity();
  Matrix2c x, y, z;
  x << 0, 1, 1, 0;
  y << 0, cd(0, -1), cd(0, 1), 0;
  z << 1, 0, 0, -1;
  return {i2, x, y, z};
}

Matrix4c kron(const Matrix2c& a, const Matrix2c& b) {
  Matrix4c out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

// Parameter layout: 4 real diagonal entries, then (re, im) of the six
// strictly-lower entries in row-major order.
Matrix4c params_to_lower(const Params& t) {
  Matrix4c l = Matrix4c::Zero();
  int k = 4;
  for (int i = 0; i < 4; ++i) {
    l(i, i) = t(i);
    for (int j = 0; j < i; ++j, k += 2) l(i, j) = cd(t(k), t(k + 1));
  }
  return l;
}

Params lower_to_params(const Matrix4c& l) {
  Params t;
  int k = 4;
  for (int i = 0; i < 4; ++i) {
    t(i) = l(i, i).real();
    for (int j = 0; j < i; ++j, k += 2) {
      t(k) = l(i, j).real();
      t(k + 1) = l(i, j).imag();
    }
  }
  return t;
}

// Profiled likelihood over unnormalized X; scale invariant in X.
struct Likelihood {
  std::vector<Matrix4c> ops;
  std::vector<double> counts;
  std::vector<double> times;
  double n_total = 0.0;

  explicit Likelihood(const std::vector<CountRecord>& records) {
    for (const auto& r : records) {
      ops.push_back(r.setting.projector());
      counts.push_back(r.counts);
      times.push_back(r.integration_s);
      n_total += r.counts;
    }
  }

  double value(const Matrix4c& x) const {
    double sum = 0.0;
    double exposure = 0.0;
    for (std::size_t i = 0; i < ops.size(); ++i) {
      const double q = (ops[i] * x).trace().real();
      exposure += times[i] * q;
      if (counts[i] > 0.0) {
        if (q <= 0.0) return -std::numeric_limits<double>::infinity();
        sum += counts[i] * std::log(times[i] * q);
      }
    }
    if (exposure <= 0.0) return -std::numeric_limits<double>::infinity();
    if (n_total <= 0.0) return 0.0;
    return sum - n_total * std::log(exposure) + n_total * std::log(n_total) - n_total;
  }

  // d value / d X (as a Hermitian matrix).
  Matrix4c gradient(const Matrix4c& x) const {
    Matrix4c g = Matrix4c::Zero();
    Matrix4c exposure_op = Matrix4c::Zero();
    double exposure = 0.0;
    for (std::size_t i = 0; i < ops.size(); ++i) {
      const double q = (ops[i] * x).trace().real();
      exposure += times[i] * q;
      exposure_op += times[i] * ops[i];
      if (counts[i] > 0.0) g += (counts[i] / q) * ops[i];
    }
    return g - (n_total / exposure) * exposure_op;
  }

  double value_params(const Params& t) const {
    const Matrix4c l = params_to_lower(t);
    return value(l * l.adjoint());
  }

  Params gradient_params(const Params& t) const {
    const Matrix4c l = params_to_lower(t);
    const Matrix4c h = gradient(l * l.adjoint()) * l;
    Params g;
    int k = 4;
    for (int i = 0; i < 4; ++i) {
      g(i) = 2.0 * h(i, i).real();
      for (int j = 0; j < i; ++j, k += 2) {
        g(k) = 2.0 * h(i, j).real();
        g(k + 1) = 2.0 * h(i, j).imag();
      }
    }
    return g;
  }
};

TwoQubitState normalized_state(const Params& t) {
  const Matrix4c l = params_to_lower(t);
  Matrix4c x = l * l.adjoint();
  x /= x.trace().real();
  return TwoQubitState::from_matrix(0.5 * (x + x.adjoint()));
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Matrix4c TomographySetting::projector() const {
  return kron(polarization::single_qubit_projector(arm_a),
              polarization::single_qubit_projector(arm_b));
}

std::vector<TomographySetting> standard_16_settings() {
  using P = PolLabel;
  return {{P::H, P::H}, {P::H, P::V}, {P::V, P::V}, {P::V, P::H},
          {P::H, P::D}, {P::H, P::L}, {P::V, P::D}, {P::V, P::L},
          {P::D, P::H}, {P::D, P::V}, {P::D, P::D}, {P::D, P::L},
          {P::L, P::H}, {P::L, P::V}, {P::L, P::D}, {P::L, P::L}};
}

std::vector<CountRecord> simulate_counts(const TwoQubitState& rho,
                                         const std::vector<TomographySetting>& settings,
                                         double mean_total, std::uint64_t seed,
                                         CountNoise noise, double integration_s) {
  require(mean_total > 0.0, "mean_total must be positive");
  require(integration_s > 0.0, "integration time must be positive");
  std::mt19937_64 rng(seed);
  std::vector<CountRecord> out;
  out.reserve(settings.size());
  for (const auto& s : settings) {
    const double mean = mean_total * integration_s *
                        polarization::coincidence_probability(rho, s.arm_a, s.arm_b);
    double n = mean;
    if (noise == CountNoise::poisson) {
      n = 0.0;
      if (mean > 0.0) {
        std::poisson_distribution<long long> dist(mean);
        n = static_cast<double>(dist(rng));
      }
    }
    out.push_back({s, n, integration_s});
  }
  return out;
}

Matrix4c linear_inversion(const std::vector<CountRecord>& records) {
  require(!records.empty(), "no count records");
  const auto sigma = paulis();
  std::array<Matrix4c, 16> basis;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) basis[4 * a + b] = kron(sigma[a], sigma[b]);

  const auto n = static_cast<Eigen::Index>(records.size());
  Eigen::MatrixXd design(n, 16);
  Eigen::VectorXd rates(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = records[static_cast<std::size_t>(i)];
    require(r.integration_s > 0.0, "integration time must be positive");
    const Matrix4c m = r.setting.projector();
    for (int k = 0; k < 16; ++k) design(i, k) = (m * basis[k]).trace().real();
    rates(i) = r.counts / r.integration_s;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < 16) throw DomainError("measurement settings are not informationally complete");
  const Eigen::VectorXd coeff = qr.solve(rates);

  Matrix4c x = Matrix4c::Zero();
  for (int k = 0; k < 16; ++k) x += coeff(k) * basis[k];
  const double tr = x.trace().real();
  require(tr > 0.0, "reconstructed matrix has non-positive trace (no counts?)");
  x /= tr;
  return 0.5 * (x + x.adjoint());
}

double log_likelihood(const std::vector<CountRecord>& records, const TwoQubitState& rho) {
  return Likelihood(records).value(rho.matrix());
}

ReconstructionResult mle_reconstruct(const std::vector<CountRecord>& records, double tol,
                                     int max_iter) {
  const TwoQubitState projected = polarization::project_to_physical(linear_inversion(records));
  const Likelihood like(records);
  const double projected_ll = like.value(projected.matrix());

  const Matrix4c start = (1.0 - kStartDepolarization) * projected.matrix() +
                         kStartDepolarization * 0.25 * Matrix4c::Identity();
  Eigen::LLT<Matrix4c> llt(start);
  Params t = lower_to_params(llt.matrixL());

  // BFGS on f = -loglik.
  const double grad_scale = std::max(like.n_total, 1.0);
  double f = -like.value_params(t);
  Params g = -like.gradient_params(t);
  Eigen::Matrix<double, 16, 16> hinv = Eigen::Matrix<double, 16, 16>::Identity() / grad_scale;
  bool first = true;
  bool converged = false;
  int iter = 0;

  for (; iter < max_iter; ++iter) {
    if (g.norm() / grad_scale < 1e-8) {
      converged = true;
      break;
    }
    Params dir = -hinv * g;
    if (dir.dot(g) >= 0.0) {
      hinv = Eigen::Matrix<double, 16, 16>::Identity() / grad_scale;
      dir = -hinv * g;
    }
    double step = 1.0;
    double f_new = f;
    Params t_new = t;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
      t_new = t + step * dir;
      f_new = -like.value_params(t_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * g.dot(dir)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No descent at working precision: we are at the optimum.
      converged = true;
      break;
    }
    const Params g_new = -like.gradient_params(t_new);
    const Params s = t_new - t;
    const Params y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-300) {
      if (first) {
        hinv = Eigen::Matrix<double, 16, 16>::Identity() * (sy / y.squaredNorm());
        first = false;
      }
      const double rho_k = 1.0 / sy;
      const Eigen::Matrix<double, 16, 16> id = Eigen::Matrix<double, 16, 16>::Identity();
      hinv = (id - rho_k * s * y.transpose()) * hinv * (id - rho_k * y * s.transpose()) +
             rho_k * s * s.transpose();
    }
    const double rel_change = std::abs(f - f_new) / std::max(1.0, std::abs(f_new));
    t = t_new;
    f = f_new;
    g = g_new;
    if (rel_change < tol) {
      converged = true;
      ++iter;
      break;
    }
  }

  // Rescale so the parameters describe a unit-trace matrix.
  TwoQubitState state = normalized_state(t);
  double ll = like.value(state.matrix());
  if (projected_ll > ll) {
    state = projected;
    ll = projected_ll;
  }
  return {state, ll, iter, converged};
}

void write_counts_csv(std::ostream& out, const std::vector<CountRecord>& records) {
  const auto old_prec = out.precision(17);
  out << "setting_a,setting_b,counts,integration_s\n";
  for (const auto& r : records) {
    out << polarization::to_char(r.setting.arm_a) << ',' << polarization::to_char(r.setting.arm_b)
        << ',' << r.counts << ',' << r.integration_s << '\n';
  }
  out.precision(old_prec);
}

std::vector<CountRecord> read_counts_csv(std::istream& in) {
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  std::vector<CountRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "setting_a,setting_b,counts,integration_s")
        throw DomainError("counts CSV: unexpected header '" + line + "'");
      header_seen = true;
      continue;
    }
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(trim(cell));
    const std::string where = "counts CSV line " + std::to_string(line_no) + ": ";
    if (cols.size() != 4 || cols[0].size() != 1 || cols[1].size() != 1)
      throw DomainError(where + "expected 4 columns with single-letter settings");
    CountRecord r;
    r.setting = {polarization::label_from_char(cols[0][0]),
                 polarization::label_from_char(cols[1][0])};
    try {
      std::size_t used = 0;
      r.counts = std::stod(cols[2], &used);
      if (used != cols[2].size()) throw std::invalid_argument("trailing");
      r.integration_s = std::stod(cols[3], &used);
      if (used != cols[3].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw DomainError(where + "malformed number");
    }
    if (!(r.counts >= 0.0) || !std::isfinite(r.counts))
      throw DomainError(where + "counts must be non-negative");
    if (!(r.integration_s > 0.0) || !std::isfinite(r.integration_s))
      throw DomainError(where + "integration time must be positive");
    out.push_back(r);
  }
  if (!header_seen) throw DomainError("counts CSV: empty input");
  if (out.empty()) throw DomainError("counts CSV: no records");
  return out;
}

}  // namespace pairlink::tomography
