#include "pairlink/polarization.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "pairlink/errors.hpp"

namespace pairlink::polarization {

namespace {

using cd = std::complex<double>;
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

Matrix4c hermitian_part(const Matrix4c& m) { return 0.5 * (m + m.adjoint()); }

Matrix4c psd_sqrt(const Matrix4c& m) {
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(m);
  const Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

char to_char(PolLabel label) {
  switch (label) {
    case PolLabel::H: return 'H';
    case PolLabel::V: return 'V';
    case PolLabel::D: return 'D';
    case PolLabel::A: return 'A';
    case PolLabel::R: return 'R';
    case PolLabel::L: return 'L';
  }
  return '?';
}

PolLabel label_from_char(char c) {
  switch (c) {
    case 'H': return PolLabel::H;
    case 'V': return PolLabel::V;
    case 'D': return PolLabel::D;
    case 'A': return PolLabel::A;
    case 'R': return PolLabel::R;
    case 'L': return PolLabel::L;
    default: break;
  }
  throw DomainError(std::string("unknown analyzer label '") + c + "'");
}

AnalyzerSetting::AnalyzerSetting(PolLabel label) : label_(label) {}

AnalyzerSetting AnalyzerSetting::linear(double theta, bool quarter_wave) {
  AnalyzerSetting s;
  s.theta_ = theta;
  s.quarter_wave_ = quarter_wave;
  return s;
}

Vector2c AnalyzerSetting::jones() const {
  if (!label_) {
    const double c = std::cos(theta_);
    const double s = std::sin(theta_);
    return quarter_wave_ ? Vector2c(cd(c, 0), cd(0, -s)) : Vector2c(cd(c, 0), cd(s, 0));
  }
  switch (*label_) {
    case PolLabel::H: return {cd(1, 0), cd(0, 0)};
    case PolLabel::V: return {cd(0, 0), cd(1, 0)};
    case PolLabel::D: return {cd(kInvSqrt2, 0), cd(kInvSqrt2, 0)};
    case PolLabel::A: return {cd(kInvSqrt2, 0), cd(-kInvSqrt2, 0)};
    case PolLabel::R: return {cd(kInvSqrt2, 0), cd(0, -kInvSqrt2)};
    case PolLabel::L: return {cd(kInvSqrt2, 0), cd(0, kInvSqrt2)};
  }
  return {};
}

AnalyzerSetting AnalyzerSetting::orthogonal() const {
  if (!label_) return linear(theta_ + 0.5 * M_PI, quarter_wave_);
  switch (*label_) {
    case PolLabel::H: return PolLabel::V;
    case PolLabel::V: return PolLabel::H;
    case PolLabel::D: return PolLabel::A;
    case PolLabel::A: return PolLabel::D;
    case PolLabel::R: return PolLabel::L;
    case PolLabel::L: return PolLabel::R;
  }
  return *this;
}

Matrix2c single_qubit_projector(const AnalyzerSetting& setting) {
  const Vector2c v = setting.jones();
  return v * v.adjoint();
}

TwoQubitState TwoQubitState::from_matrix(const Matrix4c& m) {
  if (!m.allFinite()) throw DomainError("density matrix has non-finite entries");
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol)
    throw DomainError("density matrix is not Hermitian");
  const cd tr = m.trace();
  if (std::abs(tr - cd(1.0, 0.0)) > kTraceTol)
    throw DomainError("density matrix trace differs from 1");

  Matrix4c rho = hermitian_part(m);
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(rho);
  const Eigen::Vector4d ev = es.eigenvalues();
  if (ev.minCoeff() < -kEigenvalueTol)
    throw DomainError("density matrix has a negative eigenvalue");
  if (ev.minCoeff() < 0.0) {
    const Eigen::Vector4d clipped = ev.cwiseMax(0.0);
    rho = es.eigenvectors() * (clipped / clipped.sum()).asDiagonal() *
          es.eigenvectors().adjoint();
    rho = hermitian_part(rho);
  }
  return TwoQubitState(std::move(rho));
}

TwoQubitState TwoQubitState::pure(const Vector4c& psi) {
  const double n = psi.norm();
  require(n > 0.0, "state vector must be non-zero");
  const Vector4c u = psi / n;
  return TwoQubitState(hermitian_part(u * u.adjoint()));
}

TwoQubitState TwoQubitState::maximally_mixed() {
  return TwoQubitState(Matrix4c::Identity() * 0.25);
}

Vector4c phi_plus_vector() { return Vector4c(kInvSqrt2, 0, 0, kInvSqrt2); }
Vector4c phi_minus_vector() { return Vector4c(kInvSqrt2, 0, 0, -kInvSqrt2); }
TwoQubitState bell_phi_plus() { return TwoQubitState::pure(phi_plus_vector()); }
TwoQubitState bell_phi_minus() { return TwoQubitState::pure(phi_minus_vector()); }

TwoQubitState werner(double p) {
  require(p >= 0.0 && p <= 1.0, "Werner weight must lie in [0,1]");
  const Vector4c v = phi_plus_vector();
  return TwoQubitState::from_matrix(p * v * v.adjoint() +
                                    (1.0 - p) * 0.25 * Matrix4c::Identity());
}

TwoQubitState project_to_physical(const Matrix4c& m) {
  require(m.allFinite(), "matrix has non-finite entries");
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(hermitian_part(m));
  const Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0);
  const double total = ev.sum();
  require(total > 0.0, "matrix has no positive part");
  Matrix4c rho = es.eigenvectors() * (ev / total).asDiagonal() * es.eigenvectors().adjoint();
  return TwoQubitState::from_matrix(hermitian_part(rho));
}

TwoQubitState apply_unitary(const TwoQubitState& rho, const Matrix4c& u) {
  return TwoQubitState::from_matrix(hermitian_part(u * rho.matrix() * u.adjoint()));
}

double coincidence_probability(const TwoQubitState& rho, const AnalyzerSetting& a,
                               const AnalyzerSetting& b) {
  const Vector2c va = a.jones();
  const Vector2c vb = b.jones();
  Vector4c ab;
  ab << va(0) * vb(0), va(0) * vb(1), va(1) * vb(0), va(1) * vb(1);
  const double p = (ab.adjoint() * rho.matrix() * ab)(0, 0).real();
  return std::clamp(p, 0.0, 1.0);
}

FringeScan fringe_curve(const TwoQubitState& rho, const AnalyzerSetting& fixed,
                        std::size_t n_points) {
  require(n_points >= 4, "fringe scan needs at least 4 points");
  FringeScan scan{fixed, {}, {}};
  scan.swept_angles.reserve(n_points);
  scan.probabilities.reserve(n_points);
  for (std::size_t k = 0; k < n_points; ++k) {
    const double theta = M_PI * static_cast<double>(k) / static_cast<double>(n_points);
    scan.swept_angles.push_back(theta);
    scan.probabilities.push_back(
        coincidence_probability(rho, fixed, AnalyzerSetting::linear(theta)));
  }
  return scan;
}

double visibility(double max_val, double min_val) {
  require(max_val >= min_val && min_val >= 0.0 && max_val > 0.0,
          "visibility needs max >= min >= 0 and max > 0");
  return (max_val - min_val) / (max_val + min_val);
}

double visibility(const FringeScan& scan) {
  require(!scan.probabilities.empty(), "empty fringe scan");
  const auto [lo, hi] = std::minmax_element(scan.probabilities.begin(), scan.probabilities.end());
  return visibility(*hi, *lo);
}

double purity(const TwoQubitState& rho) {
  return (rho.matrix() * rho.matrix()).trace().real();
}

double fidelity_to_pure(const TwoQubitState& rho, const TwoQubitState& target) {
  require(std::abs(purity(target) - 1.0) <= 1e-9, "fidelity target must be pure");
  // A pure target is the projector |psi><psi|, so Tr(rho P) = <psi|rho|psi>.
  return std::clamp((rho.matrix() * target.matrix()).trace().real(), 0.0, 1.0);
}

double fidelity(const TwoQubitState& rho, const TwoQubitState& sigma) {
  const Matrix4c s = psd_sqrt(rho.matrix());
  const Matrix4c inner = hermitian_part(s * sigma.matrix() * s);
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(inner);
  const double f = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return std::clamp(f * f, 0.0, 1.0);
}

}  // namespace pairlink::polarization
