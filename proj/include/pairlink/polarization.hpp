#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace pairlink::polarization {

using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;
using Vector2c = Eigen::Vector2cd;
using Vector4c = Eigen::Vector4cd;

// Numerical tolerances of the TwoQubitState invariants.
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kEigenvalueTol = 1e-9;

// Single-photon analyzer labels. Conventions: D=(H+V)/sqrt2, A=(H-V)/sqrt2,
// R=(H-iV)/sqrt2, L=(H+iV)/sqrt2.
enum class PolLabel { H, V, D, A, R, L };

char to_char(PolLabel label);
PolLabel label_from_char(char c);  // throws DomainError

// A projective single-photon analyzer: either one of the six labelled
// states, or a linear analyzer at angle theta from H (optionally preceded
// by a quarter-wave plate, giving cos(theta) H - i sin(theta) V).
class AnalyzerSetting {
 public:
  AnalyzerSetting(PolLabel label);  // NOLINT: implicit on purpose
  static AnalyzerSetting linear(double theta, bool quarter_wave = false);

  Vector2c jones() const;
  AnalyzerSetting orthogonal() const;
  std::optional<PolLabel> label() const { return label_; }

 private:
  AnalyzerSetting() = default;
  std::optional<PolLabel> label_;
  double theta_ = 0.0;
  bool quarter_wave_ = false;
};

Matrix2c single_qubit_projector(const AnalyzerSetting& setting);

// Physical two-qubit density matrix in the |HH>,|HV>,|VH>,|VV> basis.
// Construction validates Hermiticity, unit trace and positivity; tiny
// negative eigenvalues (>= -kEigenvalueTol) are clipped and the trace
// renormalized.
class TwoQubitState {
 public:
  static TwoQubitState from_matrix(const Matrix4c& m);
  static TwoQubitState pure(const Vector4c& psi);
  static TwoQubitState maximally_mixed();

  const Matrix4c& matrix() const { return rho_; }

 private:
  explicit TwoQubitState(Matrix4c rho) : rho_(std::move(rho)) {}
  Matrix4c rho_;
};

Vector4c phi_plus_vector();
Vector4c phi_minus_vector();
TwoQubitState bell_phi_plus();
TwoQubitState bell_phi_minus();
// p |Phi+><Phi+| + (1-p) I/4
TwoQubitState werner(double p);

// Eigen-decompose, clip negative eigenvalues, renormalize the trace. Used
// on raw linear-inversion output.
TwoQubitState project_to_physical(const Matrix4c& m);

TwoQubitState apply_unitary(const TwoQubitState& rho, const Matrix4c& u);

// Tr[rho (Pa x Pb)]
double coincidence_probability(const TwoQubitState& rho, const AnalyzerSetting& a,
                               const AnalyzerSetting& b);

struct FringeScan {
  AnalyzerSetting fixed_arm;
  std::vector<double> swept_angles;  // analyzer angle, radians
  std::vector<double> probabilities;
};

// Sweeps a linear analyzer on the second photon over [0, pi) in n_points
// uniform steps while the first photon is projected on `fixed`.
FringeScan fringe_curve(const TwoQubitState& rho, const AnalyzerSetting& fixed,
                        std::size_t n_points);

double visibility(double max_val, double min_val);
double visibility(const FringeScan& scan);

double purity(const TwoQubitState& rho);

// <psi|rho|psi>; target must be pure to 1e-9.
double fidelity_to_pure(const TwoQubitState& rho, const TwoQubitState& target);

// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double fidelity(const TwoQubitState& rho, const TwoQubitState& sigma);

}  // namespace pairlink::polarization
