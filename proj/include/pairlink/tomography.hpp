#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "pairlink/polarization.hpp"

namespace pairlink::tomography {

using polarization::Matrix4c;
using polarization::PolLabel;
using polarization::TwoQubitState;

struct TomographySetting {
  PolLabel arm_a;
  PolLabel arm_b;

  // Two-photon projector Pa (x) Pb.
  Matrix4c projector() const;
  friend bool operator==(const TomographySetting&, const TomographySetting&) = default;
};

struct CountRecord {
  TomographySetting setting;
  double counts = 0.0;  // integer-valued except in exact-means simulation
  double integration_s = 1.0;
};

struct ReconstructionResult {
  TwoQubitState state;
  double log_likelihood;
  int iterations;
  bool converged;
};

// HH HV VV VH HD HL VD VL DH DV DD DL LH LV LD LL
std::vector<TomographySetting> standard_16_settings();

enum class CountNoise { poisson, exact_means };

/// Counts with mean mean_total * Tr[rho (Pa x Pb)] per setting.
std::vector<CountRecord> simulate_counts(const TwoQubitState& rho,
                                         const std::vector<TomographySetting>& settings,
                                         double mean_total, std::uint64_t seed,
                                         CountNoise noise = CountNoise::poisson,
                                         double integration_s = 1.0);

/// Least-squares solution of rate_i = Tr(M_i X) over Hermitian X, trace
/// normalized to 1. The result can have negative eigenvalues. Throws
/// DomainError when the settings are not informationally complete.
Matrix4c linear_inversion(const std::vector<CountRecord>& records);

/// Poisson log-likelihood sum[n ln(N t p) - N t p] with the total flux N
/// set to its maximum-likelihood value sum(n)/sum(t p).
double log_likelihood(const std::vector<CountRecord>& records, const TwoQubitState& rho);

/// Maximum-likelihood state over rho = T T^dag / Tr(T T^dag), T lower
/// triangular with real diagonal (16 real parameters).
ReconstructionResult mle_reconstruct(const std::vector<CountRecord>& records,
                                     double tol = 1e-10, int max_iter = 2000);

// CSV: setting_a,setting_b,counts,integration_s
void write_counts_csv(std::ostream& out, const std::vector<CountRecord>& records);
std::vector<CountRecord> read_counts_csv(std::istream& in);  // throws DomainError

}  // namespace pairlink::tomography
