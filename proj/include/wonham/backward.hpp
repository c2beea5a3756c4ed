#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "wonham/model.hpp"
#include "wonham/simulate.hpp"
#include "wonham/structure.hpp"

namespace wonham {

struct McOptions {
  std::uint64_t seed = 1;
  std::size_t workers = 0;
  FilterScheme scheme = FilterScheme::ZakaiSplit;
};

// A Monte-Carlo estimate and its standard error.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// y0(x) = E^nu(gamma_T(X_T) | X_0 = x), one row of paths per state.
struct BackwardMapEstimate {
  FunctionVector y0;
  FunctionVector std_error;
  double horizon = 0.0;
  std::size_t inner_paths = 0;
  Vector nu;
  std::size_t floor_hits = 0;
};

// X_0 is forced to each x in turn while the nu-filter still starts at nu and
// the mu-filter at mu: the conditioning is on the signal only.
BackwardMapEstimate estimate_y0(const FiniteHmm& model, const Simplex& mu, const Simplex& nu, const TimeGrid& grid,
                                std::size_t n_per_state, const McOptions& options = {});

// sum_x nu(x) (y0(x) - 1)^2
double variance_y0(const BackwardMapEstimate& est, const Simplex& nu);
// Same value with a delta-method standard error.
Estimate variance_y0_estimate(const BackwardMapEstimate& est, const Simplex& nu);

// nu(y0) with standard error.
Estimate nu_mean_y0(const BackwardMapEstimate& est, const Simplex& nu);

// var^nu(gamma_T(X_T)) = E^nu |gamma_T(X_T) - 1|^2 over paths with X_0 ~ nu.
Estimate terminal_variance(const FiniteHmm& model, const Simplex& mu, const Simplex& nu, const TimeGrid& grid,
                           std::size_t n_paths, const McOptions& options = {});

// E^mu chi^2(pi_T^mu | pi_T^nu) over paths with X_0 ~ mu.
Estimate expected_terminal_chi2(const FiniteHmm& model, const Simplex& mu, const Simplex& nu, const TimeGrid& grid,
                                std::size_t n_paths, const McOptions& options = {});

struct JensenResult {
  Estimate lhs;  // var^nu(y0(X_0))
  Estimate rhs;  // var^nu(gamma_T(X_T))
  bool pass = false;
};

struct IdentityResult {
  Estimate lhs;  // E^mu chi^2
  Estimate rhs;  // mu(y0) - 1
  double z_score = 0.0;
};

struct CauchySchwarzResult {
  double lhs_squared = 0.0;  // (E^mu chi^2)^2
  double bound = 0.0;        // var^nu(y0(X_0)) chi^2(mu | nu)
  double relative_error = 0.0;
  bool pass = false;
};

// Comparisons from precomputed estimates.
JensenResult jensen_from(const Estimate& var_y0, const Estimate& var_gamma);
IdentityResult identity_from(const Estimate& expected_chi2, const BackwardMapEstimate& est, const Simplex& mu);
CauchySchwarzResult cauchy_schwarz_from(const Estimate& expected_chi2, const Estimate& var_y0, double prior_chi2);

// Each check runs its own estimates with n_paths per state / per sample.
JensenResult jensen_check(const FiniteHmm& model, const Simplex& mu, const Simplex& nu, const TimeGrid& grid,
                          std::size_t n_paths, const McOptions& options = {});
IdentityResult chisq_identity_check(const FiniteHmm& model, const Simplex& mu, const Simplex& nu,
                                    const TimeGrid& grid, std::size_t n_paths, const McOptions& options = {});
CauchySchwarzResult cauchy_schwarz_check(const FiniteHmm& model, const Simplex& mu, const Simplex& nu,
                                         const TimeGrid& grid, std::size_t n_paths, const McOptions& options = {});

struct NestedMcSpec {
  std::vector<double> checkpoint_times;  // on the grid; empty = {0, T/4, T/2, 3T/4, T}
  std::size_t outer_paths = 200;
  std::size_t inner_paths = 200;
  double budget = 5e9;  // cap on outer * inner * d * (filter steps)
};

struct CheckpointVariance {
  double t = 0.0;
  Estimate variance;           // debiased var^nu(Y_t(X_t))
  double raw_variance = 0.0;   // before subtracting the inner-sample variance / M
};

struct NestedResult {
  std::vector<CheckpointVariance> checkpoints;
  // Per outer path, per checkpoint, the debiased squared deviation.
  std::vector<std::vector<double>> terms;
  // Inner-sample pooled estimate of Y_0(x) when t = 0 is a checkpoint.
  FunctionVector y0_at_zero;
  FunctionVector y0_at_zero_std_error;
};

/// Y_t(x) = E^nu(gamma_T(X_T) | Z_[0,t], X_t = x), estimated by freezing the
/// observation history of each outer path at t and averaging gamma_T(X_T)
/// over fresh continuations from X_t = x.
NestedResult nested_Yt(const FiniteHmm& model, const Simplex& mu, const Simplex& nu, const TimeGrid& grid,
                       const NestedMcSpec& spec, const McOptions& options = {});

// var(gamma_T(X_T)) - var(y0(X_0)) from the first (t = 0) and last (t = T)
// checkpoints, paired over outer paths.
Estimate integrated_energy(const NestedResult& result);

// Checkpoint variances non-decreasing in t within `sigmas` combined errors.
bool checkpoints_monotone(const NestedResult& result, double sigmas = 3.0);

// (1/T) log(var^nu(gamma_T(X_T)) / var^nu(y0(X_0))). Throws
// VarianceIndistinguishableFromZero unless both exceed 3 standard errors.
Estimate empirical_rate_bound(const Estimate& var_gamma, const Estimate& var_y0, double horizon);
Estimate empirical_rate_bound(const FiniteHmm& model, const Simplex& mu, const Simplex& nu, const TimeGrid& grid,
                              std::size_t n_paths, const McOptions& options = {});

struct WitnessPathPoint {
  double t = 0.0;
  std::vector<Estimate> moments;  // one per observable basis vector g: pi_t^rho(f g)
};

// pi_t^rho(f g) along filter paths started at rho with X_0 ~ rho.
std::vector<WitnessPathPoint> witness_path_statistic(const FiniteHmm& model, const Witness& witness, const TimeGrid& grid,
                                          const std::vector<double>& checkpoint_times, std::size_t n_paths,
                                          const McOptions& options = {});

}  // namespace wonham
