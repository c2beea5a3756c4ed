#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wonham/model.hpp"
#include "wonham/simulate.hpp"
#include "wonham/structure.hpp"

namespace wonham {

/// chi^2(p | q) = sum_x p(x)^2 / q(x) - 1.
///
/// States with q(x) < floor are dropped; if p puts more than `floor` mass on
/// any of them the divergence is infinite and AbsoluteContinuityViolated is
/// thrown.
double chi_square(const Simplex& p, const Simplex& q, double floor = kRatioFloor);
double chi_square(const Vector& p, const Vector& q, double floor = kRatioFloor);

struct FlooredChiSquare {
  double value = 0.0;
  std::size_t floor_hits = 0;  // states dropped because q(x) < floor while p(x) > 0
};

// Same sum over {q >= floor}, counting instead of rejecting dropped mass.
// Used on filter trajectories, where both filters can underflow together.
FlooredChiSquare chi_square_floored(const Vector& p, const Vector& q, double floor = kRatioFloor);

struct DivergenceCurve {
  std::vector<double> times;
  std::vector<double> mean_chi2;
  std::vector<double> std_error;
  std::size_t n_paths = 0;
  std::size_t floor_hits = 0;
};

struct FitWindow {
  double lo = 0.0;
  double hi = 0.0;
};

struct RateFit {
  double rate = 0.0;       // 1 / time
  double intercept = 0.0;  // log scale
  FitWindow window;
  double r_squared = 0.0;
  std::size_t n_points = 0;
  std::size_t n_dropped = 0;  // points below kFitNoiseFloor inside the window
};

inline constexpr double kFitNoiseFloor = 1e-14;

// Least squares of log(mean_chi2) on t over the window; rate = -slope.
RateFit fit_rate(const DivergenceCurve& curve, FitWindow window);

// Two-pass fit: a first pass on [T/2, T] gives rate_guess, the reported fit
// uses [min(T/2, max(1, 2 / rate_guess)), T] (lower end 1 when rate_guess <= 0).
RateFit fit_rate_auto(const DivergenceCurve& curve);

enum class SamplingPrior { Mu, Nu, Custom };

struct ExperimentConfig {
  std::string label;
  FiniteHmm model;
  Simplex mu;
  Simplex nu;
  SamplingPrior sampling = SamplingPrior::Mu;
  std::optional<Simplex> custom_prior;
  double horizon = 10.0;
  double dt = 0.005;
  std::size_t n_paths = 500;
  std::uint64_t seed = 1;
  std::optional<FitWindow> fit_window;
  FilterScheme scheme = FilterScheme::ZakaiSplit;
  std::size_t workers = 0;  // 0 = default_workers()

  const Simplex& sampling_prior() const;
  // Checks n_paths, priors and absolute continuity; throws ConfigError.
  void validate() const;
};

/// Monte-Carlo mean of chi^2(pi_t^mu | pi_t^nu) on the grid. Path i uses the
/// stream (seed, i); the reduction runs in path order, so the result does not
/// depend on the worker count.
DivergenceCurve mc_divergence_curve(const ExperimentConfig& config);

// CSV: header `t,mean_chi2,stderr,n_paths,floor_hits`, 17 significant digits.
void write_curve_csv(std::ostream& out, const DivergenceCurve& curve);

// ---------------------------------------------------------------- Table I

Matrix table1_rates(double epsilon);
Vector table1_observation(int which);  // 1, 2 or 3
FiniteHmm table1_model(double epsilon, int which);
Simplex table1_mu();
Simplex table1_nu();

struct Table1Case {
  double epsilon;
  int h_index;
  const char* h_name;
  const char* reference_property;
  double reference_rate;
};

const std::array<Table1Case, 5>& table1_cases();

// Table I wording for a model: "Not detectable", "Ergodic with h(1)=h(3)",
// "Ergodic with h(1)≠h(3)", "Observable" or "Non-ergodic but detectable".
std::string table1_property(const FiniteHmm& model, const StructureReport& report);

struct Table1Options {
  std::uint64_t seed = 1;
  std::size_t n_paths = 500;
  double horizon = 10.0;
  double dt = 0.005;
  std::size_t workers = 0;
  FilterScheme scheme = FilterScheme::ZakaiSplit;
};

ExperimentConfig table1_config(const Table1Case& c, const Table1Options& options);

struct Table1Row {
  Table1Case spec;
  std::string verdict;
  StructureReport structure;
  DivergenceCurve curve;
  RateFit fit;
};

std::vector<Table1Row> reproduce_table1(const Table1Options& options);

struct ToleranceCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Table1Tolerances {
  double zero_rate_abs = 0.02;
  double relative = 0.35;
};

// quick == true widens both tolerances (zero-rate 0.04, relative 0.5).
Table1Tolerances table1_tolerances(bool quick);

// Verdict match, zero-rate row, positivity, relative error and strict ordering.
std::vector<ToleranceCheck> check_table1(const std::vector<Table1Row>& rows, const Table1Tolerances& tol);

}  // namespace wonham
