#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wonham/backward.hpp"
#include "wonham/config.hpp"
#include "wonham/stability.hpp"
#include "wonham/structure.hpp"

namespace wonham {

// Matrices serialize row-major as arrays of rows.
Json to_json(const Matrix& m);
Json to_json(const Vector& v);
Json to_json(const Estimate& e);

// {dims, observable_space: {dim, basis, spectrum}, null_space: {...},
//  recurrent_classes, transient_states, class_measures, is_*, tol}
Json structure_json(const FiniteHmm& model, const StructureReport& report);

// One line: "observable: true, ergodic: false, detectable: true".
std::string verdict_line(const StructureReport& report);

Json fit_json(const RateFit& fit);

// Rows {epsilon, h_name, verdict, rate, r_squared, reference_rate}.
Json table1_json(const std::vector<Table1Row>& rows);

// Aligned console table with verdicts and rates beside the reference values.
std::string table1_console(const std::vector<Table1Row>& rows);

struct VarianceDecay {
  double t_short = 0.0;
  double t_long = 0.0;
  Estimate var_short;
  Estimate var_long;
  bool decayed = false;  // var_long < var_short beyond 3 combined errors
};

struct BackwardReport {
  BackwardMapEstimate y0;
  Estimate nu_y0;
  Estimate var_y0;
  Estimate var_gamma;
  Estimate expected_chi2;
  double prior_chi2 = 0.0;
  JensenResult jensen;
  IdentityResult identity;
  CauchySchwarzResult cauchy_schwarz;
  std::optional<NestedResult> nested;
  std::optional<Estimate> energy;
  std::optional<bool> monotone;
  std::optional<Estimate> rate_bound;
  std::string rate_bound_note;  // why rate_bound is absent
  std::optional<VarianceDecay> decay;

  // nu(y0) = 1, Jensen, identity (z <= 3), Cauchy-Schwarz, checkpoint monotonicity.
  bool all_pass() const;
};

// Runs every backward-map diagnostic declared by the config.
BackwardReport run_backward(const BackwardConfig& config, std::size_t workers = 0);

Json backward_json(const BackwardReport& report);

}  // namespace wonham
