#include "wonham/report.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "wonham/errors.hpp"

namespace wonham {

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json to_json(const Estimate& e) { return Json{{"value", e.value}, {"stderr", e.std_error}}; }

namespace {

Json subspace_json(const SubspaceBasis& s) {
  return Json{{"dim", s.dim()}, {"basis", to_json(s.basis)}, {"spectrum", s.spectrum}, {"tol", s.tol}};
}

}  // namespace

Json structure_json(const FiniteHmm& model, const StructureReport& report) {
  Json measures = Json::array();
  for (const Simplex& m : report.decomposition.class_measures) measures.push_back(to_json(m.weights()));
  return Json{
      {"dims", {{"states", model.dim()}, {"observations", model.obs_dim()}}},
      {"rates", to_json(model.rates())},
      {"observation", to_json(model.observation())},
      {"observable_space", subspace_json(report.observable_space)},
      {"null_space", subspace_json(report.null_space)},
      {"recurrent_classes", report.decomposition.recurrent_classes},
      {"transient_states", report.decomposition.transient_states},
      {"class_measures", measures},
      {"is_observable", report.is_observable},
      {"is_ergodic", report.is_ergodic},
      {"is_detectable", report.is_detectable},
      {"tol", report.observable_space.tol},
  };
}

std::string verdict_line(const StructureReport& report) {
  auto b = [](bool v) { return v ? "true" : "false"; };
  std::ostringstream s;
  s << "observable: " << b(report.is_observable) << ", ergodic: " << b(report.is_ergodic)
    << ", detectable: " << b(report.is_detectable);
  return s.str();
}

Json fit_json(const RateFit& fit) {
  return Json{{"rate", fit.rate},           {"intercept", fit.intercept}, {"window", {fit.window.lo, fit.window.hi}},
              {"r_squared", fit.r_squared}, {"n_points", fit.n_points},   {"n_dropped", fit.n_dropped}};
}

Json table1_json(const std::vector<Table1Row>& rows) {
  Json out = Json::array();
  for (const Table1Row& row : rows) {
    out.push_back(Json{
        {"epsilon", row.spec.epsilon},
        {"h_name", row.spec.h_name},
        {"verdict", row.verdict},
        {"rate", row.fit.rate},
        {"r_squared", row.fit.r_squared},
        {"reference_rate", row.spec.reference_rate},
        {"fit_window", {row.fit.window.lo, row.fit.window.hi}},
        {"floor_hits", row.curve.floor_hits},
    });
  }
  return out;
}

std::string table1_console(const std::vector<Table1Row>& rows) {
  std::ostringstream s;
  s << std::left << std::setw(6) << "eps" << std::setw(5) << "h" << std::setw(30) << "verdict" << std::setw(30)
    << "reference property" << std::right << std::setw(9) << "rate" << std::setw(10) << "ref rate" << std::setw(8)
    << "R^2" << '\n';
  for (const Table1Row& row : rows) {
    std::ostringstream eps;
    eps << row.spec.epsilon;
    // setw counts bytes; pad the UTF-8 "≠" (3 bytes, 1 column) by hand.
    auto pad = [](const std::string& text, std::size_t width) {
      std::size_t cols = 0;
      for (unsigned char ch : text) cols += (ch & 0xC0) != 0x80;
      return text + std::string(cols < width ? width - cols : 1, ' ');
    };
    s << std::left << std::setw(6) << eps.str() << std::setw(5) << row.spec.h_name << pad(row.verdict, 30)
      << pad(row.spec.reference_property, 30) << std::right << std::fixed << std::setprecision(4) << std::setw(9)
      << row.fit.rate << std::setw(10) << std::setprecision(3) << row.spec.reference_rate << std::setw(8)
      << std::setprecision(3) << row.fit.r_squared << std::defaultfloat << '\n';
  }
  return s.str();
}

// ---------------------------------------------------------------- backward

bool BackwardReport::all_pass() const {
  const bool normalized = std::abs(nu_y0.value - 1.0) <= 3.0 * nu_y0.std_error + 1e-12;
  return normalized && jensen.pass && identity.z_score <= 3.0 && cauchy_schwarz.pass && monotone.value_or(true);
}

BackwardReport run_backward(const BackwardConfig& config, std::size_t workers) {
  const TimeGrid grid = TimeGrid::make(config.horizon, config.dt);
  const McOptions opts{config.seed, workers, config.scheme};
  BackwardReport r{
      .y0 = estimate_y0(config.model, config.mu, config.nu, grid, config.n_paths, opts),
  };
  r.nu_y0 = nu_mean_y0(r.y0, config.nu);
  r.var_y0 = variance_y0_estimate(r.y0, config.nu);
  r.var_gamma = terminal_variance(config.model, config.mu, config.nu, grid, config.n_paths, opts);
  r.expected_chi2 = expected_terminal_chi2(config.model, config.mu, config.nu, grid, config.n_paths, opts);
  r.prior_chi2 = chi_square(config.mu, config.nu);
  r.jensen = jensen_from(r.var_y0, r.var_gamma);
  r.identity = identity_from(r.expected_chi2, r.y0, config.mu);
  r.cauchy_schwarz = cauchy_schwarz_from(r.expected_chi2, r.var_y0, r.prior_chi2);

  if (config.run_nested) {
    r.nested = nested_Yt(config.model, config.mu, config.nu, grid, config.nested, opts);
    r.monotone = checkpoints_monotone(*r.nested);
    const auto& cps = r.nested->checkpoints;
    if (cps.size() >= 2 && cps.front().t == 0.0 && std::abs(cps.back().t - grid.horizon) <= 1e-9) {
      r.energy = integrated_energy(*r.nested);
    }
  }

  try {
    r.rate_bound = empirical_rate_bound(r.var_gamma, r.var_y0, grid.horizon);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::VarianceIndistinguishableFromZero) throw;
    r.rate_bound_note = e.what();
  }

  if (config.decay_horizons.size() == 2) {
    VarianceDecay d;
    d.t_short = config.decay_horizons[0];
    d.t_long = config.decay_horizons[1];
    auto var_at = [&](double t) {
      const TimeGrid g = TimeGrid::make(t, config.dt);
      return variance_y0_estimate(estimate_y0(config.model, config.mu, config.nu, g, config.n_paths, opts),
                                  config.nu);
    };
    d.var_short = var_at(d.t_short);
    d.var_long = var_at(d.t_long);
    const double se = std::sqrt(d.var_short.std_error * d.var_short.std_error +
                                d.var_long.std_error * d.var_long.std_error);
    d.decayed = d.var_long.value < d.var_short.value - 3.0 * se;
    r.decay = d;
  }
  return r;
}

Json backward_json(const BackwardReport& r) {
  Json out{
      {"y0", to_json(r.y0.y0)},
      {"stderr", to_json(r.y0.std_error)},
      {"horizon", r.y0.horizon},
      {"paths_per_state", r.y0.inner_paths},
      {"nu_y0", to_json(r.nu_y0)},
      {"var_y0", to_json(r.var_y0)},
      {"var_gammaT", to_json(r.var_gamma)},
      {"expected_chi2", to_json(r.expected_chi2)},
      {"prior_chi2", r.prior_chi2},
      {"identity_z", r.identity.z_score},
      {"identity", {{"lhs", to_json(r.identity.lhs)}, {"rhs", to_json(r.identity.rhs)}}},
      {"jensen_pass", r.jensen.pass},
      {"cauchy_schwarz",
       {{"lhs_squared", r.cauchy_schwarz.lhs_squared},
        {"bound", r.cauchy_schwarz.bound},
        {"relative_error", r.cauchy_schwarz.relative_error},
        {"pass", r.cauchy_schwarz.pass}}},
  };
  Json checkpoints = Json::array();
  if (r.nested) {
    for (const CheckpointVariance& c : r.nested->checkpoints) {
      checkpoints.push_back(
          Json{{"t", c.t}, {"var", c.variance.value}, {"stderr", c.variance.std_error}, {"raw_var", c.raw_variance}});
    }
    if (r.nested->y0_at_zero.size() > 0) {
      out["nested_y0"] = to_json(r.nested->y0_at_zero);
      out["nested_y0_stderr"] = to_json(r.nested->y0_at_zero_std_error);
    }
  }
  out["checkpoints"] = checkpoints;
  out["checkpoints_monotone"] = r.monotone ? Json(*r.monotone) : Json(nullptr);
  out["integrated_energy"] = r.energy ? to_json(*r.energy) : Json(nullptr);
  out["empirical_rate_bound"] = r.rate_bound ? to_json(*r.rate_bound) : Json(nullptr);
  if (!r.rate_bound) out["empirical_rate_bound_note"] = r.rate_bound_note;
  if (r.decay) {
    out["variance_decay"] = Json{{"t_short", r.decay->t_short},
                                 {"t_long", r.decay->t_long},
                                 {"var_short", to_json(r.decay->var_short)},
                                 {"var_long", to_json(r.decay->var_long)},
                                 {"decayed", r.decay->decayed}};
  } else {
    out["variance_decay"] = nullptr;
  }
  out["all_pass"] = r.all_pass();
  return out;
}

}  // namespace wonham
