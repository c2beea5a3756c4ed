#include "wonham/stability.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "wonham/errors.hpp"
#include "wonham/parallel.hpp"

namespace wonham {

// ---------------------------------------------------------------- chi-square

double chi_square(const Vector& p, const Vector& q, double floor) {
  if (p.size() != q.size()) fail(ErrorCode::DimensionMismatch, "chi_square arguments differ in length");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (q(i) < floor) {
      if (p(i) > floor) {
        std::ostringstream msg;
        msg << "p(" << i << ") = " << p(i) << " where q(" << i << ") = " << q(i);
        fail(ErrorCode::AbsoluteContinuityViolated, msg.str());
      }
      continue;
    }
    const double r = p(i) - q(i);
    sum += r * r / q(i);
  }
  return sum;
}

double chi_square(const Simplex& p, const Simplex& q, double floor) {
  return chi_square(p.weights(), q.weights(), floor);
}

FlooredChiSquare chi_square_floored(const Vector& p, const Vector& q, double floor) {
  FlooredChiSquare out;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (q(i) < floor) {
      if (p(i) > 0.0) ++out.floor_hits;
      continue;
    }
    const double r = p(i) - q(i);
    sum += r * r / q(i);
  }
  out.value = sum;
  return out;
}

// ---------------------------------------------------------------- rate fits

RateFit fit_rate(const DivergenceCurve& curve, FitWindow window) {
  if (!(window.lo < window.hi) || curve.times.empty() || window.hi < curve.times.front() ||
      window.lo > curve.times.back()) {
    std::ostringstream msg;
    msg << "window [" << window.lo << ", " << window.hi << "] does not overlap the curve";
    fail(ErrorCode::WindowEmpty, msg.str());
  }
  RateFit out;
  out.window = window;
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  std::vector<std::pair<double, double>> points;
  // Grid times carry rounding error; allow a relative slack on the bounds.
  const double slack = 1e-9 * std::max(1.0, std::abs(window.hi));
  for (std::size_t k = 0; k < curve.times.size(); ++k) {
    const double t = curve.times[k];
    if (t < window.lo - slack || t > window.hi + slack) continue;
    if (!(curve.mean_chi2[k] >= kFitNoiseFloor)) {
      ++out.n_dropped;
      continue;
    }
    const double y = std::log(curve.mean_chi2[k]);
    points.emplace_back(t, y);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
  }
  out.n_points = points.size();
  if (points.size() < 2) fail(ErrorCode::WindowEmpty, "fewer than two usable points in the fit window");
  const double n = static_cast<double>(points.size());
  const double t_mean = st / n;
  const double y_mean = sy / n;
  const double stt_c = stt - n * t_mean * t_mean;
  const double sty_c = sty - n * t_mean * y_mean;
  const double slope = sty_c / stt_c;
  out.rate = -slope;
  out.intercept = y_mean - slope * t_mean;
  double ss_res = 0.0, ss_tot = 0.0;
  for (const auto& [t, y] : points) {
    const double fitted = out.intercept + slope * t;
    ss_res += (y - fitted) * (y - fitted);
    ss_tot += (y - y_mean) * (y - y_mean);
  }
  out.r_squared = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
  return out;
}

RateFit fit_rate_auto(const DivergenceCurve& curve) {
  if (curve.times.empty()) fail(ErrorCode::WindowEmpty, "empty curve");
  const double t_end = curve.times.back();
  const double half = 0.5 * t_end;
  double lo = std::min(half, 1.0);
  try {
    const double guess = fit_rate(curve, {half, t_end}).rate;
    lo = guess > 0.0 ? std::min(half, std::max(1.0, 2.0 / guess)) : std::min(half, 1.0);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::WindowEmpty) throw;
  }
  return fit_rate(curve, {lo, t_end});
}

// ---------------------------------------------------------------- curves

const Simplex& ExperimentConfig::sampling_prior() const {
  switch (sampling) {
    case SamplingPrior::Mu: return mu;
    case SamplingPrior::Nu: return nu;
    case SamplingPrior::Custom:
      if (!custom_prior) fail(ErrorCode::ConfigError, "custom sampling prior requested but not given");
      return *custom_prior;
  }
  return mu;
}

void ExperimentConfig::validate() const {
  auto bad = [&](const std::string& what) { fail(ErrorCode::ConfigError, label + ": " + what); };
  if (n_paths == 0) bad("n_paths must be at least 1");
  if (mu.size() != model.dim() || nu.size() != model.dim()) bad("prior length differs from state count");
  if (sampling_prior().size() != model.dim()) bad("sampling prior length differs from state count");
  try {
    require_absolutely_continuous(mu, nu);
    TimeGrid::make(horizon, dt);
  } catch (const Error& e) {
    bad(e.what());
  }
}

DivergenceCurve mc_divergence_curve(const ExperimentConfig& config) {
  config.validate();
  const TimeGrid grid = TimeGrid::make(config.horizon, config.dt);
  const std::size_t n_times = grid.n_steps + 1;
  const std::size_t n = config.n_paths;

  std::vector<std::vector<double>> per_path(n);
  std::vector<std::size_t> hits(n, 0);
  parallel_for(n, config.workers, [&](std::size_t i) {
    try {
      RngStream rng(config.seed, {tag(StreamTag::Path), i});
      const PathBundle b = run_twin_filters(config.model, config.mu, config.nu, grid, config.sampling_prior(), rng,
                                            config.scheme);
      std::vector<double>& chi = per_path[i];
      chi.resize(n_times);
      for (std::size_t k = 0; k < n_times; ++k) {
        const auto r = static_cast<Eigen::Index>(k);
        const FlooredChiSquare c = chi_square_floored(b.pi_mu.row(r).transpose(), b.pi_nu.row(r).transpose());
        chi[k] = c.value;
        hits[i] += c.floor_hits;
      }
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << "path " << i << ": " << e.what();
      throw Error(e.code(), msg.str());
    }
  });

  DivergenceCurve curve;
  curve.n_paths = n;
  curve.times.resize(n_times);
  curve.mean_chi2.assign(n_times, 0.0);
  curve.std_error.assign(n_times, 0.0);
  for (std::size_t k = 0; k < n_times; ++k) curve.times[k] = grid.time(k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n_times; ++k) curve.mean_chi2[k] += per_path[i][k];
    curve.floor_hits += hits[i];
  }
  const double nd = static_cast<double>(n);
  for (std::size_t k = 0; k < n_times; ++k) curve.mean_chi2[k] /= nd;
  if (n > 1) {
    for (std::size_t k = 0; k < n_times; ++k) {
      double ss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double dev = per_path[i][k] - curve.mean_chi2[k];
        ss += dev * dev;
      }
      curve.std_error[k] = std::sqrt(ss / (nd - 1.0) / nd);
    }
  }
  return curve;
}

void write_curve_csv(std::ostream& out, const DivergenceCurve& curve) {
  const auto old_precision = out.precision(17);
  out << "t,mean_chi2,stderr,n_paths,floor_hits\n";
  for (std::size_t k = 0; k < curve.times.size(); ++k) {
    out << curve.times[k] << ',' << curve.mean_chi2[k] << ',' << curve.std_error[k] << ',' << curve.n_paths << ','
        << curve.floor_hits << '\n';
  }
  out.precision(old_precision);
}

// ---------------------------------------------------------------- Table I

Matrix table1_rates(double epsilon) {
  Matrix a(4, 4);
  a << -1, 1, 0, 0,
        2, -2, 0, 0,
        0, 0, -1, 1,
        0, 0, 2, -2;
  Matrix coupling(4, 4);
  coupling << 0, 0, 0, 0,
              0, -1, 1, 0,
              0, 1, -1, 0,
              0, 0, 0, 0;
  return a + epsilon * coupling;
}

Vector table1_observation(int which) {
  Vector h(4);
  switch (which) {
    case 1: h << 2, 0, 2, 0; break;
    case 2: h << 2, 0, 0, 0; break;
    case 3: h << 2, 0, -2, 0; break;
    default: fail(ErrorCode::InvalidArgument, "observation function index must be 1, 2 or 3");
  }
  return h;
}

FiniteHmm table1_model(double epsilon, int which) {
  return FiniteHmm(table1_rates(epsilon), Matrix(table1_observation(which)));
}

Simplex table1_mu() { return Simplex((Vector(4) << 0.25, 0.40, 0.30, 0.05).finished()); }

Simplex table1_nu() { return Simplex((Vector(4) << 0.1, 0.2, 0.3, 0.4).finished()); }

const std::array<Table1Case, 5>& table1_cases() {
  static const std::array<Table1Case, 5> cases{{
      {0.0, 1, "h1", "Not detectable", 0.0},
      {0.0, 2, "h2", "Non-ergodic but detectable", 0.075},
      {0.0, 3, "h3", "Observable", 0.155},
      {0.1, 1, "h1", "Ergodic with h(1)=h(3)", 0.196},
      {0.1, 3, "h3", "Ergodic with h(1)≠h(3)", 0.412},
  }};
  return cases;
}

std::string table1_property(const FiniteHmm& model, const StructureReport& report) {
  if (!report.is_detectable) return "Not detectable";
  if (report.is_ergodic) {
    if (model.dim() < 3) return "Ergodic";
    const Matrix& h = model.observation();
    const bool same = (h.row(0) - h.row(2)).cwiseAbs().maxCoeff() <= kZeroTol;
    return same ? "Ergodic with h(1)=h(3)" : "Ergodic with h(1)≠h(3)";
  }
  if (report.is_observable) return "Observable";
  return "Non-ergodic but detectable";
}

ExperimentConfig table1_config(const Table1Case& c, const Table1Options& options) {
  std::ostringstream label;
  label << "eps=" << c.epsilon << "," << c.h_name;
  ExperimentConfig config{
      .label = label.str(),
      .model = table1_model(c.epsilon, c.h_index),
      .mu = table1_mu(),
      .nu = table1_nu(),
  };
  config.horizon = options.horizon;
  config.dt = options.dt;
  config.n_paths = options.n_paths;
  config.seed = options.seed;
  config.scheme = options.scheme;
  config.workers = options.workers;
  return config;
}

std::vector<Table1Row> reproduce_table1(const Table1Options& options) {
  std::vector<Table1Row> rows;
  for (const Table1Case& c : table1_cases()) {
    const ExperimentConfig config = table1_config(c, options);
    Table1Row row{.spec = c};
    row.structure = analyze_structure(config.model);
    row.verdict = table1_property(config.model, row.structure);
    row.curve = mc_divergence_curve(config);
    row.fit = fit_rate_auto(row.curve);
    rows.push_back(std::move(row));
  }
  return rows;
}

Table1Tolerances table1_tolerances(bool quick) {
  return quick ? Table1Tolerances{0.04, 0.5} : Table1Tolerances{0.02, 0.35};
}

std::vector<ToleranceCheck> check_table1(const std::vector<Table1Row>& rows, const Table1Tolerances& tol) {
  std::vector<ToleranceCheck> out;
  auto fmt = [](double v) {
    std::ostringstream s;
    s.precision(3);
    s << std::fixed << v;
    return s.str();
  };
  for (const Table1Row& row : rows) {
    const std::string name = "eps=" + fmt(row.spec.epsilon) + "," + row.spec.h_name;
    out.push_back({name + " verdict", row.verdict == row.spec.reference_property,
                   "got '" + row.verdict + "', expected '" + row.spec.reference_property + "'"});
    if (row.spec.reference_rate == 0.0) {
      out.push_back({name + " rate", std::abs(row.fit.rate) < tol.zero_rate_abs,
                     "|" + fmt(row.fit.rate) + "| < " + fmt(tol.zero_rate_abs)});
    } else {
      const double rel = std::abs(row.fit.rate - row.spec.reference_rate) / row.spec.reference_rate;
      out.push_back({name + " rate", row.fit.rate > 0.0 && rel <= tol.relative,
                     fmt(row.fit.rate) + " vs " + fmt(row.spec.reference_rate) + " (rel. error " + fmt(rel) + ", limit " +
                         fmt(tol.relative) + ")"});
    }
  }
  // Reference ordering of the positive rates, row-wise.
  std::vector<const Table1Row*> positive;
  for (const Table1Row& row : rows) {
    if (row.spec.reference_rate > 0.0) positive.push_back(&row);
  }
  std::sort(positive.begin(), positive.end(),
            [](const Table1Row* a, const Table1Row* b) { return a->spec.reference_rate < b->spec.reference_rate; });
  bool ordered = true;
  std::string detail;
  for (std::size_t i = 0; i < positive.size(); ++i) {
    if (i > 0) {
      detail += " < ";
      if (!(positive[i - 1]->fit.rate < positive[i]->fit.rate)) ordered = false;
    }
    detail += fmt(positive[i]->fit.rate);
  }
  out.push_back({"rate ordering", ordered, detail});
  return out;
}

}  // namespace wonham
