#include "wonham/commands.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "wonham/config.hpp"
#include "wonham/manifest.hpp"
#include "wonham/report.hpp"
#include "wonham/svg.hpp"

namespace wonham {

namespace {

using Clock = std::chrono::steady_clock;

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ConfigError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string slug(const std::string& label) {
  std::string out;
  for (char c : label) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' || c == '-';
    out += keep ? c : '_';
  }
  return out.empty() ? "case" : out;
}

std::string curve_csv(const DivergenceCurve& curve) {
  std::ostringstream s;
  write_curve_csv(s, curve);
  return s.str();
}

void finish(OutputDir& dir, Clock::time_point start, std::ostream& out) {
  dir.manifest().wall_clock_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  out << "manifest: " << dir.write_manifest().string() << '\n';
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NegativeOffDiagonal:
    case ErrorCode::RowSumNonZero:
    case ErrorCode::NotInvariantMeasure:
    case ErrorCode::PriorNotAbsolutelyContinuous:
    case ErrorCode::ModelIsDetectable:
    case ErrorCode::ConfigError:
      return kExitConfig;
    case ErrorCode::DegenerateFilter:
    case ErrorCode::AbsoluteContinuityViolated:
    case ErrorCode::WindowEmpty:
    case ErrorCode::BudgetExceeded:
    case ErrorCode::VarianceIndistinguishableFromZero:
      return kExitNumerical;
  }
  return kExitNumerical;
}

int cmd_analyze(const std::string& model_path, const CommandOptions& options, std::ostream& out) {
  const auto start = Clock::now();
  const std::string bytes = read_bytes(model_path);
  const FiniteHmm model = parse_model_file(parse_json_text(bytes, model_path));
  const StructureReport report = analyze_structure(model);

  OutputDir dir(resolve_output_dir(options.out_dir));
  dir.manifest().command = "analyze";
  dir.manifest().config_hash = sha256_hex(bytes);
  const auto path = dir.write_output("structure.json", structure_json(model, report).dump(2) + "\n");
  out << verdict_line(report) << '\n';
  out << "report: " << path.string() << '\n';
  finish(dir, start, out);
  return kExitOk;
}

int cmd_divergence(const std::string& config_path, const CommandOptions& options, bool write_svg, std::ostream& out) {
  const auto start = Clock::now();
  const std::string bytes = read_bytes(config_path);
  std::vector<ExperimentConfig> cases = parse_divergence_config(parse_json_text(bytes, config_path));

  OutputDir dir(resolve_output_dir(options.out_dir));
  dir.manifest().command = "divergence";
  dir.manifest().config_hash = sha256_hex(bytes);
  dir.manifest().seed = cases.front().seed;

  Json summary = Json::array();
  std::vector<SvgSeries> series;
  for (ExperimentConfig& config : cases) {
    config.workers = options.workers;
    const DivergenceCurve curve = mc_divergence_curve(config);
    const std::string name = slug(config.label) + ".csv";
    dir.write_output(name, curve_csv(curve));

    Json entry{{"label", config.label}, {"csv", name}, {"n_paths", curve.n_paths}, {"floor_hits", curve.floor_hits}};
    double rate = 0.0;
    try {
      const RateFit fit = config.fit_window ? fit_rate(curve, *config.fit_window) : fit_rate_auto(curve);
      entry["fit"] = fit_json(fit);
      rate = fit.rate;
      out << config.label << ": rate " << fit.rate << " (R^2 " << fit.r_squared << ")\n";
    } catch (const Error& e) {
      // A curve at the noise floor everywhere (mu = nu) has nothing to fit.
      if (e.code() != ErrorCode::WindowEmpty) throw;
      entry["fit"] = nullptr;
      entry["fit_note"] = e.what();
      out << config.label << ": no fit (" << e.what() << ")\n";
    }
    summary.push_back(std::move(entry));
    series.push_back({config.label, curve.times, curve.mean_chi2, rate});
  }
  dir.write_output("divergence.json", summary.dump(2) + "\n");
  if (write_svg) dir.write_output("divergence.svg", render_log_plot(series, "chi-square divergence between twin filters"));
  finish(dir, start, out);
  return kExitOk;
}

int cmd_backward(const std::string& config_path, const CommandOptions& options, std::ostream& out) {
  const auto start = Clock::now();
  const std::string bytes = read_bytes(config_path);
  const BackwardConfig config = parse_backward_config(parse_json_text(bytes, config_path));
  const BackwardReport report = run_backward(config, options.workers);

  OutputDir dir(resolve_output_dir(options.out_dir));
  dir.manifest().command = "backward";
  dir.manifest().config_hash = sha256_hex(bytes);
  dir.manifest().seed = config.seed;
  const Json doc = backward_json(report);
  const auto path = dir.write_output("backward.json", doc.dump(2) + "\n");

  auto b = [](bool v) { return v ? "pass" : "FAIL"; };
  out << "nu(y0) = " << report.nu_y0.value << " +- " << report.nu_y0.std_error << '\n';
  out << "var(y0) = " << report.var_y0.value << " +- " << report.var_y0.std_error << ", var(gamma_T) = "
      << report.var_gamma.value << " +- " << report.var_gamma.std_error << '\n';
  out << "jensen: " << b(report.jensen.pass) << '\n';
  out << "identity z = " << report.identity.z_score << ": " << b(report.identity.z_score <= 3.0) << '\n';
  out << "cauchy-schwarz: " << b(report.cauchy_schwarz.pass) << '\n';
  if (report.monotone) out << "checkpoint monotonicity: " << b(*report.monotone) << '\n';
  if (report.energy) out << "integrated energy = " << report.energy->value << " +- " << report.energy->std_error << '\n';
  if (report.rate_bound) {
    out << "empirical rate bound = " << report.rate_bound->value << " +- " << report.rate_bound->std_error << '\n';
  } else {
    out << "empirical rate bound: n/a (" << report.rate_bound_note << ")\n";
  }
  if (report.decay) {
    out << "variance decay T=" << report.decay->t_short << " -> T=" << report.decay->t_long << ": "
        << (report.decay->decayed ? "decayed" : "no decay") << '\n';
  }
  out << "report: " << path.string() << '\n';
  finish(dir, start, out);
  return report.all_pass() ? kExitOk : kExitTolerance;
}

int cmd_reproduce_table1(const Table1Command& command, const CommandOptions& options, std::ostream& out,
                         std::ostream& err) {
  const auto start = Clock::now();
  Table1Options topt;
  topt.seed = command.seed;
  topt.workers = options.workers;
  if (command.quick) topt.n_paths = 100;
  if (command.n_paths) topt.n_paths = *command.n_paths;
  if (topt.n_paths == 0) fail(ErrorCode::ConfigError, "n_paths must be at least 1");
  if (command.quick) err << "warning: --quick runs " << topt.n_paths << " paths per case with widened tolerances\n";

  const std::vector<Table1Row> rows = reproduce_table1(topt);

  OutputDir dir(resolve_output_dir(options.out_dir));
  std::ostringstream canon;
  canon.precision(17);
  canon << "reproduce-table1 seed=" << topt.seed << " n_paths=" << topt.n_paths << " T=" << topt.horizon
        << " dt=" << topt.dt << " quick=" << command.quick;
  dir.manifest().command = canon.str();
  dir.manifest().config_hash = sha256_hex(canon.str());
  dir.manifest().seed = topt.seed;

  std::vector<SvgSeries> series;
  for (const Table1Row& row : rows) {
    std::ostringstream label;
    label << "eps=" << row.spec.epsilon << "," << row.spec.h_name;
    dir.write_output("curves/" + slug(label.str()) + ".csv", curve_csv(row.curve));
    series.push_back({label.str(), row.curve.times, row.curve.mean_chi2, row.fit.rate});
  }
  dir.write_output("table1.json", table1_json(rows).dump(2) + "\n");
  dir.write_output("figure1.svg", render_log_plot(series, "E chi^2(pi_t^mu | pi_t^nu), desk-scale reproduction"));

  out << table1_console(rows);
  const std::vector<ToleranceCheck> checks = check_table1(rows, table1_tolerances(command.quick));
  const ToleranceCheck* first_fail = nullptr;
  for (const ToleranceCheck& c : checks) {
    out << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    if (!c.pass && first_fail == nullptr) first_fail = &c;
  }
  finish(dir, start, out);
  if (first_fail != nullptr) {
    err << "tolerance failure: " << first_fail->name << " (" << first_fail->detail << ")\n";
    return kExitTolerance;
  }
  return kExitOk;
}

}  // namespace wonham
