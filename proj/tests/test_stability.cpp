#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "wonham/stability.hpp"

using namespace wonham;

namespace {

DivergenceCurve synthetic_curve(double rate, double amplitude, double horizon, double dt) {
  DivergenceCurve c;
  const auto n = static_cast<std::size_t>(std::lround(horizon / dt));
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * dt;
    c.times.push_back(t);
    c.mean_chi2.push_back(amplitude * std::exp(-rate * t));
    c.std_error.push_back(0.0);
  }
  c.n_paths = 1;
  return c;
}

}  // namespace

TEST_CASE("chi-square of the example priors") {
  CHECK(chi_square(table1_mu(), table1_nu()) == doctest::Approx(0.73125).epsilon(1e-14));
  CHECK(chi_square(table1_nu(), table1_nu()) == 0.0);
  const Simplex p((Vector(2) << 0.5, 0.5).finished());
  const Simplex q((Vector(2) << 1.0, 0.0).finished());
  CHECK_THROWS_CODE(chi_square(p, q), ErrorCode::AbsoluteContinuityViolated);
  CHECK(chi_square(q, p) == doctest::Approx(1.0));
}

TEST_CASE("chi-square matches the direct sum on random pairs") {
  std::mt19937_64 gen(21);
  for (int rep = 0; rep < 500; ++rep) {
    const int d = 2 + rep % 7;
    const Vector p = testkit::random_simplex(gen, d);
    const Vector q = testkit::random_simplex(gen, d, 1e-3);
    double brute = 0.0;
    for (int i = 0; i < d; ++i) brute += (p(i) / q(i) - 1.0) * (p(i) / q(i) - 1.0) * q(i);
    CHECK(std::abs(chi_square(Simplex::normalized(p), Simplex::normalized(q)) - brute) <= 1e-12 * std::max(1.0, brute));
  }
}

TEST_CASE("floored chi-square counts dropped states") {
  const FlooredChiSquare f = chi_square_floored((Vector(2) << 0.9, 0.1).finished(), (Vector(2) << 1.0, 0.0).finished());
  CHECK(f.floor_hits == 1);
  CHECK(f.value >= 0.0);
}

TEST_CASE("rate fit recovers an exact exponential") {
  const DivergenceCurve c = synthetic_curve(0.3, 2.0, 10.0, 0.01);
  const RateFit fit = fit_rate(c, {1.0, 10.0});
  CHECK(fit.rate == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(fit.intercept == doctest::Approx(std::log(2.0)).epsilon(1e-10));
  CHECK(fit.r_squared == doctest::Approx(1.0));
  CHECK(fit.n_points == 901);
  CHECK_THROWS_CODE(fit_rate(c, {20.0, 30.0}), ErrorCode::WindowEmpty);
}

TEST_CASE("automatic fit window") {
  // Fast decay: lower end stays at 1.
  CHECK(fit_rate_auto(synthetic_curve(2.5, 1.0, 10.0, 0.01)).window.lo == doctest::Approx(1.0));
  // Slow decay: lower end 2 / rate, capped at T / 2.
  CHECK(fit_rate_auto(synthetic_curve(0.5, 1.0, 10.0, 0.01)).window.lo == doctest::Approx(4.0));
  CHECK(fit_rate_auto(synthetic_curve(0.1, 1.0, 10.0, 0.01)).window.lo == doctest::Approx(5.0));
  // Points under the noise floor are dropped.
  const RateFit fit = fit_rate(synthetic_curve(5.0, 1.0, 10.0, 0.01), {1.0, 10.0});
  CHECK(fit.n_dropped > 0);
  CHECK(fit.rate == doctest::Approx(5.0).epsilon(1e-8));
}

TEST_CASE("divergence curve: identical priors give a flat zero curve") {
  ExperimentConfig config{.label = "same", .model = table1_model(0.1, 3), .mu = table1_nu(), .nu = table1_nu()};
  config.horizon = 1.0;
  config.n_paths = 20;
  const DivergenceCurve c = mc_divergence_curve(config);
  for (double v : c.mean_chi2) CHECK(v < 1e-20);
}

TEST_CASE("divergence curve starts at chi2(mu|nu) and does not depend on the worker count") {
  ExperimentConfig config{.label = "x", .model = table1_model(0.0, 2), .mu = table1_mu(), .nu = table1_nu()};
  config.horizon = 1.0;
  config.n_paths = 40;
  config.workers = 1;
  const DivergenceCurve a = mc_divergence_curve(config);
  config.workers = 3;
  const DivergenceCurve b = mc_divergence_curve(config);
  CHECK(a.mean_chi2 == b.mean_chi2);
  CHECK(a.std_error == b.std_error);
  CHECK(a.mean_chi2.front() == doctest::Approx(0.73125));
  std::ostringstream s;
  write_curve_csv(s, a);
  CHECK(s.str().rfind("t,mean_chi2,stderr,n_paths,floor_hits\n", 0) == 0);
}

TEST_CASE("config validation") {
  ExperimentConfig config{.label = "bad", .model = table1_model(0.1, 3), .mu = table1_mu(), .nu = table1_nu()};
  config.n_paths = 0;
  CHECK_THROWS_CODE(config.validate(), ErrorCode::ConfigError);
  config.n_paths = 1;
  config.nu = Simplex((Vector(4) << 0.5, 0.5, 0.0, 0.0).finished());
  CHECK_THROWS_CODE(config.validate(), ErrorCode::ConfigError);
  config.nu = table1_nu();
  config.sampling = SamplingPrior::Custom;
  CHECK_THROWS_CODE(config.validate(), ErrorCode::ConfigError);
}

TEST_CASE("reference cases") {
  const auto& cases = table1_cases();
  REQUIRE(cases.size() == 5);
  CHECK(cases[0].reference_rate == 0.0);
  CHECK(cases[4].reference_rate == doctest::Approx(0.412));
  CHECK(table1_observation(3)(2) == -2.0);
  const Matrix a = table1_rates(0.1);
  CHECK(a(1, 2) == doctest::Approx(0.1));
  CHECK(a(2, 1) == doctest::Approx(0.1));
  CHECK(a(1, 1) == doctest::Approx(-2.1));
}

TEST_CASE("tolerance checks on synthetic rows") {
  std::vector<Table1Row> rows;
  for (const Table1Case& c : table1_cases()) {
    Table1Row row{.spec = c};
    row.verdict = c.reference_property;
    row.fit.rate = c.reference_rate * 1.1;
    rows.push_back(row);
  }
  auto all_pass = [](const std::vector<ToleranceCheck>& checks) {
    for (const auto& c : checks) {
      if (!c.pass) return false;
    }
    return true;
  };
  CHECK(all_pass(check_table1(rows, table1_tolerances(false))));
  rows[2].fit.rate = 0.5;  // breaks magnitude and ordering
  const auto checks = check_table1(rows, table1_tolerances(false));
  CHECK_FALSE(all_pass(checks));
  CHECK_FALSE(checks.back().pass);
  CHECK(all_pass(check_table1(rows, Table1Tolerances{0.02, 10.0})) == false);  // ordering still broken
  rows[1].verdict = "Observable";
  CHECK_FALSE(check_table1(rows, table1_tolerances(true))[2].pass);
}
