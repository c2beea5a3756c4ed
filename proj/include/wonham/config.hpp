#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "wonham/backward.hpp"
#include "wonham/stability.hpp"

namespace wonham {

using Json = nlohmann::json;

// Reads and parses a JSON file. Syntax errors come back as ConfigError with the
// file name, line and column.
Json load_json_file(const std::string& path);
Json parse_json_text(const std::string& text, const std::string& source = "<string>");

// Model object, either {"preset": {"epsilon": e, "h": "h1"}} for the
// four-state example family, or {"A": [[...]], "H": [[...]]} with "h": [...]
// accepted for a single observation channel. `where` names the enclosing
// field in diagnostics.
FiniteHmm parse_model(const Json& j, const std::string& where = "model");

// A model file may hold the model object directly or under "model".
FiniteHmm parse_model_file(const Json& doc);

Simplex parse_simplex(const Json& j, const std::string& where);
FilterScheme parse_scheme(const Json& j, const std::string& where);

// Top-level keys (T, dt, n_paths, seed, scheme, sampling_prior, fit_window)
// apply to every case; a case may override mu, nu, sampling_prior and
// fit_window. Without "cases" the document is a single case with "model".
std::vector<ExperimentConfig> parse_divergence_config(const Json& doc);

struct BackwardConfig {
  FiniteHmm model;
  Simplex mu;
  Simplex nu;
  bool witness_prior = false;
  double horizon = 3.0;
  double dt = 0.005;
  std::size_t n_paths = 200;
  std::uint64_t seed = 1;
  FilterScheme scheme = FilterScheme::ZakaiSplit;
  bool run_nested = false;
  NestedMcSpec nested;
  std::vector<double> decay_horizons{1.0, 4.0};  // empty skips the decay comparison
};

BackwardConfig parse_backward_config(const Json& doc);

}  // namespace wonham
