#include "wonham/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "wonham/errors.hpp"

namespace wonham {

namespace {

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
  fail(ErrorCode::ConfigError, "field '" + where + "': " + what);
}

std::string join(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

double as_number(const Json& j, const std::string& where) {
  if (!j.is_number()) config_error(where, "expected a number, got " + std::string(j.type_name()));
  const double v = j.get<double>();
  if (!std::isfinite(v)) config_error(where, "expected a finite number");
  return v;
}

std::uint64_t as_count(const Json& j, const std::string& where) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) config_error(where, "expected a non-negative integer");
  config_error(where, "expected a non-negative integer, got " + std::string(j.type_name()));
}

const Json* find(const Json& obj, const std::string& key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

void require_object(const Json& j, const std::string& where) {
  if (!j.is_object()) config_error(where.empty() ? "<root>" : where, "expected an object");
}

// Rejects keys outside `allowed` so a typo does not silently fall back to a default.
void check_keys(const Json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; });
    if (!ok) config_error(join(where, it.key()), "unknown key");
  }
}

Vector parse_vector(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) config_error(where, "expected a non-empty array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = as_number(j[i], where + "[" + std::to_string(i) + "]");
  }
  return v;
}

Matrix parse_matrix(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) config_error(where, "expected a non-empty array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string row_where = where + "[" + std::to_string(i) + "]";
    if (!j[i].is_array() || j[i].empty()) config_error(row_where, "expected a non-empty array of numbers");
    if (i == 0) cols = j[i].size();
    if (j[i].size() != cols) {
      config_error(row_where, "row has " + std::to_string(j[i].size()) + " entries, expected " + std::to_string(cols));
    }
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    m.row(static_cast<Eigen::Index>(i)) = parse_vector(j[i], where + "[" + std::to_string(i) + "]").transpose();
  }
  return m;
}

int parse_preset_h(const Json& j, const std::string& where) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "h1") return 1;
    if (s == "h2") return 2;
    if (s == "h3") return 3;
  } else if (j.is_number_integer()) {
    const int k = j.get<int>();
    if (k >= 1 && k <= 3) return k;
  }
  config_error(where, "expected one of \"h1\", \"h2\", \"h3\"");
}

bool is_preset(const Json& model) { return model.is_object() && model.contains("preset"); }

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col > 1 ? col - 1 : 1};
}

double number_or(const Json& obj, const char* key, const std::string& where, double fallback) {
  const Json* j = find(obj, key);
  return j ? as_number(*j, join(where, key)) : fallback;
}

std::uint64_t count_or(const Json& obj, const char* key, const std::string& where, std::uint64_t fallback) {
  const Json* j = find(obj, key);
  return j ? as_count(*j, join(where, key)) : fallback;
}

SamplingPrior parse_sampling(const Json& j, const std::string& where) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "mu") return SamplingPrior::Mu;
    if (s == "nu") return SamplingPrior::Nu;
  }
  config_error(where, "expected \"mu\" or \"nu\"");
}

FitWindow parse_window(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) config_error(where, "expected [lo, hi]");
  const FitWindow w{as_number(j[0], where + "[0]"), as_number(j[1], where + "[1]")};
  if (!(w.lo < w.hi)) config_error(where, "expected lo < hi");
  return w;
}

// Priors: explicit arrays, or the example priors when the model is a preset.
Simplex prior_or_default(const Json& obj, const Json* fallback_obj, const char* key, const std::string& where,
                         bool preset, Simplex (*preset_prior)()) {
  if (const Json* j = find(obj, key)) return parse_simplex(*j, join(where, key));
  if (fallback_obj != nullptr) {
    if (const Json* j = find(*fallback_obj, key)) return parse_simplex(*j, key);
  }
  if (preset) return preset_prior();
  config_error(join(where, key), "required unless the model is a preset");
}

}  // namespace

Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    std::ostringstream msg;
    msg << source << ":" << line << ":" << col << ": JSON syntax error";
    const std::string what = e.what();
    const auto pos = what.find("syntax error");
    if (pos != std::string::npos) msg << " (" << what.substr(pos) << ")";
    fail(ErrorCode::ConfigError, msg.str());
  }
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ConfigError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_json_text(buf.str(), path);
}

Simplex parse_simplex(const Json& j, const std::string& where) {
  const Vector v = parse_vector(j, where);
  try {
    return Simplex(v);
  } catch (const Error& e) {
    config_error(where, e.what());
  }
}

FilterScheme parse_scheme(const Json& j, const std::string& where) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "zakai_split") return FilterScheme::ZakaiSplit;
    if (s == "ks_euler") return FilterScheme::KsEuler;
  }
  config_error(where, "expected \"zakai_split\" or \"ks_euler\"");
}

FiniteHmm parse_model(const Json& j, const std::string& where) {
  require_object(j, where);
  if (const Json* preset = find(j, "preset")) {
    check_keys(j, where, {"preset"});
    const std::string pw = join(where, "preset");
    require_object(*preset, pw);
    check_keys(*preset, pw, {"epsilon", "h"});
    const Json* eps = find(*preset, "epsilon");
    const Json* h = find(*preset, "h");
    if (eps == nullptr) config_error(join(pw, "epsilon"), "missing");
    if (h == nullptr) config_error(join(pw, "h"), "missing");
    const double e = as_number(*eps, join(pw, "epsilon"));
    if (e < 0.0) config_error(join(pw, "epsilon"), "must be non-negative");
    return table1_model(e, parse_preset_h(*h, join(pw, "h")));
  }
  check_keys(j, where, {"A", "H", "h"});
  const Json* a = find(j, "A");
  if (a == nullptr) config_error(join(where, "A"), "missing rate matrix");
  const Matrix rates = parse_matrix(*a, join(where, "A"));
  Matrix obs;
  if (const Json* big_h = find(j, "H")) {
    if (find(j, "h") != nullptr) config_error(join(where, "h"), "give either H or h, not both");
    obs = parse_matrix(*big_h, join(where, "H"));
  } else if (const Json* h = find(j, "h")) {
    obs = parse_vector(*h, join(where, "h"));
  } else {
    config_error(join(where, "H"), "missing observation matrix");
  }
  // Generator invariants keep their own error codes (RowSumNonZero, ...).
  return FiniteHmm(rates, obs);
}

FiniteHmm parse_model_file(const Json& doc) {
  require_object(doc, "");
  if (const Json* m = find(doc, "model")) return parse_model(*m, "model");
  return parse_model(doc, "");
}

std::vector<ExperimentConfig> parse_divergence_config(const Json& doc) {
  require_object(doc, "");
  check_keys(doc, "",
             {"T", "dt", "n_paths", "seed", "scheme", "sampling_prior", "fit_window", "mu", "nu", "model", "cases",
              "label"});
  const double horizon = number_or(doc, "T", "", 10.0);
  const double dt = number_or(doc, "dt", "", 0.005);
  const std::size_t n_paths = count_or(doc, "n_paths", "", 500);
  const std::uint64_t seed = count_or(doc, "seed", "", 1);
  const FilterScheme scheme = find(doc, "scheme") ? parse_scheme(doc["scheme"], "scheme") : FilterScheme::ZakaiSplit;
  const SamplingPrior sampling =
      find(doc, "sampling_prior") ? parse_sampling(doc["sampling_prior"], "sampling_prior") : SamplingPrior::Mu;
  std::optional<FitWindow> window;
  if (const Json* w = find(doc, "fit_window")) window = parse_window(*w, "fit_window");

  std::vector<std::pair<const Json*, std::string>> cases;
  if (const Json* list = find(doc, "cases")) {
    if (find(doc, "model") != nullptr) config_error("model", "give either model or cases, not both");
    if (!list->is_array() || list->empty()) config_error("cases", "expected a non-empty array");
    for (std::size_t i = 0; i < list->size(); ++i) cases.emplace_back(&(*list)[i], "cases[" + std::to_string(i) + "]");
  } else {
    if (find(doc, "model") == nullptr) config_error("model", "missing (or give cases)");
    cases.emplace_back(&doc, "");
  }

  std::vector<ExperimentConfig> out;
  for (const auto& [c, where] : cases) {
    require_object(*c, where);
    if (c != &doc) check_keys(*c, where, {"label", "model", "mu", "nu", "sampling_prior", "fit_window"});
    const Json* m = find(*c, "model");
    if (m == nullptr) config_error(join(where, "model"), "missing");
    const bool preset = is_preset(*m);
    const Json* fallback = c == &doc ? nullptr : &doc;
    std::string label;
    if (const Json* l = find(*c, "label")) {
      if (!l->is_string()) config_error(join(where, "label"), "expected a string");
      label = l->get<std::string>();
    } else {
      label = "case" + std::to_string(out.size() + 1);
    }
    std::optional<FitWindow> case_window = window;
    if (c != &doc) {
      if (const Json* w = find(*c, "fit_window")) case_window = parse_window(*w, join(where, "fit_window"));
    }
    ExperimentConfig config{
        .label = label,
        .model = parse_model(*m, join(where, "model")),
        .mu = prior_or_default(*c, fallback, "mu", where, preset, &table1_mu),
        .nu = prior_or_default(*c, fallback, "nu", where, preset, &table1_nu),
        .sampling = (c != &doc && find(*c, "sampling_prior"))
                        ? parse_sampling((*c)["sampling_prior"], join(where, "sampling_prior"))
                        : sampling,
        .custom_prior = std::nullopt,
        .horizon = horizon,
        .dt = dt,
        .n_paths = n_paths,
        .seed = seed,
        .fit_window = case_window,
        .scheme = scheme,
        .workers = 0,
    };
    config.validate();
    out.push_back(std::move(config));
  }
  return out;
}

BackwardConfig parse_backward_config(const Json& doc) {
  require_object(doc, "");
  check_keys(doc, "",
             {"model", "mu", "nu", "witness_prior", "T", "dt", "n_paths", "seed", "scheme", "nested",
              "variance_decay"});
  const Json* m = find(doc, "model");
  if (m == nullptr) config_error("model", "missing");
  FiniteHmm model = parse_model(*m, "model");
  const bool preset = is_preset(*m);

  bool witness = false;
  if (const Json* w = find(doc, "witness_prior")) {
    if (!w->is_boolean()) config_error("witness_prior", "expected true or false");
    witness = w->get<bool>();
  }
  std::optional<std::pair<Simplex, Simplex>> priors;
  if (witness) {
    if (find(doc, "mu") || find(doc, "nu")) config_error("witness_prior", "cannot be combined with mu or nu");
    priors = witness_priors(undetectable_witness(model));
  } else {
    priors.emplace(prior_or_default(doc, nullptr, "mu", "", preset, &table1_mu),
                   prior_or_default(doc, nullptr, "nu", "", preset, &table1_nu));
  }
  if (priors->first.size() != model.dim() || priors->second.size() != model.dim()) {
    config_error("mu", "prior length differs from the state count " + std::to_string(model.dim()));
  }

  NestedMcSpec nested;
  bool run_nested = false;
  if (const Json* n = find(doc, "nested")) {
    require_object(*n, "nested");
    check_keys(*n, "nested", {"outer", "inner", "checkpoints", "budget"});
    run_nested = true;
    nested.outer_paths = count_or(*n, "outer", "nested", nested.outer_paths);
    nested.inner_paths = count_or(*n, "inner", "nested", nested.inner_paths);
    nested.budget = number_or(*n, "budget", "nested", nested.budget);
    if (const Json* c = find(*n, "checkpoints")) {
      const Vector v = parse_vector(*c, "nested.checkpoints");
      nested.checkpoint_times.assign(v.data(), v.data() + v.size());
    }
    if (nested.outer_paths == 0) config_error("nested.outer", "must be at least 1");
    if (nested.inner_paths == 0) config_error("nested.inner", "must be at least 1");
  }

  std::vector<double> decay{1.0, 4.0};
  if (const Json* d = find(doc, "variance_decay")) {
    if (d->is_null()) {
      decay.clear();
    } else {
      if (!d->is_array() || d->size() != 2) config_error("variance_decay", "expected [T_short, T_long] or null");
      decay = {as_number((*d)[0], "variance_decay[0]"), as_number((*d)[1], "variance_decay[1]")};
      if (!(0.0 < decay[0] && decay[0] < decay[1])) config_error("variance_decay", "expected 0 < T_short < T_long");
    }
  }

  BackwardConfig config{
      .model = std::move(model),
      .mu = priors->first,
      .nu = priors->second,
      .witness_prior = witness,
      .horizon = number_or(doc, "T", "", 3.0),
      .dt = number_or(doc, "dt", "", 0.005),
      .n_paths = count_or(doc, "n_paths", "", 200),
      .seed = count_or(doc, "seed", "", 1),
      .scheme = find(doc, "scheme") ? parse_scheme(doc["scheme"], "scheme") : FilterScheme::ZakaiSplit,
      .run_nested = run_nested,
      .nested = nested,
      .decay_horizons = decay,
  };
  if (config.n_paths == 0) config_error("n_paths", "must be at least 1");
  try {
    (void)TimeGrid::make(config.horizon, config.dt);
    for (double t : config.decay_horizons) (void)TimeGrid::make(t, config.dt);
    require_absolutely_continuous(config.mu, config.nu);
  } catch (const Error& e) {
    fail(ErrorCode::ConfigError, e.what());
  }
  return config;
}

}  // namespace wonham
