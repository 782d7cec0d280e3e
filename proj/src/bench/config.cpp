#include "cdnn/bench/config.hpp"

#include "cdnn/error.hpp"
#include "cdnn/estimator/checkpoint.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>

namespace cdnn::bench {

using nlohmann::json;

std::string to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::cdnn_freezing: return "cdnn_freezing";
    case EstimatorKind::cdnn_explicit: return "cdnn_explicit";
    case EstimatorKind::ols_lr1: return "ols_lr1";
    case EstimatorKind::ols_lr2: return "ols_lr2";
    case EstimatorKind::dml: return "dml";
  }
  return "unknown";
}

EstimatorKind estimator_kind_from_string(const std::string& name) {
  for (auto k : {EstimatorKind::cdnn_freezing, EstimatorKind::cdnn_explicit, EstimatorKind::ols_lr1,
                 EstimatorKind::ols_lr2, EstimatorKind::dml})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown estimator '" + name + "'");
}

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items())
    if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::string law_name(data::CovariateLaw law) {
  return law == data::CovariateLaw::uniform ? "uniform" : "standard_normal";
}

data::CovariateLaw law_from_string(const std::string& s) {
  if (s == "standard_normal") return data::CovariateLaw::standard_normal;
  if (s == "uniform") return data::CovariateLaw::uniform;
  throw ConfigError("unknown covariate_law '" + s + "'");
}

json propensity_json(const data::PropensityForm& p) {
  if (p.kind == data::PropensityForm::Kind::constant)
    return {{"kind", "constant"}, {"probability", p.probability}};
  return {{"kind", "logistic_linear"}, {"weights", p.weights}, {"bias", p.bias}};
}

data::PropensityForm propensity_from_json(const json& j) {
  reject_unknown(j, {"kind", "probability", "weights", "bias"}, "propensity");
  data::PropensityForm p;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "constant") p.kind = data::PropensityForm::Kind::constant;
  else if (kind == "logistic_linear") p.kind = data::PropensityForm::Kind::logistic_linear;
  else throw ConfigError("unknown propensity kind '" + kind + "'");
  read(j, "probability", p.probability);
  read(j, "weights", p.weights);
  read(j, "bias", p.bias);
  return p;
}

const char* outcome_kind_name(data::OutcomeForm::Kind k) {
  switch (k) {
    case data::OutcomeForm::Kind::affine: return "affine";
    case data::OutcomeForm::Kind::quadratic: return "quadratic";
    case data::OutcomeForm::Kind::sigmoid_hetero: return "sigmoid_hetero";
  }
  return "affine";
}

json outcome_json(const data::OutcomeForm& o) {
  return {{"kind", outcome_kind_name(o.kind)},   {"base_intercept", o.base_intercept},
          {"base_linear", o.base_linear},         {"base_quadratic", o.base_quadratic},
          {"effect_intercept", o.effect_intercept}, {"effect_linear", o.effect_linear},
          {"effect_scale", o.effect_scale}};
}

data::OutcomeForm outcome_from_json(const json& j) {
  reject_unknown(j, {"kind", "base_intercept", "base_linear", "base_quadratic", "effect_intercept",
                     "effect_linear", "effect_scale"},
                 "outcome");
  data::OutcomeForm o;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "affine") o.kind = data::OutcomeForm::Kind::affine;
  else if (kind == "quadratic") o.kind = data::OutcomeForm::Kind::quadratic;
  else if (kind == "sigmoid_hetero") o.kind = data::OutcomeForm::Kind::sigmoid_hetero;
  else throw ConfigError("unknown outcome kind '" + kind + "'");
  read(j, "base_intercept", o.base_intercept);
  read(j, "base_linear", o.base_linear);
  read(j, "base_quadratic", o.base_quadratic);
  read(j, "effect_intercept", o.effect_intercept);
  read(j, "effect_linear", o.effect_linear);
  read(j, "effect_scale", o.effect_scale);
  return o;
}

data::SplitSpec split_from_json(const json& j) {
  if (j.is_string()) {
    switch (data::split_scheme_from_string(j.get<std::string>())) {
      case data::SplitScheme::ihdp_63_27_10: return data::SplitSpec::ihdp();
      case data::SplitScheme::twins_news_56_24_20: return data::SplitSpec::twins_news();
      case data::SplitScheme::custom: throw ConfigError("custom split needs train/validation/test fractions");
    }
  }
  reject_unknown(j, {"scheme", "train", "validation", "test"}, "split");
  const auto scheme = data::split_scheme_from_string(j.value("scheme", std::string("custom")));
  if (scheme != data::SplitScheme::custom) {
    if (j.size() > 1) throw ConfigError("fractions are fixed for named split schemes");
    return split_from_json(j.at("scheme"));
  }
  return data::SplitSpec::custom(j.at("train").get<double>(), j.at("validation").get<double>(),
                                 j.at("test").get<double>());
}

baselines::DmlConfig dml_from_json(const json& j) {
  reject_unknown(j, {"folds", "crossfit", "learner", "ridge_lambda", "clamp_low", "clamp_high", "network"},
                 "dml settings");
  baselines::DmlConfig c;
  read(j, "folds", c.folds);
  read(j, "crossfit", c.crossfit);
  read(j, "ridge_lambda", c.ridge_lambda);
  read(j, "clamp_low", c.clamp_low);
  read(j, "clamp_high", c.clamp_high);
  const auto learner = j.value("learner", std::string("ridge"));
  if (learner == "ridge") c.learner = baselines::NuisanceLearner::ridge;
  else if (learner == "network") c.learner = baselines::NuisanceLearner::network;
  else throw ConfigError("unknown dml learner '" + learner + "'");
  if (j.contains("network")) c.network = est::cdnn_config_from_json(j.at("network"));
  c.validate();
  return c;
}

EstimatorSpec estimator_from_json(const json& j) {
  EstimatorSpec e;
  json settings = json::object();
  if (j.is_string()) {
    e.kind = estimator_kind_from_string(j.get<std::string>());
  } else {
    reject_unknown(j, {"kind", "name", "settings"}, "estimator");
    e.kind = estimator_kind_from_string(j.at("kind").get<std::string>());
    read(j, "name", e.name);
    if (j.contains("settings")) settings = j.at("settings");
  }
  switch (e.kind) {
    case EstimatorKind::cdnn_freezing:
    case EstimatorKind::cdnn_explicit:
      e.cdnn = est::cdnn_config_from_json(settings);
      break;
    case EstimatorKind::ols_lr1:
      reject_unknown(settings, {"drop_columns"}, "ols_lr1 settings");
      read(settings, "drop_columns", e.lr1.drop_columns);
      break;
    case EstimatorKind::ols_lr2:
      reject_unknown(settings, {}, "ols_lr2 settings");
      break;
    case EstimatorKind::dml:
      e.dml = dml_from_json(settings);
      break;
  }
  return e;
}

bool glob_match(const char* p, const char* s) {
  for (; *p; ++p, ++s) {
    if (*p == '*') {
      for (const char* t = s;; ++t) {
        if (glob_match(p + 1, t)) return true;
        if (!*t) return false;
      }
    }
    if (!*s || (*p != '?' && *p != *s)) return false;
  }
  return !*s;
}

}  // namespace

json to_json(const data::DgpSpec& s) {
  return {{"name", s.name},
          {"d", s.d},
          {"covariate_law", law_name(s.covariate_law)},
          {"propensity", propensity_json(s.propensity)},
          {"outcome", outcome_json(s.outcome)},
          {"noise_sigma", s.noise_sigma},
          {"seed", s.seed}};
}

data::DgpSpec dgp_from_json(const json& j) {
  reject_unknown(j, {"family", "name", "d", "covariate_law", "propensity", "outcome", "noise_sigma", "seed"},
                 "dgp");
  try {
    data::DgpSpec s;
    if (j.contains("family")) {
      s = data::named_dgp(j.at("family").get<std::string>(), j.value("d", std::size_t{5}),
                          j.value("noise_sigma", 0.5), j.value("seed", std::uint64_t{0}));
    } else {
      read(j, "d", s.d);
      read(j, "noise_sigma", s.noise_sigma);
      read(j, "seed", s.seed);
      if (!j.contains("propensity") || !j.contains("outcome"))
        throw ConfigError("dgp needs either 'family' or both 'propensity' and 'outcome'");
    }
    read(j, "name", s.name);
    if (j.contains("covariate_law")) s.covariate_law = law_from_string(j.at("covariate_law").get<std::string>());
    if (j.contains("propensity")) s.propensity = propensity_from_json(j.at("propensity"));
    if (j.contains("outcome")) s.outcome = outcome_from_json(j.at("outcome"));
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad dgp: ") + e.what());
  }
}

std::vector<std::filesystem::path> expand_glob(const std::string& pattern) {
  const std::filesystem::path p(pattern);
  const std::filesystem::path dir = p.has_parent_path() ? p.parent_path() : std::filesystem::path(".");
  const std::string name = p.filename().string();
  std::vector<std::filesystem::path> out;
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec))
    if (entry.is_regular_file() && glob_match(name.c_str(), entry.path().filename().string().c_str()))
      out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::filesystem::path> ExperimentConfig::csv_files() const {
  auto files = expand_glob(csv_glob);
  if (files.size() > replications) files.resize(replications);
  return files;
}

void ExperimentConfig::validate() const {
  if (dgp.has_value() == !csv_glob.empty())
    throw ConfigError("exactly one of 'dgp' and 'csv' must be given");
  if (estimators.empty()) throw ConfigError("at least one estimator is required");
  if (replications == 0) throw ConfigError("replications must be >= 1");
  std::set<std::string> labels;
  for (const auto& e : estimators)
    if (!labels.insert(e.label()).second)
      throw ConfigError("duplicate estimator label '" + e.label() + "'; set distinct 'name' fields");
  if (workers == 0) throw ConfigError("workers must be >= 1");
  split.validate();
  if (dgp) {
    dgp->validate();
    data::split_sizes(n, split);
  } else if (expand_glob(csv_glob).size() < replications) {
    throw ConfigError("'" + csv_glob + "' matches " + std::to_string(expand_glob(csv_glob).size()) +
                      " files, need " + std::to_string(replications));
  }
}

ExperimentConfig experiment_from_json(const json& j) {
  reject_unknown(j, {"dgp", "csv", "n", "replications", "redraw_coefficients", "split", "estimators", "seed",
                     "output", "workers", "metrics_on"},
                 "experiment config");
  ExperimentConfig c;
  try {
    if (j.contains("dgp")) c.dgp = dgp_from_json(j.at("dgp"));
    read(j, "csv", c.csv_glob);
    read(j, "n", c.n);
    if (j.contains("replications")) c.replications = j.at("replications").get<std::size_t>();
    else if (!c.csv_glob.empty()) c.replications = std::max<std::size_t>(1, expand_glob(c.csv_glob).size());
    read(j, "redraw_coefficients", c.redraw_coefficients);
    if (j.contains("split")) c.split = split_from_json(j.at("split"));
    if (j.contains("estimators")) {
      if (!j.at("estimators").is_array()) throw ConfigError("'estimators' must be an array");
      for (const auto& e : j.at("estimators")) c.estimators.push_back(estimator_from_json(e));
    }
    read(j, "seed", c.seed);
    read(j, "output", c.output);
    read(j, "workers", c.workers);
    const auto scope = j.value("metrics_on", std::string("test"));
    if (scope == "test") c.metrics_on = MetricScope::test;
    else if (scope == "all") c.metrics_on = MetricScope::all;
    else throw ConfigError("metrics_on must be 'test' or 'all'");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  return experiment_from_json(j);
}

std::size_t effective_workers(const ExperimentConfig& config) {
  if (const char* env = std::getenv("CDNN_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw ConfigError("CDNN_WORKERS must be a positive integer");
    return static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, config.workers);
}

}  // namespace cdnn::bench
