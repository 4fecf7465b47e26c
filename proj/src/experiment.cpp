#include "replica/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace replica {
namespace {

using json = nlohmann::json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// A JSON value together with its location in the file, for diagnostics.
class Node {
 public:
  Node(const json& value, std::string path) : value_(&value), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& message) const { throw ConfigError(path_ + ": " + message); }

  const std::string& path() const { return path_; }
  const json& raw() const { return *value_; }

  void expect_object() const {
    if (!value_->is_object()) fail("expected an object");
  }

  void allow_only(std::initializer_list<std::string_view> keys) const {
    expect_object();
    for (const auto& item : value_->items()) {
      if (std::find(keys.begin(), keys.end(), item.key()) == keys.end()) {
        fail("unknown field '" + item.key() + "'");
      }
    }
  }

  bool has(const std::string& key) const { return value_->is_object() && value_->contains(key); }

  Node at(const std::string& key) const {
    expect_object();
    if (!value_->contains(key)) fail("missing required field '" + key + "'");
    return Node(value_->at(key), path_ + "." + key);
  }

  std::optional<Node> get(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return Node(value_->at(key), path_ + "." + key);
  }

  std::size_t size() const {
    if (!value_->is_array()) fail("expected an array");
    return value_->size();
  }

  Node operator[](std::size_t i) const { return Node(value_->at(i), path_ + "[" + std::to_string(i) + "]"); }

  double number() const {
    if (!value_->is_number()) fail("expected a number");
    return value_->get<double>();
  }

  std::uint64_t unsigned_int() const {
    if (!value_->is_number_unsigned()) fail("expected a nonnegative integer");
    return value_->get<std::uint64_t>();
  }

  std::string string() const {
    if (!value_->is_string()) fail("expected a string");
    return value_->get<std::string>();
  }

  bool boolean() const {
    if (!value_->is_boolean()) fail("expected true or false");
    return value_->get<bool>();
  }

  std::vector<double> numbers() const {
    std::vector<double> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back((*this)[i].number());
    return out;
  }

  template <class F>
  auto guarded(F&& make) const {
    try {
      return make();
    } catch (const ConfigError& e) {
      fail(e.what());
    }
  }

 private:
  const json* value_;
  std::string path_;
};

std::vector<WeightedAtom> atoms_from(const Node& node) {
  const auto values = node.at("atoms").numbers();
  const auto weights = node.at("weights").numbers();
  if (values.size() != weights.size()) node.fail("atoms and weights differ in length");
  std::vector<WeightedAtom> atoms;
  for (std::size_t i = 0; i < values.size(); ++i) atoms.push_back({weights[i], values[i]});
  return atoms;
}

Prior parse_prior(const Node& node) {
  const std::string type = node.at("type").string();
  if (type == "bernoulli_gaussian") {
    node.allow_only({"type", "rho"});
    const double rho = node.at("rho").number();
    return node.guarded([&] { return Prior::bernoulli_gaussian(rho); });
  }
  if (type == "three_point") {
    node.allow_only({"type", "rho"});
    const double rho = node.at("rho").number();
    return node.guarded([&] { return Prior::three_point(rho); });
  }
  if (type == "gaussian") {
    node.allow_only({"type", "var", "mean"});
    const double var = node.at("var").number();
    const double mean = node.has("mean") ? node.at("mean").number() : 0.0;
    return node.guarded([&] { return Prior::gaussian(var, mean); });
  }
  if (type == "point_mass") {
    node.allow_only({"type", "value"});
    const double value = node.at("value").number();
    return node.guarded([&] { return Prior::point_mass(value); });
  }
  if (type == "discrete") {
    node.allow_only({"type", "atoms", "weights"});
    auto atoms = atoms_from(node);
    return node.guarded([&] { return Prior::discrete(atoms); });
  }
  if (type == "gaussian_mixture") {
    node.allow_only({"type", "components"});
    const Node list = node.at("components");
    std::vector<MixtureComponent> comps;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Node c = list[i];
      c.allow_only({"weight", "mean", "variance"});
      comps.push_back({c.at("weight").number(), c.has("mean") ? c.at("mean").number() : 0.0,
                       c.at("variance").number()});
    }
    return node.guarded([&] { return Prior::gaussian_mixture(comps); });
  }
  node.at("type").fail("unknown prior type '" + type + "'");
}

ScaleDist parse_scale(const Node& node) {
  const std::string type = node.at("type").string();
  if (type == "constant") {
    node.allow_only({"type", "s"});
    const double s = node.has("s") ? node.at("s").number() : 1.0;
    return node.guarded([&] { return ScaleDist::constant(s); });
  }
  if (type == "uniform_db") {
    node.allow_only({"type", "range_db", "n_atoms"});
    const double range = node.at("range_db").number();
    const std::size_t n_atoms = node.has("n_atoms") ? node.at("n_atoms").unsigned_int() : 32;
    return node.guarded([&] { return ScaleDist::uniform_db(range, n_atoms); });
  }
  if (type == "discrete") {
    node.allow_only({"type", "atoms", "weights"});
    auto atoms = atoms_from(node);
    return node.guarded([&] { return ScaleDist::discrete(atoms); });
  }
  node.at("type").fail("unknown scale type '" + type + "'");
}

EstimatorFamily parse_family(const Node& node) {
  const std::string name = node.string();
  for (auto f : {EstimatorFamily::linear, EstimatorFamily::lasso, EstimatorFamily::zero_norm, EstimatorFamily::mmse}) {
    if (name == to_string(f)) return f;
  }
  node.fail("unknown estimator family '" + name + "'");
}

void parse_estimator(const Node& node, Experiment& exp) {
  node.allow_only({"family", "gamma", "postulated_prior", "postulated_sigma0_sq"});
  exp.family = parse_family(node.at("family"));
  if (auto g = node.get("gamma")) {
    if (g->raw().is_string()) {
      if (g->string() != "optimal") g->fail("expected a number or \"optimal\"");
      if (exp.family == EstimatorFamily::mmse) g->fail("the MMSE estimator has no gamma");
      exp.gamma_optimal = true;
    } else {
      const double gamma = g->number();
      if (!(gamma > 0.0)) g->fail("gamma must be positive");
      if (exp.family == EstimatorFamily::mmse) g->fail("the MMSE estimator has no gamma");
      exp.gamma = gamma;
    }
  } else if (exp.family == EstimatorFamily::lasso || exp.family == EstimatorFamily::zero_norm) {
    exp.gamma_optimal = true;
  }
  if (auto p = node.get("postulated_prior")) {
    if (exp.family != EstimatorFamily::mmse) p->fail("only the MMSE estimator takes a postulated prior");
    exp.postulated_prior = parse_prior(*p);
  }
  if (auto p = node.get("postulated_sigma0_sq")) {
    if (exp.family != EstimatorFamily::mmse) p->fail("only the MMSE estimator takes a postulated noise level");
    const double v = p->number();
    if (!(v > 0.0)) p->fail("must be positive");
    exp.postulated_sigma0_sq = v;
  }
}

void parse_solver(const Node& node, QuadratureSpec& q) {
  node.allow_only({"init_grid", "damping", "tol", "max_iter", "mmse_integration", "n_hermite"});
  if (auto v = node.get("init_grid")) q.init_grid = v->numbers();
  if (auto v = node.get("damping")) q.damping = v->number();
  if (auto v = node.get("tol")) q.tol = v->number();
  if (auto v = node.get("max_iter")) q.max_iter = v->unsigned_int();
  if (auto v = node.get("n_hermite")) q.n_hermite = static_cast<int>(v->unsigned_int());
  if (auto v = node.get("mmse_integration")) {
    const auto name = v->string();
    if (name == "adaptive") {
      q.mmse_integration = QuadratureSpec::MmseIntegration::adaptive;
    } else if (name == "gauss_hermite") {
      q.mmse_integration = QuadratureSpec::MmseIntegration::gauss_hermite;
    } else {
      v->fail("expected \"adaptive\" or \"gauss_hermite\"");
    }
  }
  node.guarded([&] {
    q.validate();
    return 0;
  });
}

MontecarloSettings parse_montecarlo(const Node& node) {
  node.allow_only({"n", "n_trials", "master_seed", "lasso_tol", "lasso_max_iter", "bootstrap_resamples"});
  MontecarloSettings mc;
  if (auto v = node.get("n")) mc.n = v->unsigned_int();
  if (auto v = node.get("n_trials")) mc.n_trials = v->unsigned_int();
  if (auto v = node.get("master_seed")) mc.master_seed = v->unsigned_int();
  if (auto v = node.get("lasso_tol")) mc.lasso.tol = v->number();
  if (auto v = node.get("lasso_max_iter")) mc.lasso.max_iter = v->unsigned_int();
  if (auto v = node.get("bootstrap_resamples")) mc.bootstrap_resamples = v->unsigned_int();
  if (mc.n == 0) node.at("n").fail("must be at least 1");
  if (mc.n_trials == 0) node.at("n_trials").fail("must be at least 1");
  if (!(mc.lasso.tol > 0.0)) node.at("lasso_tol").fail("must be positive");
  if (mc.lasso.max_iter == 0) node.at("lasso_max_iter").fail("must be at least 1");
  return mc;
}

const std::set<std::string, std::less<>> kMetrics = {"predict", "simulate", "trials", "cdf"};

Experiment parse_experiment(const Node& node) {
  node.allow_only({"name", "beta", "sigma0_sq", "snr0_db", "prior", "scale", "scale_known", "estimator", "support",
                   "sweep", "solver", "montecarlo", "outputs"});
  Experiment exp;
  exp.name = node.at("name").string();
  if (exp.name.empty()) node.at("name").fail("must not be empty");
  if (auto v = node.get("beta")) {
    exp.beta = v->number();
    if (!(exp.beta >= 0.0) || !std::isfinite(exp.beta)) v->fail("must be finite and >= 0");
  }
  if (auto v = node.get("sigma0_sq")) {
    exp.sigma0_sq = v->number();
    if (!(*exp.sigma0_sq > 0.0)) v->fail("must be positive");
  }
  if (auto v = node.get("snr0_db")) exp.snr0_db = v->number();
  if (exp.sigma0_sq && exp.snr0_db) node.fail("give either sigma0_sq or snr0_db, not both");
  if (auto v = node.get("prior")) exp.prior = parse_prior(*v);
  if (auto v = node.get("scale")) exp.scale = parse_scale(*v);
  if (auto v = node.get("scale_known")) exp.scale_known = v->boolean();
  parse_estimator(node.at("estimator"), exp);
  if (auto v = node.get("support")) {
    exp.support = v->boolean();
    if (exp.support && exp.family == EstimatorFamily::mmse) v->fail("support detection needs a MAP estimator");
  }
  if (auto v = node.get("solver")) parse_solver(*v, exp.solver);

  if (auto sweep = node.get("sweep")) {
    sweep->allow_only({"parameter", "values"});
    const Node param = sweep->at("parameter");
    const std::string name = param.string();
    if (name == "beta") {
      exp.sweep_parameter = SweepParameter::beta;
    } else if (name == "gamma") {
      exp.sweep_parameter = SweepParameter::gamma;
      if (exp.family == EstimatorFamily::mmse) param.fail("the MMSE estimator has no gamma to sweep");
    } else if (name == "snr0_db") {
      exp.sweep_parameter = SweepParameter::snr0_db;
    } else {
      param.fail("expected beta, gamma or snr0_db");
    }
    const Node values = sweep->at("values");
    exp.sweep_values = values.numbers();
    if (exp.sweep_values.empty()) values.fail("must not be empty");
    for (std::size_t i = 0; i < exp.sweep_values.size(); ++i) {
      const double v = exp.sweep_values[i];
      if (!std::isfinite(v)) values[i].fail("must be finite");
      if (i > 0 && !(v > exp.sweep_values[i - 1])) values[i].fail("sweep values must be strictly increasing");
      if (exp.sweep_parameter == SweepParameter::beta && v < 0.0) values[i].fail("beta must be >= 0");
      if (exp.sweep_parameter == SweepParameter::gamma && !(v > 0.0)) values[i].fail("gamma must be positive");
    }
  } else {
    exp.sweep_parameter = SweepParameter::beta;
    exp.sweep_values = {exp.beta};
  }
  if (!exp.sigma0_sq && !exp.snr0_db && exp.sweep_parameter != SweepParameter::snr0_db) {
    node.fail("missing noise level: give sigma0_sq or snr0_db");
  }

  if (auto mc = node.get("montecarlo")) {
    if (exp.family != EstimatorFamily::linear && exp.family != EstimatorFamily::lasso) {
      mc->fail("only linear and lasso estimators can be simulated");
    }
    exp.montecarlo = parse_montecarlo(*mc);
  }

  if (auto outputs = node.get("outputs")) {
    for (std::size_t i = 0; i < outputs->size(); ++i) {
      const Node o = (*outputs)[i];
      o.allow_only({"metric", "path"});
      OutputSpec spec{o.at("metric").string(), o.at("path").string()};
      if (!kMetrics.count(spec.metric)) o.at("metric").fail("unknown metric '" + spec.metric + "'");
      if (spec.path.empty()) o.at("path").fail("must not be empty");
      exp.outputs.push_back(std::move(spec));
    }
  }
  return exp;
}

std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

// Picks the fixed point a caller gets when several exist.
NoiseLevels smallest_solution(const std::vector<NoiseLevels>& sols) {
  return *std::min_element(sols.begin(), sols.end(),
                           [](const auto& a, const auto& b) { return a.sigma_eff_sq < b.sigma_eff_sq; });
}

struct PointSolution {
  ProblemConfig config;  // with gamma resolved
  std::vector<NoiseLevels> solutions;
  NoiseLevels levels;
  bool at_boundary = false;
};

PointSolution solve_point(const Experiment& exp, const PointSetup& setup) {
  PointSolution out;
  out.config = setup.config;
  if (exp.family == EstimatorFamily::mmse) {
    out.solutions = solve_mmse_fixed_point(out.config, setup.postulated_noise_sq, exp.solver);
  } else if (setup.gamma_optimal) {
    auto reg = optimize_regularization(out.config, exp.solver);
    out.config.estimator.gamma = reg.gamma;
    out.at_boundary = reg.at_boundary;
    out.solutions = {reg.levels};
  } else {
    out.solutions = solve_map_fixed_point(out.config, exp.solver);
  }
  out.levels = smallest_solution(out.solutions);
  return out;
}

std::string resolve_output(const std::string& out_dir, const std::string& path) {
  const std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(out_dir) / p).string();
}

std::string trial_status_name(TrialStatus s) { return s == TrialStatus::converged ? "converged" : "max_iter"; }

}  // namespace

std::string_view to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::beta:
      return "beta";
    case SweepParameter::gamma:
      return "gamma";
    case SweepParameter::snr0_db:
      return "snr0_db";
  }
  return "?";
}

std::optional<std::string> Experiment::output_path(std::string_view metric) const {
  for (const auto& o : outputs) {
    if (o.metric == metric) return o.path;
  }
  if (metric == "predict" || metric == "simulate") return name + "_" + std::string(metric) + ".csv";
  return std::nullopt;
}

ExperimentFile parse_experiment_file(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON at " + line_column(json_text, e.byte > 0 ? e.byte - 1 : 0) + ": " + e.what());
  }
  const Node root(doc, "$");
  root.allow_only({"schema_version", "experiments"});
  ExperimentFile file;
  const Node version = root.at("schema_version");
  file.schema_version = version.string();
  if (file.schema_version != "1") version.fail("unsupported schema_version '" + file.schema_version + "'");
  const Node list = root.at("experiments");
  if (list.size() == 0) list.fail("must list at least one experiment");
  std::set<std::string> names;
  for (std::size_t i = 0; i < list.size(); ++i) {
    auto exp = parse_experiment(list[i]);
    if (!names.insert(exp.name).second) list[i].at("name").fail("duplicate experiment name '" + exp.name + "'");
    file.experiments.push_back(std::move(exp));
  }
  return file;
}

ExperimentFile load_experiment_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open experiment file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_experiment_file(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

PointSetup resolve_point(const Experiment& exp, double sweep_value) {
  PointSetup out;
  out.sweep_value = sweep_value;
  ProblemConfig& c = out.config;
  c.beta = exp.sweep_parameter == SweepParameter::beta ? sweep_value : exp.beta;
  c.prior = exp.prior;
  c.scale = exp.scale;

  const double power = exp.scale.mean() * exp.prior.second_moment();
  std::optional<double> snr = exp.snr0_db;
  if (exp.sweep_parameter == SweepParameter::snr0_db) snr = sweep_value;
  if (snr) {
    if (!(power > 0.0)) throw ConfigError(exp.name + ": snr0_db needs a prior with nonzero power");
    c.sigma0_sq = power / std::pow(10.0, *snr / 10.0);
  } else {
    c.sigma0_sq = *exp.sigma0_sq;
  }

  std::optional<Prior> postulated = exp.postulated_prior;
  if (!exp.scale_known) {
    c.prior = Prior::scale_mixture(exp.prior, exp.scale);
    c.scale = ScaleDist::constant(1.0);
    if (postulated) postulated = Prior::scale_mixture(*postulated, exp.scale);
  }

  std::optional<double> gamma = exp.gamma;
  out.gamma_optimal = exp.gamma_optimal;
  if (exp.sweep_parameter == SweepParameter::gamma) {
    gamma = sweep_value;
    out.gamma_optimal = false;
  }
  switch (exp.family) {
    case EstimatorFamily::linear:
      // The LMMSE choice for the given prior power; also what "optimal" means here.
      if (!gamma || out.gamma_optimal) {
        const double ex2 = c.prior.second_moment();
        if (!(ex2 > 0.0)) throw ConfigError(exp.name + ": linear default gamma needs a prior with nonzero power");
        gamma = c.sigma0_sq / ex2;
      }
      out.gamma_optimal = false;
      c.estimator = EstimatorSpec::linear(*gamma);
      break;
    case EstimatorFamily::lasso:
      c.estimator = EstimatorSpec::lasso(out.gamma_optimal ? std::nullopt : gamma);
      break;
    case EstimatorFamily::zero_norm:
      c.estimator = EstimatorSpec::zero_norm(out.gamma_optimal ? std::nullopt : gamma);
      break;
    case EstimatorFamily::mmse:
      c.estimator = EstimatorSpec::mmse(postulated ? *postulated : c.prior);
      out.postulated_noise_sq = exp.postulated_sigma0_sq.value_or(c.sigma0_sq);
      break;
  }
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(exp.name + " at " + std::string(to_string(exp.sweep_parameter)) + "=" +
                      format_double(sweep_value) + ": " + e.what());
  }
  return out;
}

PredictOutput predict_experiment(const Experiment& exp) {
  PredictOutput out;
  out.table.header = {"sweep_value", "sigma_eff_sq", "gamma_p", "gamma", "mse",         "se_db",      "signal_se_db",
                      "eta",         "p_misdetect",  "n_solutions", "residual", "iterations", "status"};
  for (const double value : exp.sweep_values) {
    const PointSetup setup = resolve_point(exp, value);
    std::vector<std::string> row;
    try {
      const PointSolution sol = solve_point(exp, setup);
      const bool with_support = exp.support && sol.config.estimator.is_map();
      const ReplicaPrediction pred = make_prediction(sol.config, sol.levels, with_support, exp.solver);
      std::string status = "converged";
      if (sol.solutions.size() > 1) {
        status = "multiple_solutions";
        out.warnings.push_back(exp.name + ": " + std::to_string(sol.solutions.size()) + " fixed points at " +
                               std::string(to_string(exp.sweep_parameter)) + "=" + format_double(value) +
                               "; reporting the smallest sigma_eff^2");
      }
      if (sol.at_boundary) {
        status = "at_boundary";
        out.warnings.push_back(exp.name + ": optimal gamma at the edge of the search range at " +
                               std::string(to_string(exp.sweep_parameter)) + "=" + format_double(value));
      }
      const double gamma = sol.config.estimator.is_map() ? sol.config.estimator.require_gamma() : kNaN;
      row = {format_double(value),
             format_double(pred.levels.sigma_eff_sq),
             format_double(pred.levels.gamma_p),
             format_double(gamma),
             format_double(pred.mse),
             format_double(pred.normalized_se_db),
             format_double(pred.signal_se_db),
             format_double(pred.eta),
             format_double(pred.p_misdetect.value_or(kNaN)),
             format_uint(sol.solutions.size()),
             format_double(pred.levels.residual),
             format_uint(pred.levels.iterations),
             status};
    } catch (const NonConvergenceError& e) {
      out.all_converged = false;
      out.warnings.push_back(exp.name + ": " + e.what());
      const std::string nan = format_double(kNaN);
      row = {format_double(value), nan, nan, nan, nan, nan, nan, nan, nan, "0", format_double(e.best_residual()),
             "0", e.diverged() ? "diverged" : "nonconverged"};
    }
    out.table.rows.push_back(std::move(row));
  }
  return out;
}

SimulateOutput simulate_experiment(const Experiment& exp, const SimulateOptions& opt) {
  if (!exp.montecarlo) throw ConfigError(exp.name + ": no montecarlo section");
  const MontecarloSettings& mc = *exp.montecarlo;
  SimulateOutput out;
  out.summary.header = {"sweep_value", "n",         "m",    "realized_beta", "gamma",       "median_se_db",
                        "ci_low",      "ci_high",   "mean_se_db", "q10",     "q90",         "mean_misdetect",
                        "non_converged_count", "excluded_count"};
  out.trials.header = {"sweep_value", "trial_index", "seed", "se_db", "misdetect", "status", "excluded"};
  out.cdf.header = {"sweep_value", "se_db", "cdf"};
  const std::uint64_t base_seed = opt.seed.value_or(mc.master_seed);

  for (std::size_t point = 0; point < exp.sweep_values.size(); ++point) {
    const double value = exp.sweep_values[point];
    const PointSetup setup = resolve_point(exp, value);
    ProblemConfig config = setup.config;
    std::optional<SupportRule> rule;
    if (setup.gamma_optimal || exp.support) {
      const PointSolution sol = solve_point(exp, setup);
      config = sol.config;
      if (exp.support) rule = optimize_thresholds(config, sol.levels, exp.solver).first;
    }

    TrialConfig tc;
    tc.n = mc.n;
    tc.beta = config.beta;
    tc.prior = exp.prior;
    tc.scale = exp.scale;
    tc.sigma0_sq = config.sigma0_sq;
    tc.estimator = config.estimator;
    tc.scale_known = exp.scale_known;
    tc.master_seed = trial_seed(base_seed, point);
    tc.n_trials = mc.n_trials;
    tc.lasso = mc.lasso;
    tc.support = rule;
    tc.workers = std::max(1u, opt.workers);
    tc.bootstrap_resamples = mc.bootstrap_resamples;
    ExperimentResult res;
    try {
      res = run_experiment(tc);
    } catch (const ConfigError& e) {
      throw ConfigError(exp.name + " at " + std::string(to_string(exp.sweep_parameter)) + "=" + format_double(value) +
                        ": " + e.what());
    }
    const auto& s = res.summary;
    if (s.non_converged > 0) {
      out.warnings.push_back(exp.name + ": " + std::to_string(s.non_converged) + " trials hit the lasso iteration cap at " +
                             std::string(to_string(exp.sweep_parameter)) + "=" + format_double(value));
    }
    const std::string sv = format_double(value);
    out.summary.rows.push_back({sv, format_uint(tc.n), format_uint(tc.m()), format_double(s.realized_beta),
                                format_double(config.estimator.require_gamma()), format_double(s.median_se_db),
                                format_double(s.ci_low_db), format_double(s.ci_high_db), format_double(s.mean_se_db),
                                format_double(s.q10_se_db), format_double(s.q90_se_db),
                                format_double(s.mean_misdetect.value_or(kNaN)), format_uint(s.non_converged),
                                format_uint(s.excluded)});
    for (const auto& t : res.trials) {
      out.trials.rows.push_back({sv, format_uint(t.trial_index), format_uint(t.seed), format_double(t.se_db),
                                 format_double(t.misdetect_rate.value_or(kNaN)), trial_status_name(t.status),
                                 t.excluded ? "1" : "0"});
    }
    for (std::size_t i = 0; i < s.cdf.size(); ++i) {
      out.cdf.rows.push_back({sv, format_double(s.cdf_grid_db[i]), format_double(s.cdf[i])});
    }
  }
  return out;
}

std::string CompareReport::summary_json() const {
  json j;
  j["max_gap_db"] = max_gap_db;
  j["points"] = points;
  j["failures"] = failures;
  return j.dump();
}

CompareReport compare_tables(const Table& a, const Table& b, double tolerance_db) {
  auto value_column = [](const Table& t, const char* side) -> std::size_t {
    for (const char* name : {"median_se_db", "signal_se_db"}) {
      if (std::find(t.header.begin(), t.header.end(), name) != t.header.end()) return t.column(name);
    }
    throw ConfigError(std::string(side) + " table has neither median_se_db nor signal_se_db");
  };
  auto keyed = [&](const Table& t, const char* side) {
    std::size_t key_col = 0;
    try {
      key_col = t.column("sweep_value");
    } catch (const std::out_of_range&) {
      throw ConfigError(std::string(side) + " table has no sweep_value column");
    }
    const std::size_t val_col = value_column(t, side);
    std::map<double, double> out;
    for (const auto& row : t.rows) {
      const double key = parse_double(row[key_col]);
      if (!out.emplace(key, parse_double(row[val_col])).second) {
        throw ConfigError(std::string(side) + " table repeats sweep_value " + row[key_col]);
      }
    }
    return out;
  };
  const auto left = keyed(a, "first");
  const auto right = keyed(b, "second");

  std::vector<std::string> unmatched;
  for (const auto& [k, v] : left) {
    if (!right.count(k)) unmatched.push_back(format_double(k) + " (first only)");
  }
  for (const auto& [k, v] : right) {
    if (!left.count(k)) unmatched.push_back(format_double(k) + " (second only)");
  }
  if (!unmatched.empty()) {
    std::string msg = "sweep grids differ:";
    for (const auto& u : unmatched) msg += " " + u;
    throw ConfigError(msg);
  }

  CompareReport report;
  report.joined.header = {"sweep_value", "first_se_db", "second_se_db", "gap_db", "pass"};
  for (const auto& [k, va] : left) {
    const double vb = right.at(k);
    const double gap = std::abs(va - vb);
    const bool pass = gap <= tolerance_db;
    ++report.points;
    if (!pass) ++report.failures;
    report.max_gap_db = std::isnan(gap) ? gap : std::max(report.max_gap_db, gap);
    report.joined.rows.push_back(
        {format_double(k), format_double(va), format_double(vb), format_double(gap), pass ? "1" : "0"});
  }
  return report;
}

int predict_command(const ExperimentFile& file, const CommandOptions& opt, std::ostream& log) {
  int code = exit_ok;
  for (const auto& exp : file.experiments) {
    const PredictOutput result = predict_experiment(exp);
    for (const auto& w : result.warnings) log << "warning: " << w << '\n';
    const std::string path = resolve_output(opt.out_dir, *exp.output_path("predict"));
    write_csv(path, result.table);
    log << "wrote " << path << '\n';
    if (!result.all_converged) code = exit_nonconvergence;
  }
  return code;
}

int simulate_command(const ExperimentFile& file, const CommandOptions& opt, std::ostream& log) {
  int code = exit_ok;
  std::size_t simulated = 0;
  for (const auto& exp : file.experiments) {
    if (!exp.montecarlo) {
      log << "skipping " << exp.name << ": no montecarlo section\n";
      continue;
    }
    ++simulated;
    SimulateOutput result;
    try {
      result = simulate_experiment(exp, {opt.workers, opt.seed});
    } catch (const NonConvergenceError& e) {
      log << "error: " << exp.name << ": " << e.what() << '\n';
      code = exit_nonconvergence;
      continue;
    }
    for (const auto& w : result.warnings) log << "warning: " << w << '\n';
    for (const auto& [metric, table] : {std::pair<const char*, const Table*>{"simulate", &result.summary},
                                        {"trials", &result.trials},
                                        {"cdf", &result.cdf}}) {
      if (auto rel = exp.output_path(metric)) {
        const std::string path = resolve_output(opt.out_dir, *rel);
        write_csv(path, *table);
        log << "wrote " << path << '\n';
      }
    }
  }
  if (simulated == 0) throw ConfigError("no experiment has a montecarlo section");
  return code;
}

int compare_command(const std::string& a_path, const std::string& b_path, const CommandOptions& opt,
                    std::ostream& out, std::ostream& log) {
  Table a;
  Table b;
  try {
    a = read_csv(a_path);
    b = read_csv(b_path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  const CompareReport report = compare_tables(a, b, opt.tolerance_db);
  const std::string stem = std::filesystem::path(a_path).stem().string() + "_vs_" +
                           std::filesystem::path(b_path).stem().string();
  const std::string csv_path = resolve_output(opt.out_dir, stem + ".csv");
  const std::string json_path = resolve_output(opt.out_dir, stem + ".json");
  write_csv(csv_path, report.joined);
  write_file_atomic(json_path, report.summary_json() + "\n");
  log << "wrote " << csv_path << " and " << json_path << '\n';
  out << report.summary_json() << '\n';
  return report.failures > 0 ? exit_comparison_failure : exit_ok;
}

}  // namespace replica
