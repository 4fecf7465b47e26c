#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "replica/experiment.hpp"
#include "replica/presets.hpp"

namespace py = pybind11;
using namespace replica;

namespace {

ExperimentFile load_text_or_preset(const std::string& text) {
  if (text.rfind("preset:", 0) == 0) {
    const auto* p = find_preset(text.substr(7));
    if (!p) throw ConfigError("unknown preset '" + text.substr(7) + "'");
    return parse_experiment_file(p->json);
  }
  return parse_experiment_file(text);
}

py::dict predict_all(const std::string& text) {
  py::dict out;
  for (const auto& exp : load_text_or_preset(text).experiments) out[py::str(exp.name)] = predict_experiment(exp).table;
  return out;
}

py::dict simulate_all(const std::string& text, unsigned workers, std::optional<std::uint64_t> seed) {
  py::dict out;
  for (const auto& exp : load_text_or_preset(text).experiments) {
    if (!exp.montecarlo) continue;
    SimulateOutput result;
    {
      py::gil_scoped_release release;
      result = simulate_experiment(exp, {workers, seed});
    }
    out[py::str(exp.name)] = std::move(result);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Replica-method predictions for MAP and MMSE estimators, with a Monte Carlo harness.";
  m.attr("__version__") = "0.1.0";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NonConvergenceError>(m, "NonConvergenceError", PyExc_RuntimeError);
  py::register_exception<IllConditionedError>(m, "IllConditionedError", PyExc_ArithmeticError);

  py::class_<MixtureComponent>(m, "MixtureComponent")
      .def(py::init<double, double, double>(), py::arg("weight"), py::arg("mean"), py::arg("variance"))
      .def_readwrite("weight", &MixtureComponent::weight)
      .def_readwrite("mean", &MixtureComponent::mean)
      .def_readwrite("variance", &MixtureComponent::variance);

  py::class_<ScaleDist>(m, "ScaleDist")
      .def_static("constant", &ScaleDist::constant, py::arg("s"))
      .def_static(
          "discrete",
          [](const std::vector<std::pair<double, double>>& atoms) {
            std::vector<WeightedAtom> a;
            for (const auto& [w, v] : atoms) a.push_back({w, v});
            return ScaleDist::discrete(std::move(a));
          },
          py::arg("atoms"), "atoms is a list of (weight, value) pairs")
      .def_static("uniform_db", &ScaleDist::uniform_db, py::arg("range_db"), py::arg("n_atoms") = 32)
      .def("mean", &ScaleDist::mean)
      .def_property_readonly("atoms", [](const ScaleDist& d) {
        std::vector<std::pair<double, double>> out;
        for (const auto& a : d.atoms()) out.emplace_back(a.weight, a.value);
        return out;
      });

  py::class_<Prior>(m, "Prior")
      .def_static("gaussian_mixture", &Prior::gaussian_mixture, py::arg("components"))
      .def_static(
          "discrete",
          [](const std::vector<std::pair<double, double>>& atoms) {
            std::vector<WeightedAtom> a;
            for (const auto& [w, v] : atoms) a.push_back({w, v});
            return Prior::discrete(std::move(a));
          },
          py::arg("atoms"), "atoms is a list of (weight, value) pairs")
      .def_static("gaussian", &Prior::gaussian, py::arg("variance"), py::arg("mean") = 0.0)
      .def_static("point_mass", &Prior::point_mass, py::arg("value"))
      .def_static("bernoulli_gaussian", &Prior::bernoulli_gaussian, py::arg("rho"))
      .def_static("three_point", &Prior::three_point, py::arg("rho"))
      .def_static("scale_mixture", &Prior::scale_mixture, py::arg("base"), py::arg("scale"))
      .def("mean", &Prior::mean)
      .def("second_moment", &Prior::second_moment)
      .def("variance", &Prior::variance)
      .def("zero_mass", &Prior::zero_mass)
      .def_property_readonly("components", [](const Prior& p) {
        return std::vector<MixtureComponent>(p.components().begin(), p.components().end());
      })
      .def(
          "sample",
          [](const Prior& p, std::size_t count, std::uint64_t seed) {
            Rng rng(seed);
            Eigen::VectorXd out(static_cast<Eigen::Index>(count));
            for (auto& v : out) v = p.sample(rng);
            return out;
          },
          py::arg("count"), py::arg("seed") = 1);

  py::enum_<EstimatorFamily>(m, "EstimatorFamily")
      .value("linear", EstimatorFamily::linear)
      .value("lasso", EstimatorFamily::lasso)
      .value("zero_norm", EstimatorFamily::zero_norm)
      .value("mmse", EstimatorFamily::mmse);

  py::class_<EstimatorSpec>(m, "EstimatorSpec")
      .def_static("linear", &EstimatorSpec::linear, py::arg("gamma"))
      .def_static("lasso", &EstimatorSpec::lasso, py::arg("gamma") = std::nullopt)
      .def_static("zero_norm", &EstimatorSpec::zero_norm, py::arg("gamma") = std::nullopt)
      .def_static("mmse", &EstimatorSpec::mmse, py::arg("postulated_prior"))
      .def_readwrite("family", &EstimatorSpec::family)
      .def_readwrite("gamma", &EstimatorSpec::gamma)
      .def_readwrite("postulated_prior", &EstimatorSpec::postulated_prior);

  py::class_<ProblemConfig>(m, "ProblemConfig")
      .def(py::init([](double beta, double sigma0_sq, Prior prior, ScaleDist scale, EstimatorSpec estimator) {
             ProblemConfig c;
             c.beta = beta;
             c.sigma0_sq = sigma0_sq;
             c.prior = std::move(prior);
             c.scale = std::move(scale);
             c.estimator = std::move(estimator);
             c.validate();
             return c;
           }),
           py::arg("beta"), py::arg("sigma0_sq"), py::arg("prior"), py::arg("scale") = ScaleDist::constant(1.0),
           py::arg("estimator") = EstimatorSpec::linear(0.1))
      .def_readwrite("beta", &ProblemConfig::beta)
      .def_readwrite("sigma0_sq", &ProblemConfig::sigma0_sq)
      .def_readwrite("prior", &ProblemConfig::prior)
      .def_readwrite("scale", &ProblemConfig::scale)
      .def_readwrite("estimator", &ProblemConfig::estimator)
      .def("signal_power", &ProblemConfig::signal_power);

  py::enum_<QuadratureSpec::MmseIntegration>(m, "MmseIntegration")
      .value("adaptive", QuadratureSpec::MmseIntegration::adaptive)
      .value("gauss_hermite", QuadratureSpec::MmseIntegration::gauss_hermite);

  py::class_<QuadratureSpec>(m, "QuadratureSpec")
      .def(py::init<>())
      .def_readwrite("n_hermite", &QuadratureSpec::n_hermite)
      .def_readwrite("mmse_integration", &QuadratureSpec::mmse_integration)
      .def_readwrite("damping", &QuadratureSpec::damping)
      .def_readwrite("tol", &QuadratureSpec::tol)
      .def_readwrite("max_iter", &QuadratureSpec::max_iter)
      .def_readwrite("init_grid", &QuadratureSpec::init_grid);

  py::class_<NoiseLevels>(m, "NoiseLevels")
      .def(py::init([](double sigma_eff_sq, double gamma_p) { return NoiseLevels{sigma_eff_sq, gamma_p}; }),
           py::arg("sigma_eff_sq"), py::arg("gamma_p"))
      .def_readonly("sigma_eff_sq", &NoiseLevels::sigma_eff_sq)
      .def_readonly("gamma_p", &NoiseLevels::gamma_p)
      .def_readonly("converged", &NoiseLevels::converged)
      .def_readonly("iterations", &NoiseLevels::iterations)
      .def_readonly("residual", &NoiseLevels::residual);

  py::class_<RegularizationResult>(m, "RegularizationResult")
      .def_readonly("gamma", &RegularizationResult::gamma)
      .def_readonly("levels", &RegularizationResult::levels)
      .def_readonly("at_boundary", &RegularizationResult::at_boundary);

  py::class_<SupportRule>(m, "SupportRule")
      .def(py::init<std::vector<double>>(), py::arg("thresholds"))
      .def_readwrite("thresholds", &SupportRule::thresholds);

  py::class_<ReplicaPrediction>(m, "ReplicaPrediction")
      .def_readonly("levels", &ReplicaPrediction::levels)
      .def_readonly("mse", &ReplicaPrediction::mse)
      .def_readonly("signal_mse", &ReplicaPrediction::signal_mse)
      .def_readonly("normalized_se_db", &ReplicaPrediction::normalized_se_db)
      .def_readonly("signal_se_db", &ReplicaPrediction::signal_se_db)
      .def_readonly("eta", &ReplicaPrediction::eta)
      .def_readonly("snr0_db", &ReplicaPrediction::snr0_db)
      .def_readonly("p_misdetect", &ReplicaPrediction::p_misdetect)
      .def_readonly("thresholds", &ReplicaPrediction::thresholds);

  m.def("solve_map_fixed_point", &solve_map_fixed_point, py::arg("config"), py::arg("quad") = QuadratureSpec{});
  m.def("solve_mmse_fixed_point", &solve_mmse_fixed_point, py::arg("config"), py::arg("postulated_noise_sq"),
        py::arg("quad") = QuadratureSpec{});
  m.def("optimize_regularization", &optimize_regularization, py::arg("config"), py::arg("quad") = QuadratureSpec{});
  m.def("map_rhs", &map_rhs, py::arg("config"), py::arg("levels"), py::arg("quad") = QuadratureSpec{});
  m.def("make_prediction", &make_prediction, py::arg("config"), py::arg("levels"), py::arg("with_support") = false,
        py::arg("quad") = QuadratureSpec{});
  m.def("optimize_thresholds", &optimize_thresholds, py::arg("config"), py::arg("levels"),
        py::arg("quad") = QuadratureSpec{});
  m.def("multiuser_efficiency", &multiuser_efficiency, py::arg("levels"), py::arg("sigma0_sq"));

  m.def("soft_threshold", &soft_threshold, py::arg("z"), py::arg("lam"));
  m.def("hard_threshold", &hard_threshold, py::arg("z"), py::arg("t"));
  m.def("scalar_map", py::overload_cast<EstimatorFamily, double, double>(&scalar_map), py::arg("family"), py::arg("z"),
        py::arg("lam"));
  m.def("scalar_mmse", &scalar_mmse, py::arg("prior"), py::arg("z"), py::arg("mu"));

  py::class_<LassoOptions>(m, "LassoOptions")
      .def(py::init<>())
      .def_readwrite("tol", &LassoOptions::tol)
      .def_readwrite("max_iter", &LassoOptions::max_iter);

  py::class_<LassoResult>(m, "LassoResult")
      .def_readonly("x", &LassoResult::x)
      .def_readonly("converged", &LassoResult::converged)
      .def_readonly("sweeps", &LassoResult::sweeps);

  m.def("lmmse_estimate", &lmmse_estimate, py::arg("a"), py::arg("s"), py::arg("y"), py::arg("gamma"));
  m.def("lasso_estimate", &lasso_estimate, py::arg("a"), py::arg("s"), py::arg("y"), py::arg("gamma"),
        py::arg("opt") = LassoOptions{}, py::call_guard<py::gil_scoped_release>());
  m.def("lasso_kkt_violation", &lasso_kkt_violation, py::arg("a"), py::arg("s"), py::arg("y"), py::arg("gamma"),
        py::arg("x"));
  m.def("trial_seed", &trial_seed, py::arg("master_seed"), py::arg("trial_index"));

  py::class_<Table>(m, "Table")
      .def_readonly("header", &Table::header)
      .def_readonly("rows", &Table::rows)
      .def(
          "column",
          [](const Table& t, const std::string& name) {
            const auto j = t.column(name);
            std::vector<double> out;
            for (const auto& row : t.rows) out.push_back(parse_double(row[j]));
            return out;
          },
          py::arg("name"), "numeric values of one column")
      .def("to_csv", &Table::to_csv);

  py::class_<SimulateOutput>(m, "SimulateOutput")
      .def_readonly("summary", &SimulateOutput::summary)
      .def_readonly("trials", &SimulateOutput::trials)
      .def_readonly("cdf", &SimulateOutput::cdf)
      .def_readonly("warnings", &SimulateOutput::warnings);

  m.def("predict", &predict_all, py::arg("experiment"),
        "Replica predictions for every experiment in a JSON document or 'preset:NAME'; returns {name: Table}.");
  m.def("simulate", &simulate_all, py::arg("experiment"), py::arg("workers") = 1, py::arg("seed") = std::nullopt,
        "Monte Carlo runs for every experiment with a montecarlo section; returns {name: SimulateOutput}.");
  m.def(
      "compare",
      [](const Table& a, const Table& b, double tolerance_db) {
        const auto rep = compare_tables(a, b, tolerance_db);
        return py::make_tuple(rep.joined, rep.max_gap_db, rep.failures);
      },
      py::arg("first"), py::arg("second"), py::arg("tolerance_db") = 0.5,
      "Joins two tables on sweep_value; returns (joined, max_gap_db, failures).");
  m.def("preset_names", [] {
    std::vector<std::string> out;
    for (const auto& p : presets()) out.emplace_back(p.name);
    return out;
  });
  m.def(
      "preset_json",
      [](const std::string& name) {
        const auto* p = find_preset(name);
        if (!p) throw ConfigError("unknown preset '" + name + "'");
        return std::string(p->json);
      },
      py::arg("name"));
}
