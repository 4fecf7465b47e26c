#include "replica/presets.hpp"

namespace replica {
namespace {

constexpr std::string_view kSmoke = R"({
  "schema_version": "1",
  "experiments": [
    {
      "name": "smoke_linear",
      "snr0_db": 10,
      "prior": {"type": "bernoulli_gaussian", "rho": 0.1},
      "estimator": {"family": "linear"},
      "sweep": {"parameter": "beta", "values": [0.5, 1.0]},
      "montecarlo": {"n": 16, "n_trials": 4, "master_seed": 7, "bootstrap_resamples": 100},
      "outputs": [{"metric": "trials", "path": "smoke_linear_trials.csv"}]
    },
    {
      "name": "smoke_lasso",
      "snr0_db": 10,
      "prior": {"type": "bernoulli_gaussian", "rho": 0.1},
      "estimator": {"family": "lasso", "gamma": "optimal"},
      "support": true,
      "sweep": {"parameter": "beta", "values": [0.5, 1.0]},
      "montecarlo": {"n": 16, "n_trials": 4, "master_seed": 7, "bootstrap_resamples": 100},
      "outputs": [{"metric": "trials", "path": "smoke_lasso_trials.csv"}]
    }
  ]
})";

constexpr std::string_view kFig2 = R"({
  "schema_version": "1",
  "experiments": [
    {
      "name": "fig2_linear",
      "snr0_db": 10,
      "prior": {"type": "bernoulli_gaussian", "rho": 0.1},
      "estimator": {"family": "linear"},
      "sweep": {"parameter": "beta", "values": [0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 3.0]},
      "montecarlo": {"n": 200, "n_trials": 1000, "master_seed": 2}
    },
    {
      "name": "fig2_lasso",
      "snr0_db": 10,
      "prior": {"type": "bernoulli_gaussian", "rho": 0.1},
      "estimator": {"family": "lasso", "gamma": "optimal"},
      "sweep": {"parameter": "beta", "values": [0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 3.0]},
      "montecarlo": {"n": 200, "n_trials": 1000, "master_seed": 2}
    },
    {
      "name": "fig2_zero_norm",
      "snr0_db": 10,
      "prior": {"type": "bernoulli_gaussian", "rho": 0.1},
      "estimator": {"family": "zero_norm", "gamma": "optimal"},
      "sweep": {"parameter": "beta", "values": [0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 3.0]}
    },
    {
      "name": "fig2_mmse",
      "snr0_db": 10,
      "prior": {"type": "bernoulli_gaussian", "rho": 0.1},
      "estimator": {"family": "mmse"},
      "sweep": {"parameter": "beta", "values": [0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 3.0]}
    }
  ]
})";

constexpr std::string_view kFig3 = R"({
  "schema_version": "1",
  "experiments": [
    {
      "name": "fig3_n100",
      "snr0_db": 10,
      "prior": {"type": "bernoulli_gaussian", "rho": 0.1},
      "estimator": {"family": "lasso", "gamma": "optimal"},
      "sweep": {"parameter": "beta", "values": [1.0, 2.0]},
      "montecarlo": {"n": 100, "n_trials": 1000, "master_seed": 3},
      "outputs": [{"metric": "cdf", "path": "fig3_n100_cdf.csv"}]
    },
    {
      "name": "fig3_n500",
      "snr0_db": 10,
      "prior": {"type": "bernoulli_gaussian", "rho": 0.1},
      "estimator": {"family": "lasso", "gamma": "optimal"},
      "sweep": {"parameter": "beta", "values": [1.0, 2.0]},
      "montecarlo": {"n": 500, "n_trials": 1000, "master_seed": 3},
      "outputs": [{"metric": "cdf", "path": "fig3_n500_cdf.csv"}]
    }
  ]
})";

constexpr std::string_view kFig4 = R"({
  "schema_version": "1",
  "experiments": [
    {
      "name": "fig4_constant",
      "snr0_db": 10,
      "prior": {"type": "three_point", "rho": 0.1},
      "estimator": {"family": "lasso", "gamma": "optimal"},
      "sweep": {"parameter": "beta", "values": [0.5, 1.0, 1.5, 2.0, 2.5, 3.0]},
      "montecarlo": {"n": 200, "n_trials": 1000, "master_seed": 4}
    },
    {
      "name": "fig4_unknown",
      "snr0_db": 10,
      "prior": {"type": "three_point", "rho": 0.1},
      "scale": {"type": "uniform_db", "range_db": 10},
      "scale_known": false,
      "estimator": {"family": "lasso", "gamma": "optimal"},
      "sweep": {"parameter": "beta", "values": [0.5, 1.0, 1.5, 2.0, 2.5, 3.0]},
      "montecarlo": {"n": 200, "n_trials": 1000, "master_seed": 4}
    },
    {
      "name": "fig4_known",
      "snr0_db": 10,
      "prior": {"type": "three_point", "rho": 0.1},
      "scale": {"type": "uniform_db", "range_db": 10},
      "scale_known": true,
      "estimator": {"family": "lasso", "gamma": "optimal"},
      "sweep": {"parameter": "beta", "values": [0.5, 1.0, 1.5, 2.0, 2.5, 3.0]},
      "montecarlo": {"n": 200, "n_trials": 1000, "master_seed": 4}
    }
  ]
})";

constexpr std::string_view kFig5 = R"({
  "schema_version": "1",
  "experiments": [
    {
      "name": "fig5_linear",
      "snr0_db": 10,
      "prior": {"type": "three_point", "rho": 0.2},
      "estimator": {"family": "linear"},
      "support": true,
      "sweep": {"parameter": "beta", "values": [0.5, 1.0, 1.5, 2.0]},
      "montecarlo": {"n": 200, "n_trials": 1000, "master_seed": 5}
    },
    {
      "name": "fig5_lasso",
      "snr0_db": 10,
      "prior": {"type": "three_point", "rho": 0.2},
      "estimator": {"family": "lasso", "gamma": "optimal"},
      "support": true,
      "sweep": {"parameter": "beta", "values": [0.5, 1.0, 1.5, 2.0]},
      "montecarlo": {"n": 200, "n_trials": 1000, "master_seed": 5}
    }
  ]
})";

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> list = {
      {"smoke", "tiny linear and lasso run (n=16, 4 trials) for plumbing checks", kSmoke},
      {"fig2", "Bernoulli-Gaussian rho=0.1, SNR0=10 dB: linear, lasso, zero norm and MMSE versus beta", kFig2},
      {"fig3", "lasso SE distribution at n=100 and n=500, beta in {1, 2}", kFig3},
      {"fig4", "three-point rho=0.1 lasso with constant, unknown and known 10 dB power variations", kFig4},
      {"fig5", "three-point rho=0.2 support recovery with linear and lasso estimators", kFig5},
  };
  return list;
}

const Preset* find_preset(std::string_view name) {
  for (const auto& p : presets()) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

}  // namespace replica
