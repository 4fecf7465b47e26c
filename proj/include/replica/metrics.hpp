#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "replica/replica_solver.hpp"

namespace replica {

/// Scale-dependent support detection thresholds, one per scale atom (in
/// the order of ScaleDist::atoms()). A component is declared nonzero when
/// |xhat| > t(s).
struct SupportRule {
  std::vector<double> thresholds;

  /// Threshold for scale atom `index`; a single-entry rule applies everywhere.
  double at(std::size_t index) const { return thresholds.size() == 1 ? thresholds.front() : thresholds.at(index); }
};

struct SnrMetrics {
  std::vector<double> snr0_db;  // per scale atom
  std::vector<double> snr_db;   // per scale atom
  double eta = 1.0;
};

struct ReplicaPrediction {
  NoiseLevels levels;
  double mse = 0.0;              // E|x - xhat|^2
  double signal_mse = 0.0;       // E[s |x - xhat|^2], error of S^{1/2} x
  double normalized_se_db = 0.0; // 10 log10(mse / E|x|^2)
  double signal_se_db = 0.0;     // 10 log10(signal_mse / (E[s] E|x|^2))
  double eta = 1.0;
  double snr0_db = 0.0;          // 10 log10(E[s] E|x|^2 / sigma0^2)
  std::optional<double> p_misdetect;
  std::optional<SupportRule> thresholds;
};

/// E|x - xhat|^2 through the equivalent scalar channel.
double predicted_mse(const ProblemConfig& config, const NoiseLevels& levels, const QuadratureSpec& quad = {});

/// E[s |x - xhat|^2]: the error of the rescaled estimate S^{1/2} xhat.
double predicted_signal_mse(const ProblemConfig& config, const NoiseLevels& levels,
                            const QuadratureSpec& quad = {});

/// P(1{|xhat| > t(s)} != 1{x != 0}). MAP estimators only.
double misdetect_probability(const ProblemConfig& config, const NoiseLevels& levels, const SupportRule& rule,
                             const QuadratureSpec& quad = {});

/// Per-atom minimization of the misdetection probability over t in
/// [0, 10 sqrt(E|x|^2 + sigma_eff^2 / s)]. Returns the rule and its error.
std::pair<SupportRule, double> optimize_thresholds(const ProblemConfig& config, const NoiseLevels& levels,
                                                   const QuadratureSpec& quad = {});

SnrMetrics snr_metrics(const ProblemConfig& config, const NoiseLevels& levels);

/// Everything above for one solved configuration.
ReplicaPrediction make_prediction(const ProblemConfig& config, const NoiseLevels& levels, bool with_support,
                                  const QuadratureSpec& quad = {});

inline double to_db(double ratio) { return 10.0 * std::log10(ratio); }

}  // namespace replica
