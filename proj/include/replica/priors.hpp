#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace replica {

/// Raised for invalid distributions, configurations and estimator specs.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Rng = std::mt19937_64;

/// One term of a scalar Gaussian mixture. A zero variance encodes a point
/// mass at `mean`, which is how discrete atoms and spikes are represented.
struct MixtureComponent {
  double weight = 0.0;
  double mean = 0.0;
  double variance = 0.0;

  bool is_point_mass() const { return variance == 0.0; }
  bool is_zero_atom() const { return variance == 0.0 && mean == 0.0; }
};

struct WeightedAtom {
  double weight = 0.0;
  double value = 0.0;
};

class ScaleDist;

/// Scalar source distribution p0(x): a finite Gaussian mixture or a finite
/// discrete distribution. Both are stored as mixture components; discrete
/// atoms are zero-variance components.
class Prior {
 public:
  enum class Kind { gaussian_mixture, discrete };

  static Prior gaussian_mixture(std::vector<MixtureComponent> components);
  static Prior discrete(std::vector<WeightedAtom> atoms);

  static Prior gaussian(double variance, double mean = 0.0);
  static Prior point_mass(double value);
  /// 0 with probability 1 - rho, N(0,1) with probability rho.
  static Prior bernoulli_gaussian(double rho);
  /// +-1/sqrt(rho) with probability rho/2 each, 0 with probability 1 - rho.
  static Prior three_point(double rho);
  /// Law of sqrt(s) * u with u ~ base and s ~ scale independent. Used when
  /// power variations are unknown to the estimator and live in the prior.
  static Prior scale_mixture(const Prior& base, const ScaleDist& scale);

  Kind kind() const { return kind_; }
  std::span<const MixtureComponent> components() const { return components_; }

  double mean() const;
  double second_moment() const;
  double variance() const { return second_moment() - mean() * mean(); }
  /// Probability that x == 0 exactly (mass of zero-variance atoms at 0).
  double zero_mass() const;

  double sample(Rng& rng) const;

 private:
  Prior(Kind kind, std::vector<MixtureComponent> components);

  Kind kind_;
  std::vector<MixtureComponent> components_;
};

double second_moment(const Prior& prior);
double sample(const Prior& prior, Rng& rng);

/// Distribution p_S(s) of the positive scale factors. Always finite.
class ScaleDist {
 public:
  enum class Kind { constant, discrete };

  static ScaleDist constant(double s);
  static ScaleDist discrete(std::vector<WeightedAtom> atoms);
  /// n_atoms equally weighted levels, equally spaced in dB across range_db
  /// (cell midpoints), rescaled so that E[s] = 1 exactly.
  static ScaleDist uniform_db(double range_db, std::size_t n_atoms = 32);

  Kind kind() const { return kind_; }
  std::span<const WeightedAtom> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  double mean() const;

  /// Exact weighted sum of integrand over the atoms.
  double expect(const std::function<double(double)>& integrand) const;

  std::size_t sample_index(Rng& rng) const;

 private:
  ScaleDist(Kind kind, std::vector<WeightedAtom> atoms);

  Kind kind_;
  std::vector<WeightedAtom> atoms_;
};

double expect_over_scale(const ScaleDist& dist, const std::function<double(double)>& integrand);

}  // namespace replica
