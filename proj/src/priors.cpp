#include "replica/priors.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace replica {
namespace {

constexpr double kWeightTolerance = 1e-12;

template <class Range, class Weight>
void check_weights(const Range& items, Weight weight_of, const char* what) {
  if (items.empty()) throw ConfigError(std::string(what) + ": no components");
  double total = 0.0;
  for (const auto& item : items) {
    const double w = weight_of(item);
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ConfigError(std::string(what) + ": weights must be finite and nonnegative");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > kWeightTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << ": weights sum to " << total << ", expected 1";
    throw ConfigError(msg.str());
  }
}

// Index i with cumulative[i-1] <= u < cumulative[i]; falls back to the last
// positive-weight entry if rounding leaves u above the running total.
template <class Range, class Weight>
std::size_t pick_index(const Range& items, Weight weight_of, double u) {
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const double w = weight_of(items[i]);
    if (w > 0.0) last_positive = i;
    acc += w;
    if (u < acc) return i;
  }
  return last_positive;
}

}  // namespace

Prior::Prior(Kind kind, std::vector<MixtureComponent> components)
    : kind_(kind), components_(std::move(components)) {
  check_weights(components_, [](const MixtureComponent& c) { return c.weight; }, "prior");
  for (const auto& c : components_) {
    if (!std::isfinite(c.mean)) throw ConfigError("prior: component mean must be finite");
    if (!(c.variance >= 0.0) || !std::isfinite(c.variance)) {
      throw ConfigError("prior: component variance must be finite and nonnegative");
    }
  }
}

Prior Prior::gaussian_mixture(std::vector<MixtureComponent> components) {
  return Prior(Kind::gaussian_mixture, std::move(components));
}

Prior Prior::discrete(std::vector<WeightedAtom> atoms) {
  std::vector<MixtureComponent> components;
  components.reserve(atoms.size());
  for (const auto& a : atoms) components.push_back({a.weight, a.value, 0.0});
  return Prior(Kind::discrete, std::move(components));
}

Prior Prior::gaussian(double variance, double mean) {
  return gaussian_mixture({{1.0, mean, variance}});
}

Prior Prior::point_mass(double value) { return discrete({{1.0, value}}); }

Prior Prior::bernoulli_gaussian(double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("bernoulli_gaussian: rho must lie in [0,1]");
  return gaussian_mixture({{1.0 - rho, 0.0, 0.0}, {rho, 0.0, 1.0}});
}

Prior Prior::three_point(double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("three_point: rho must lie in (0,1]");
  const double amplitude = 1.0 / std::sqrt(rho);
  return discrete({{0.5 * rho, amplitude}, {0.5 * rho, -amplitude}, {1.0 - rho, 0.0}});
}

Prior Prior::scale_mixture(const Prior& base, const ScaleDist& scale) {
  std::vector<MixtureComponent> components;
  components.reserve(base.components().size() * scale.size());
  for (const auto& atom : scale.atoms()) {
    const double root = std::sqrt(atom.value);
    for (const auto& c : base.components()) {
      components.push_back({c.weight * atom.weight, root * c.mean, atom.value * c.variance});
    }
  }
  // Renormalize away the rounding in the weight products.
  const double total = std::accumulate(components.begin(), components.end(), 0.0,
                                       [](double acc, const MixtureComponent& c) { return acc + c.weight; });
  for (auto& c : components) c.weight /= total;
  return Prior(base.kind(), std::move(components));
}

double Prior::mean() const {
  double acc = 0.0;
  for (const auto& c : components_) acc += c.weight * c.mean;
  return acc;
}

double Prior::second_moment() const {
  double acc = 0.0;
  for (const auto& c : components_) acc += c.weight * (c.mean * c.mean + c.variance);
  return acc;
}

double Prior::zero_mass() const {
  double acc = 0.0;
  for (const auto& c : components_) {
    if (c.is_zero_atom()) acc += c.weight;
  }
  return acc;
}

double Prior::sample(Rng& rng) const {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const auto& c = components_[pick_index(components_, [](const MixtureComponent& m) { return m.weight; },
                                         uniform(rng))];
  if (c.is_point_mass()) return c.mean;
  std::normal_distribution<double> normal(c.mean, std::sqrt(c.variance));
  return normal(rng);
}

double second_moment(const Prior& prior) { return prior.second_moment(); }
double sample(const Prior& prior, Rng& rng) { return prior.sample(rng); }

ScaleDist::ScaleDist(Kind kind, std::vector<WeightedAtom> atoms) : kind_(kind), atoms_(std::move(atoms)) {
  check_weights(atoms_, [](const WeightedAtom& a) { return a.weight; }, "scale distribution");
  for (const auto& a : atoms_) {
    if (!(a.value > 0.0) || !std::isfinite(a.value)) {
      throw ConfigError("scale distribution: atoms must be finite and strictly positive");
    }
  }
}

ScaleDist ScaleDist::constant(double s) { return ScaleDist(Kind::constant, {{1.0, s}}); }

ScaleDist ScaleDist::discrete(std::vector<WeightedAtom> atoms) {
  return ScaleDist(Kind::discrete, std::move(atoms));
}

ScaleDist ScaleDist::uniform_db(double range_db, std::size_t n_atoms) {
  if (n_atoms == 0) throw ConfigError("uniform_db: n_atoms must be positive");
  if (!(range_db >= 0.0) || !std::isfinite(range_db)) throw ConfigError("uniform_db: range_db must be >= 0");
  std::vector<WeightedAtom> atoms(n_atoms);
  const double weight = 1.0 / static_cast<double>(n_atoms);
  double mean = 0.0;
  for (std::size_t k = 0; k < n_atoms; ++k) {
    const double db = range_db * (static_cast<double>(k) + 0.5) / static_cast<double>(n_atoms);
    atoms[k] = {weight, std::pow(10.0, db / 10.0)};
    mean += weight * atoms[k].value;
  }
  for (auto& a : atoms) a.value /= mean;
  return ScaleDist(Kind::discrete, std::move(atoms));
}

double ScaleDist::mean() const {
  return expect([](double s) { return s; });
}

double ScaleDist::expect(const std::function<double(double)>& integrand) const {
  double acc = 0.0;
  for (const auto& a : atoms_) acc += a.weight * integrand(a.value);
  return acc;
}

std::size_t ScaleDist::sample_index(Rng& rng) const {
  if (atoms_.size() == 1) return 0;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  return pick_index(atoms_, [](const WeightedAtom& a) { return a.weight; }, uniform(rng));
}

double expect_over_scale(const ScaleDist& dist, const std::function<double(double)>& integrand) {
  return dist.expect(integrand);
}

}  // namespace replica
