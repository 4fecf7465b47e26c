#include "replica/gaussian.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace replica {

// Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials.
GaussHermiteRule::GaussHermiteRule(int n) {
  if (n < 1) throw std::invalid_argument("Gauss-Hermite rule needs at least one node");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
    jacobi(k - 1, k) = jacobi(k, k - 1);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = solver.eigenvalues()(i);
    const double v0 = solver.eigenvectors()(0, i);
    weights[i] = v0 * v0;
  }
  // Symmetrize: the rule is exact for odd polynomials only if the nodes are.
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    const double x = 0.5 * (nodes[j] - nodes[i]);
    const double w = 0.5 * (weights[i] + weights[j]);
    nodes[i] = -x;
    nodes[j] = x;
    weights[i] = weights[j] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

const GaussHermiteRule& gauss_hermite(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussHermiteRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussHermiteRule>(n);
  return *slot;
}

}  // namespace replica
