#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "tolerant/errors.hpp"
#include "tolerant/rng.hpp"

namespace tolerant {

struct HeatKernelReport {
  std::vector<double> gradients;  // sum_{u,v} nu(u) K(u,v) |w_t(u) - w_t(v)|, t < k
  std::vector<double> entropies;  // Ent_nu(w_t), t <= k
  double sum_squares = 0.0;
  double bound = 0.0;  // C log(1/nu(s))
  bool entropy_monotone = true;
  double telescoping_error = 0.0;

  bool holds() const { return entropy_monotone && sum_squares <= bound + 1e-12; }

  nlohmann::ordered_json to_json() const {
    return {{"gradients", gradients},         {"entropies", entropies},
            {"sum_squares", sum_squares},     {"bound", bound},
            {"entropy_monotone", entropy_monotone}, {"telescoping_error", telescoping_error},
            {"holds", holds()}};
  }
};

inline void validate_lazy_reversible(const Eigen::MatrixXd& k, const Eigen::VectorXd& nu, double tol = 1e-10) {
  const Eigen::Index n = k.rows();
  if (k.cols() != n || nu.size() != n || n == 0) throw UsageError("heat kernel: shape mismatch");
  if (std::abs(nu.sum() - 1.0) > tol || nu.minCoeff() <= 0.0) throw UsageError("heat kernel: nu must be a positive distribution");
  for (Eigen::Index u = 0; u < n; ++u) {
    if (std::abs(k.row(u).sum() - 1.0) > tol || k.row(u).minCoeff() < -tol) throw UsageError("heat kernel: K is not stochastic");
    if (k(u, u) < 0.5 - tol) throw UsageError("heat kernel: K is not lazy");
    for (Eigen::Index v = 0; v < n; ++v)
      if (std::abs(nu[u] * k(u, v) - nu[v] * k(v, u)) > tol) throw UsageError("heat kernel: K is not reversible");
  }
}

/// Heat-kernel densities w_t = K^t(s, .)/nu with w_{t+1} = K w_t; checks that the
/// entropy is non-increasing and sum_{t<k} gradient_t^2 <= C log(1/nu(s)).
inline HeatKernelReport heat_kernel_gradient_check(const Eigen::MatrixXd& k, const Eigen::VectorXd& nu, std::size_t s,
                                                   std::size_t steps, double c = 16.0) {
  validate_lazy_reversible(k, nu);
  const Eigen::Index n = k.rows();
  if (s >= static_cast<std::size_t>(n)) throw UsageError("heat kernel: start out of range");
  auto entropy = [&](const Eigen::VectorXd& w) {
    double e = 0.0;
    for (Eigen::Index u = 0; u < n; ++u)
      if (w[u] > 0.0) e += nu[u] * w[u] * std::log(w[u]);
    return e;
  };
  HeatKernelReport rep;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  w[static_cast<Eigen::Index>(s)] = 1.0 / nu[static_cast<Eigen::Index>(s)];
  rep.entropies.push_back(entropy(w));
  for (std::size_t t = 0; t < steps; ++t) {
    double grad = 0.0;
    for (Eigen::Index u = 0; u < n; ++u)
      for (Eigen::Index v = 0; v < n; ++v) grad += nu[u] * k(u, v) * std::abs(w[u] - w[v]);
    rep.gradients.push_back(grad);
    rep.sum_squares += grad * grad;
    w = k * w;
    rep.entropies.push_back(entropy(w));
    if (rep.entropies.back() > rep.entropies[rep.entropies.size() - 2] + 1e-12) rep.entropy_monotone = false;
  }
  double drops = 0.0;
  for (std::size_t t = 0; t + 1 < rep.entropies.size(); ++t) drops += rep.entropies[t] - rep.entropies[t + 1];
  rep.telescoping_error = std::abs(drops - (rep.entropies.front() - rep.entropies.back()));
  rep.bound = c * std::log(1.0 / nu[static_cast<Eigen::Index>(s)]);
  return rep;
}

/// Random lazy reversible chain K = (I + D^-1 W)/2 from symmetric random weights W;
/// nu is proportional to the weighted degrees. Each off-diagonal pair is present with
/// probability `density`; a spanning path keeps every state's degree positive.
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> random_lazy_reversible_chain(std::size_t size, double density, Rng& rng) {
  if (size == 0) throw UsageError("chain needs at least one state");
  const auto n = static_cast<Eigen::Index>(size);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index u = 0; u < n; ++u)
    for (Eigen::Index v = u + 1; v < n; ++v)
      if (v == u + 1 || uniform01(rng) < density) w(u, v) = w(v, u) = 0.05 + uniform01(rng);
  if (n == 1) w(0, 0) = 1.0;
  Eigen::VectorXd d = w.rowwise().sum();
  Eigen::MatrixXd k = 0.5 * Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index u = 0; u < n; ++u) k.row(u) += 0.5 * w.row(u) / d[u];
  return {k, d / d.sum()};
}

}  // namespace tolerant
