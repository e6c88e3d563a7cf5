#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "tolerant/errors.hpp"
#include "tolerant/ug_instance.hpp"

namespace tolerant {

inline constexpr std::size_t kDefaultDenseGuard = 4000;

/// The label lift on V x [Q]: state (v, b) has a self-loop of weight deg(v) and one unit
/// edge to (w, pi_vw(b)) per incident edge copy, so D(v, b) = 2 deg(v) and the lazy walk
/// holds with probability exactly 1/2. State index is v * Q + b.
class LabelLift {
 public:
  explicit LabelLift(const UGInstance& inst) : inst_(&inst) {}

  const UGInstance& instance() const noexcept { return *inst_; }
  int alphabet() const noexcept { return inst_->alphabet(); }
  std::size_t state_count() const noexcept {
    return inst_->graph().vertex_count() * static_cast<std::size_t>(alphabet());
  }
  std::size_t index(VertexId v, Label b) const noexcept {
    return static_cast<std::size_t>(v) * alphabet() + b;
  }
  VertexId vertex_of(std::size_t state) const noexcept {
    return static_cast<VertexId>(state / alphabet());
  }
  Label label_of(std::size_t state) const noexcept {
    return static_cast<Label>(state % alphabet());
  }

  /// Lifted degree D(v, b) = 2 deg(v).
  double lifted_degree(std::size_t state) const {
    return 2.0 * static_cast<double>(inst_->graph().degree(vertex_of(state)));
  }
  double volume() const { return 4.0 * alphabet() * static_cast<double>(inst_->graph().edge_count()); }

  /// One-step lifted lazy kernel M as a sparse row-stochastic matrix.
  Eigen::SparseMatrix<double, Eigen::RowMajor> transition() const {
    const Multigraph& g = inst_->graph();
    const int q = alphabet();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(state_count() + 2 * g.edge_count() * q);
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
      std::size_t d = g.degree(v);
      if (d == 0) {
        for (int b = 0; b < q; ++b) trips.emplace_back(index(v, b), index(v, b), 1.0);
        continue;
      }
      double w = 1.0 / (2.0 * static_cast<double>(d));
      for (int b = 0; b < q; ++b) trips.emplace_back(index(v, b), index(v, b), 0.5);
      auto inc = g.incident(v);
      for (std::size_t i = 0; i < d; ++i) {
        const Label* img = inst_->oriented_image(v, i);
        for (int b = 0; b < q; ++b) trips.emplace_back(index(v, b), index(inc[i].endpoint, img[b]), w);
      }
    }
    Eigen::SparseMatrix<double, Eigen::RowMajor> m(state_count(), state_count());
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
  }

 private:
  const UGInstance* inst_;
};

/// Exact Personalized PageRank on the lift: pr_x(t) = zeta sum_l lambda^l M^l(x, t) with
/// zeta = 1/(L+1), lambda = L/(L+1). Factors (I - lambda M)^T once; each row is a solve.
class PprExactSolver {
 public:
  PprExactSolver(const LabelLift& lift, double mean, std::size_t guard = kDefaultDenseGuard)
      : states_(lift.state_count()), zeta_(1.0 / (mean + 1.0)) {
    if (!(mean >= 1.0)) throw UsageError("geometric mean L must be >= 1");
    if (states_ > guard) throw GuardError("ppr_exact: nQ", static_cast<double>(states_), static_cast<double>(guard));
    double lambda = mean / (mean + 1.0);
    Eigen::SparseMatrix<double> a(states_, states_);
    a.setIdentity();
    a -= lambda * Eigen::SparseMatrix<double>(lift.transition().transpose());
    a.makeCompressed();
    lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    lu_->compute(a);
    if (lu_->info() != Eigen::Success) throw std::runtime_error("ppr_exact: factorization failed");
  }

  std::size_t state_count() const noexcept { return states_; }

  /// pr_x as a dense vector over all lifted states.
  Eigen::VectorXd row(std::size_t x) const {
    if (x >= states_) throw UsageError("lifted state out of range");
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(states_));
    rhs[static_cast<Eigen::Index>(x)] = zeta_;
    return lu_->solve(rhs);
  }

 private:
  std::size_t states_;
  double zeta_;
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

inline Eigen::VectorXd ppr_exact(const LabelLift& lift, std::size_t x, double mean,
                                 std::size_t guard = kDefaultDenseGuard) {
  return PprExactSolver(lift, mean, guard).row(x);
}

/// Endpoint law u_{L,s} of the base lazy walk, read off the lift as a label marginal.
inline std::vector<double> endpoint_law(const LabelLift& lift, const Eigen::VectorXd& row) {
  std::size_t n = lift.instance().graph().vertex_count();
  std::vector<double> u(n, 0.0);
  for (std::size_t s = 0; s < lift.state_count(); ++s) u[lift.vertex_of(s)] += row[static_cast<Eigen::Index>(s)];
  return u;
}

}  // namespace tolerant
