#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "tolerant/generators.hpp"
#include "tolerant/lift.hpp"

namespace tolerant {
namespace {

UGInstance random_instance(std::size_t n, std::size_t m, int q, Rng& rng) {
  Multigraph g = random_multigraph(n, m, rng);
  std::vector<Permutation> perms;
  for (std::size_t e = 0; e < m; ++e) perms.push_back(Permutation::random(q, rng));
  return UGInstance(std::move(g), q, perms);
}

TEST(LabelLift, SelfLoopHoldsHalfAndWeightsAreSymmetric) {
  Rng rng = make_stream(1);
  UGInstance inst = random_instance(6, 11, 3, rng);
  LabelLift lift(inst);
  Eigen::MatrixXd m = Eigen::MatrixXd(lift.transition());
  for (std::size_t s = 0; s < lift.state_count(); ++s) {
    EXPECT_NEAR(m.row(s).sum(), 1.0, 1e-15);
    if (inst.graph().degree(lift.vertex_of(s)) > 0) {
      EXPECT_GE(m(s, s), 0.5);
    }
  }
  // Lifted weights D(x) M(x,y) are symmetric.
  for (std::size_t x = 0; x < lift.state_count(); ++x)
    for (std::size_t y = 0; y < lift.state_count(); ++y)
      EXPECT_NEAR(lift.lifted_degree(x) * m(x, y), lift.lifted_degree(y) * m(y, x), 1e-14);
  EXPECT_DOUBLE_EQ(lift.volume(), 4.0 * 3 * 11);
}

TEST(LabelLift, SelfLoopIsExactlyHalfWithoutParallelLoops) {
  UGInstance inst = UGInstance::parity(cycle_graph(5));
  LabelLift lift(inst);
  Eigen::MatrixXd m = Eigen::MatrixXd(lift.transition());
  for (std::size_t s = 0; s < lift.state_count(); ++s) EXPECT_EQ(m(s, s), 0.5);
}

TEST(PprExact, IsolatedStateKeepsAllMass) {
  UGInstance inst = UGInstance::parity(Multigraph(1, {}));
  LabelLift lift(inst);
  Eigen::VectorXd pr = ppr_exact(lift, lift.index(0, 1), 7.0);
  EXPECT_NEAR(pr[1], 1.0, 1e-14);
  EXPECT_NEAR(pr[0], 0.0, 1e-14);
}

TEST(PprExact, K2ParityGeometricSeries) {
  // The lift splits into {(0,0),(1,1)} and {(0,1),(1,0)}; inside a class M^l = 1/2 for
  // l >= 1, so pr_x(x) = zeta + lambda / 2.
  UGInstance k2 = UGInstance::parity(complete_graph(2));
  LabelLift lift(k2);
  for (double L : {1.0, 3.0, 10.0}) {
    double zeta = 1.0 / (L + 1), lambda = L / (L + 1);
    Eigen::VectorXd pr = ppr_exact(lift, lift.index(0, 0), L);
    EXPECT_NEAR(pr[lift.index(0, 0)], zeta + lambda / 2, 1e-14);
    EXPECT_NEAR(pr[lift.index(1, 1)], lambda / 2, 1e-14);
    EXPECT_NEAR(pr[lift.index(0, 1)], 0.0, 1e-14);
    EXPECT_NEAR(pr[lift.index(1, 0)], 0.0, 1e-14);
  }
  EXPECT_NEAR(ppr_exact(lift, 0, 1.0)[0], 0.75, 1e-14);
}

TEST(PprExact, StochasticReversibleAndMarginal) {
  Rng rng = make_stream(2);
  for (int trial = 0; trial < 10; ++trial) {
    UGInstance inst = random_instance(7, 12, 3, rng);
    LabelLift lift(inst);
    double L = 1.0 + 10.0 * uniform01(rng);
    PprExactSolver solver(lift, L);
    std::size_t n = lift.state_count();
    Eigen::MatrixXd rows(n, n);
    for (std::size_t x = 0; x < n; ++x) rows.row(x) = solver.row(x).transpose();
    for (std::size_t x = 0; x < n; ++x) {
      EXPECT_NEAR(rows.row(x).sum(), 1.0, 1e-12);
      EXPECT_GE(rows.row(x).minCoeff(), -1e-15);
      for (std::size_t t = 0; t < n; ++t) {
        if (inst.graph().degree(lift.vertex_of(x)) == 0 || inst.graph().degree(lift.vertex_of(t)) == 0) continue;
        EXPECT_NEAR(lift.lifted_degree(x) * rows(x, t), lift.lifted_degree(t) * rows(t, x), 1e-10);
      }
    }
    // Label marginals from (s, a) do not depend on a.
    for (VertexId s = 0; s < 7; ++s) {
      auto u0 = endpoint_law(lift, rows.row(lift.index(s, 0)).transpose());
      for (int a = 1; a < 3; ++a) {
        auto ua = endpoint_law(lift, rows.row(lift.index(s, static_cast<Label>(a))).transpose());
        for (std::size_t v = 0; v < 7; ++v) EXPECT_NEAR(u0[v], ua[v], 1e-12);
      }
    }
  }
}

TEST(PprExact, GuardAndDomain) {
  UGInstance big = UGInstance::identity(cycle_graph(1001), 4);
  LabelLift lift(big);
  EXPECT_THROW(ppr_exact(lift, 0, 2.0), GuardError);
  UGInstance k2 = UGInstance::parity(complete_graph(2));
  LabelLift small(k2);
  EXPECT_THROW(ppr_exact(small, 0, 0.5), UsageError);
  EXPECT_THROW(PprExactSolver(small, 2.0).row(4), UsageError);
}

}  // namespace
}  // namespace tolerant
