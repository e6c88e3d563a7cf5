#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "tolerant/generators.hpp"
#include "tolerant/lift.hpp"
#include "tolerant/push.hpp"

namespace tolerant {
namespace {

UGInstance connected_instance(std::size_t n, std::size_t m, int q, Rng& rng) {
  for (;;) {
    Multigraph g = random_graph(n, m, rng);
    if (g.has_isolated_vertices()) continue;
    std::vector<Permutation> perms;
    for (std::size_t e = 0; e < m; ++e) perms.push_back(Permutation::random(q, rng));
    return UGInstance(std::move(g), q, perms);
  }
}

Eigen::MatrixXd all_rows(const LabelLift& lift, double L) {
  PprExactSolver solver(lift, L);
  Eigen::MatrixXd rows(lift.state_count(), lift.state_count());
  for (std::size_t x = 0; x < lift.state_count(); ++x) rows.row(x) = solver.row(x).transpose();
  return rows;
}

/// sum_y r(y) pr_y(t) from the exact rows.
double residual_term(const ResidualState& st, const Eigen::MatrixXd& rows, std::size_t t) {
  double s = 0.0;
  for (const auto& [k, r] : st.r) s += r * rows(static_cast<Eigen::Index>(k), t);
  return s;
}

TEST(ForwardPush, LargeThresholdDoesNothing) {
  UGInstance inst = UGInstance::parity(cycle_graph(5));
  OracleHandle o(inst);
  WalkContext ctx(o, LabelMode::constrained);
  ResidualState st = forward_push(ctx, {2, 1}, 4.0, 1.0 / 4.0);
  EXPECT_EQ(st.pushes, 0u);
  EXPECT_TRUE(st.p.empty());
  EXPECT_DOUBLE_EQ(st.r_at(2, 1), 1.0);
  EXPECT_DOUBLE_EQ(st.residual_mass(), 1.0);
  EXPECT_THROW(forward_push(ctx, {2, 1}, 4.0, 0.0), UsageError);
}

TEST(ForwardPush, InvariantHoldsAtEveryIntermediateState) {
  Rng rng = make_stream(1);
  for (int trial = 0; trial < 6; ++trial) {
    int q = trial % 2 == 0 ? 2 : 3;
    UGInstance inst = connected_instance(q == 2 ? 10 : 7, 14, q, rng);
    LabelLift lift(inst);
    double L = 2.0 + trial;
    Eigen::MatrixXd rows = all_rows(lift, L);
    OracleHandle o(inst);
    WalkContext ctx(o, LabelMode::constrained);
    LiftState x{static_cast<VertexId>(trial % 5), 0};
    std::size_t xs = lift.index(x.vertex, x.label);
    double last_mass = 1.0;
    double worst = 0.0;
    int checks = 0;
    auto observer = [&](const ResidualState& st, LiftState) {
      for (std::size_t t = 0; t < lift.state_count(); ++t) {
        double lhs = st.p_at(lift.vertex_of(t), lift.label_of(t)) + residual_term(st, rows, t);
        worst = std::max(worst, std::abs(lhs - rows(xs, t)));
      }
      double mass = st.residual_mass();
      EXPECT_LE(mass, last_mass + 1e-15);
      last_mass = mass;
      for (const auto& [k, v] : st.p) EXPECT_GE(v, 0.0);
      for (const auto& [k, v] : st.r) EXPECT_GE(v, 0.0);
      ++checks;
    };
    double r_max = 1e-3;
    ResidualState st = forward_push(ctx, x, L, r_max, observer);
    EXPECT_GT(checks, 10);
    EXPECT_LT(worst, 1e-12);
    for (const auto& [k, r] : st.r) EXPECT_LE(r, r_max * lift.lifted_degree(k) + 1e-18);
  }
}

TEST(ForwardPush, ParityModeMatchesConstrainedMode) {
  Rng rng = make_stream(2);
  Multigraph g = random_graph(9, 16, rng);
  UGInstance par = UGInstance::parity(g);
  OracleHandle a(par), b(par);
  WalkContext ca(a, LabelMode::constrained), cb(b, LabelMode::parity);
  ResidualState sa = forward_push(ca, {0, 0}, 5.0, 1e-3);
  ResidualState sb = forward_push(cb, {0, 0}, 5.0, 1e-3);
  EXPECT_EQ(sa.pushes, sb.pushes);
  EXPECT_EQ(sa.p, sb.p);
  EXPECT_EQ(sa.r, sb.r);
  EXPECT_EQ(a.stats().constrained_neighbor, b.stats().neighbor);
  EXPECT_EQ(b.stats().constrained_neighbor, 0u);
}

TEST(PointEstimate, EmptyResidualGivesPushMass) {
  UGInstance inst = UGInstance::parity(cycle_graph(4));
  OracleHandle o(inst);
  WalkContext ctx(o, LabelMode::parity);
  ResidualState st;
  st.alphabet = 2;
  st.p[st.key(1, 1)] = 0.375;
  Rng rng = make_stream(3);
  PprParams params{3.0, 0.1, 0.01, 0.1};
  PprEstimate est = ppr_point_estimate_from(ctx, st, {1, 1}, params, 1e-3, rng);
  EXPECT_EQ(est.value, 0.375);
  EXPECT_EQ(est.walks, 0u);
}

TEST(PointEstimate, ReverseSamplesAreUnbiased) {
  Rng rng = make_stream(4);
  UGInstance inst = connected_instance(8, 13, 3, rng);
  LabelLift lift(inst);
  const double L = 4.0;
  Eigen::MatrixXd rows = all_rows(lift, L);
  OracleHandle o(inst);
  WalkContext ctx(o, LabelMode::constrained);
  ResidualState st = forward_push(ctx, {0, 0}, L, 2e-3);
  for (std::size_t t : {lift.index(3, 1), lift.index(5, 2)}) {
    LiftState ts{lift.vertex_of(t), lift.label_of(t)};
    double exact = residual_term(st, rows, t);
    const int samples = 100000;
    double dt = lift.lifted_degree(t);
    double sum = 0.0, sq = 0.0;
    for (int k = 0; k < samples; ++k) {
      LiftState y = run_lifted_walk(ctx, ts, L, rng);
      double z = dt * st.r_at(y.vertex, y.label) / lift.lifted_degree(lift.index(y.vertex, y.label));
      sum += z;
      sq += z * z;
    }
    double mean = sum / samples;
    double se = std::sqrt((sq / samples - mean * mean) / samples);
    EXPECT_NEAR(mean, exact, 3.0 * se + 1e-15);
  }
}

TEST(PointEstimate, CoupledTargetsMatchSingleTargetLaw) {
  Rng rng = make_stream(5);
  UGInstance inst = connected_instance(8, 13, 3, rng);
  LabelLift lift(inst);
  const double L = 3.0;
  Eigen::MatrixXd rows = all_rows(lift, L);
  OracleHandle o(inst);
  WalkContext ctx(o, LabelMode::constrained);
  ResidualState st = forward_push(ctx, {1, 2}, L, 3e-3);
  std::vector<double> est = reverse_residual_estimate_all(ctx, st, 4, L, 100000, rng);
  for (int b = 0; b < 3; ++b) {
    double exact = residual_term(st, rows, lift.index(4, static_cast<Label>(b)));
    EXPECT_NEAR(est[b], exact, 0.05 * exact + 2e-4);
  }
}

TEST(PointEstimate, GuaranteeHoldsOnRandomPairs) {
  Rng rng = make_stream(6);
  int violations = 0;
  const int pairs = 60;
  for (int k = 0; k < pairs; ++k) {
    UGInstance inst = connected_instance(8, 14, 2 + k % 2, rng);
    LabelLift lift(inst);
    double L = 2.0 + 4.0 * uniform01(rng);
    PprExactSolver solver(lift, L);
    std::size_t x = uniform_index(rng, lift.state_count());
    std::size_t t = uniform_index(rng, lift.state_count());
    double exact = solver.row(x)[t];
    OracleHandle o(inst);
    WalkContext ctx(o, LabelMode::constrained);
    double dt = lift.lifted_degree(t);
    PprParams params{L, 0.1, 0.05 * dt / lift.volume(), 0.1};
    PprEstimate est = ppr_point_estimate(ctx, {lift.vertex_of(x), lift.label_of(x)},
                                         {lift.vertex_of(t), lift.label_of(t)}, params, rng);
    violations += std::abs(est.value - exact) > 0.1 * (exact + params.tau_t);
  }
  double sigma = std::sqrt(0.1 * 0.9 / pairs);
  EXPECT_LE(violations / double(pairs), 0.1 + 3.0 * sigma);
}

TEST(PprParams, DerivedQuantities) {
  PprParams p{10.0, 0.1, 0.04, 0.1};
  EXPECT_DOUBLE_EQ(p.resolved_r_max(4.0), 0.1 * std::sqrt(0.01));
  EXPECT_EQ(p.reverse_walks(4.0),
            static_cast<std::uint64_t>(std::ceil(8.0 * 4.0 * 0.01 / (0.01 * 0.04) * std::log(10.0))));
  PprParams bad = p;
  bad.eta = 0.3;
  EXPECT_THROW(bad.validate(), UsageError);
  bad = p;
  bad.delta = 0.5;
  EXPECT_THROW(bad.validate(), UsageError);
}

}  // namespace
}  // namespace tolerant
