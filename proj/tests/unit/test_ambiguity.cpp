#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "tolerant/ambiguity.hpp"
#include "tolerant/generators.hpp"

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

SubroutineParams calibrated(double beta, double depth = 32768.0) {
  SubroutineParams p;
  p.beta = beta;
  p.c_eta = 2.0;
  p.c_tau = 0.05;
  p.trial_constant = 2.0;
  p.push_depth = depth;
  return p;
}

Eigen::VectorXd random_subdistribution(std::size_t states, Rng& rng) {
  Eigen::VectorXd p(static_cast<Eigen::Index>(states));
  for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = uniform01(rng);
  return p / (p.sum() * (1.0 + uniform01(rng)));
}

TEST(AmbiguityFunctional, Basics) {
  Eigen::VectorXd p(6);
  p << 0.2, 0.1, 0.0, 0.3, 0.25, 0.15;
  EXPECT_NEAR(ambiguity_functional(p, 2), 0.1 + 0.0 + 0.15, 1e-15);
  EXPECT_NEAR(ambiguity_functional(p, 3), 0.1 + 0.0 + 0.25 + 0.15, 1e-15);
  EXPECT_EQ(ambiguity_functional(Eigen::VectorXd::Zero(4), 2), 0.0);
}

TEST(AmbiguityFunctional, Superadditive) {
  Rng rng = make_stream(1);
  for (int trial = 0; trial < 500; ++trial) {
    int q = 2 + trial % 3;
    std::size_t states = static_cast<std::size_t>(q) * (1 + uniform_index(rng, 10));
    Eigen::VectorXd a = random_subdistribution(states, rng), b = random_subdistribution(states, rng);
    EXPECT_GE(ambiguity_functional(Eigen::VectorXd(a + b), q),
              ambiguity_functional(a, q) + ambiguity_functional(b, q) - 1e-14);
  }
}

TEST(AmbiguityFunctional, MonotoneUnderPermutationKernels) {
  Rng rng = make_stream(2);
  for (int trial = 0; trial < 300; ++trial) {
    int q = 2 + trial % 3;
    std::size_t n = 2 + uniform_index(rng, 8);
    std::size_t states = n * static_cast<std::size_t>(q);
    // Each vertex v moves to (w, Pi) with weight k(v, w, Pi); labels are carried by Pi.
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(states), static_cast<Eigen::Index>(states));
    for (std::size_t v = 0; v < n; ++v) {
      std::vector<std::pair<std::size_t, Permutation>> moves;
      std::vector<double> w;
      for (int j = 0; j < 3; ++j) {
        moves.emplace_back(uniform_index(rng, n), Permutation::random(q, rng));
        w.push_back(uniform01(rng) + 0.01);
      }
      double total = w[0] + w[1] + w[2];
      for (int j = 0; j < 3; ++j)
        for (int b = 0; b < q; ++b)
          k(static_cast<Eigen::Index>(v * q + b),
            static_cast<Eigen::Index>(moves[j].first * q + moves[j].second(static_cast<Label>(b)))) += w[j] / total;
    }
    Eigen::VectorXd p = random_subdistribution(states, rng);
    Eigen::VectorXd pk = k.transpose() * p;
    EXPECT_GE(ambiguity_functional(pk, q), ambiguity_functional(p, q) - 1e-14);
  }
}

TEST(AmbiguityExact, NonDecreasingInL) {
  Rng rng = make_stream(3);
  const std::vector<double> grid{1, 1.5, 2, 3, 5, 8, 13, 21};
  for (int trial = 0; trial < 50; ++trial) {
    int q = 2 + trial % 3;
    UGInstance inst = connected_instance(8, 12, q, rng);
    VertexId s = static_cast<VertexId>(uniform_index(rng, 8));
    double prev = 0.0;
    for (double L : grid) {
      double mu = mu_ug_exact(inst, s, L);
      EXPECT_GE(mu, prev - 1e-12) << trial << " L=" << L;
      prev = mu;
    }
  }
}

TEST(AmbiguityExact, OverlapMatchesParityLift) {
  Rng rng = make_stream(4);
  for (int trial = 0; trial < 30; ++trial) {
    Multigraph g = random_graph(9, 14, rng);
    UGInstance par = UGInstance::parity(g);
    double L = 1.0 + 10.0 * uniform01(rng);
    AmbiguityExact ex(par, L);
    OverlapExact ov(g, L);
    for (VertexId s = 0; s < 9; ++s) {
      EXPECT_NEAR(ov.overlap(s), ex.mu(s), 1e-12);
      EXPECT_NEAR(ex.amb(s, 0), ex.amb(s, 1), 1e-12);
    }
  }
}

TEST(AmbiguityExact, ReferenceInstances) {
  EXPECT_GT(mu_ug_exact(UGInstance::parity(complete_graph(3)), 0, 4.0), 0.05);
  EXPECT_NEAR(mu_ug_exact(UGInstance::parity(cycle_graph(8)), 0, 10.0), 0.0, 1e-14);
  Rng rng = make_stream(5);
  EXPECT_NEAR(mu_ug_exact(UGInstance::parity(random_bipartite_regular_graph(10, 3, rng)), 3, 10.0), 0.0, 1e-14);
  PlantedInstance p = planted_ug(FamilySpec{"planted", 20, 4, 0, 3, 0.0, 7, 0});
  AmbiguityExact ex(p.instance, 6.0);
  for (VertexId s = 0; s < 20; ++s) EXPECT_NEAR(ex.mu(s), 0.0, 1e-13);
  EXPECT_NEAR(ex.pi_average_mu(), 0.0, 1e-13);
}

TEST(AmbiguityExact, PlantedNoiseRaisesAmbiguity) {
  PlantedInstance clean = planted_ug(FamilySpec{"planted", 40, 4, 0, 2, 0.0, 9, 0});
  PlantedInstance noisy = planted_ug(FamilySpec{"planted", 40, 4, 0, 2, 0.1, 9, 0});
  EXPECT_GT(AmbiguityExact(noisy.instance, 6.0).pi_average_mu(), AmbiguityExact(clean.instance, 6.0).pi_average_mu());
}

TEST(AmbiguityTest, HighOnOddClique) {
  UGInstance inst = UGInstance::parity(complete_graph(5));
  OracleHandle o(inst);
  SubroutineParams params = calibrated(0.2);
  Rng rng = make_stream(6);
  AmbiguityReport rep = ug_ambiguity_test(o, 0, 4.0, params, rng);
  double exact = mu_ug_exact(inst, 0, 4.0);
  ASSERT_EQ(rep.values.size(), 2u);
  EXPECT_EQ(rep.verdict, Verdict::high);
  EXPECT_NEAR(rep.mu, exact, 0.05);
  EXPECT_EQ(rep.mode, "ug");
  EXPECT_GT(rep.queries.total(), 0u);
  EXPECT_EQ(rep.queries.constrained_neighbor > 0, true);

  Rng rng2 = make_stream(6);
  AmbiguityReport ov = overlap_test(o, 0, 4.0, params, rng2);
  EXPECT_EQ(ov.mode, "overlap");
  EXPECT_EQ(ov.verdict, Verdict::high);
  EXPECT_EQ(ov.queries.constrained_neighbor, 0u);
}

TEST(AmbiguityTest, LowOnBipartiteAndConsistent) {
  Rng g = make_stream(7);
  UGInstance bip = UGInstance::parity(random_bipartite_regular_graph(12, 3, g));
  OracleHandle o(bip);
  SubroutineParams params = calibrated(0.2);
  Rng rng = make_stream(8);
  AmbiguityReport rep = overlap_test(o, 2, 6.0, params, rng);
  EXPECT_EQ(rep.verdict, Verdict::low);
  for (double v : rep.values) EXPECT_EQ(v, 0.0);

  PlantedInstance p = planted_ug(FamilySpec{"planted", 24, 4, 0, 3, 0.0, 2, 0});
  OracleHandle op(p.instance);
  Rng rng2 = make_stream(9);
  AmbiguityReport rp = ug_ambiguity_test(op, 5, 6.0, params, rng2);
  EXPECT_EQ(rp.verdict, Verdict::low);
  EXPECT_EQ(rp.values.size(), 3u);
}

TEST(AmbiguityTest, EstimatesTrackExactValues) {
  Rng rng = make_stream(10);
  SubroutineParams params = calibrated(0.2, 256.0);
  params.trial_constant = 8.0;
  for (int trial = 0; trial < 6; ++trial) {
    UGInstance inst = connected_instance(10, 18, 2 + trial % 2, rng);
    OracleHandle o(inst);
    AmbiguityExact ex(inst, 5.0);
    AmbiguityReport rep = ug_ambiguity_test(o, 0, 5.0, params, rng);
    for (int a = 0; a < inst.alphabet(); ++a) EXPECT_NEAR(rep.values[a], ex.amb(0, static_cast<Label>(a)), 0.05);
  }
}

TEST(AmbiguityTest, Deterministic) {
  UGInstance inst = UGInstance::parity(complete_graph(7));
  SubroutineParams params = calibrated(0.3, 1.0);
  OracleHandle o1(inst), o2(inst);
  Rng r1 = make_stream(11), r2 = make_stream(11);
  EXPECT_EQ(ug_ambiguity_test(o1, 3, 3.0, params, r1).to_json().dump(),
            ug_ambiguity_test(o2, 3, 3.0, params, r2).to_json().dump());
}

TEST(AmbiguityTest, RejectsBadParameters) {
  UGInstance inst = UGInstance::parity(complete_graph(3));
  OracleHandle o(inst);
  Rng rng = make_stream(12);
  SubroutineParams bad;
  bad.beta = 1.5;
  EXPECT_THROW(ug_ambiguity_test(o, 0, 2.0, bad, rng), UsageError);
  bad.beta = 0.1;
  bad.delta = 0.5;
  EXPECT_THROW(ug_ambiguity_test(o, 0, 2.0, bad, rng), UsageError);
  SubroutineParams ok;
  EXPECT_THROW(ug_ambiguity_test(o, 0, 0.5, ok, rng), UsageError);
}

}  // namespace
}  // namespace tolerant
