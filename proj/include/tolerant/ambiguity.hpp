#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <json.hpp>

#include "tolerant/errors.hpp"
#include "tolerant/lift.hpp"
#include "tolerant/oracle.hpp"
#include "tolerant/push.hpp"
#include "tolerant/rng.hpp"
#include "tolerant/walks.hpp"

namespace tolerant {

/// A(p) = sum_v (sum_b p(v,b) - max_b p(v,b)) for a subdistribution on V x [Q]
/// laid out as v * Q + b.
template <typename Vec>
double ambiguity_functional(const Vec& p, int q) {
  const auto states = static_cast<std::size_t>(p.size());
  double total = 0.0;
  for (std::size_t v = 0; v * q < states; ++v) {
    double sum = 0.0, best = 0.0;
    for (int b = 0; b < q; ++b) {
      double x = p[static_cast<Eigen::Index>(v * q + b)];
      sum += x;
      best = std::max(best, x);
    }
    total += sum - best;
  }
  return total;
}

/// Exact Amb_L(s, a) and mu^UG_L(s) from lifted PageRank rows; one factorization serves
/// every seed.
class AmbiguityExact {
 public:
  AmbiguityExact(const UGInstance& inst, double mean, std::size_t guard = kDefaultDenseGuard)
      : lift_(inst), solver_(lift_, mean, guard) {}

  double amb(VertexId s, Label a) const {
    return std::max(0.0, ambiguity_functional(solver_.row(lift_.index(s, a)), lift_.alphabet()));
  }
  std::vector<double> amb_all(VertexId s) const {
    std::vector<double> out;
    for (int a = 0; a < lift_.alphabet(); ++a) out.push_back(amb(s, static_cast<Label>(a)));
    return out;
  }
  double mu(VertexId s) const {
    auto all = amb_all(s);
    return *std::min_element(all.begin(), all.end());
  }
  /// sum_s pi(s) mu(s).
  double pi_average_mu() const {
    const Multigraph& g = lift_.instance().graph();
    double acc = 0.0;
    for (VertexId s = 0; s < g.vertex_count(); ++s)
      if (g.degree(s) > 0) acc += g.stationary(s) * mu(s);
    return acc;
  }

 private:
  LabelLift lift_;
  PprExactSolver solver_;
};

inline double amb_exact(const UGInstance& inst, VertexId s, Label a, double mean,
                        std::size_t guard = kDefaultDenseGuard) {
  return AmbiguityExact(inst, mean, guard).amb(s, a);
}

inline double mu_ug_exact(const UGInstance& inst, VertexId s, double mean,
                          std::size_t guard = kDefaultDenseGuard) {
  return AmbiguityExact(inst, mean, guard).mu(s);
}

/// Parity overlap sum_v min(p+, p-) on the base graph, computed without the lift: the
/// plain PageRank u = p+ + p- and the signed PageRank g = p+ - p- (a traversal weighs
/// -1) give min(p+, p-) = (u - |g|)/2.
class OverlapExact {
 public:
  OverlapExact(const Multigraph& g, double mean, std::size_t guard = kDefaultDenseGuard)
      : n_(g.vertex_count()), zeta_(1.0 / (mean + 1.0)) {
    if (!(mean >= 1.0)) throw UsageError("geometric mean L must be >= 1");
    if (2 * n_ > guard) throw GuardError("overlap_exact: 2n", 2.0 * n_, static_cast<double>(guard));
    double lambda = mean / (mean + 1.0);
    auto build = [&](double sign) {
      std::vector<Eigen::Triplet<double>> trips;
      for (VertexId v = 0; v < n_; ++v) {
        std::size_t d = g.degree(v);
        trips.emplace_back(v, v, 1.0);
        if (d == 0) {
          trips.emplace_back(v, v, -lambda);
          continue;
        }
        trips.emplace_back(v, v, -lambda * 0.5);
        for (const auto& c : g.incident(v))
          trips.emplace_back(c.endpoint, v, -lambda * sign / (2.0 * static_cast<double>(d)));
      }
      Eigen::SparseMatrix<double> a(n_, n_);
      a.setFromTriplets(trips.begin(), trips.end());
      a.makeCompressed();
      return a;
    };
    plain_.compute(build(+1.0));
    signed_.compute(build(-1.0));
    if (plain_.info() != Eigen::Success || signed_.info() != Eigen::Success)
      throw std::runtime_error("overlap_exact: factorization failed");
  }

  double overlap(VertexId s) const {
    if (s >= n_) throw UsageError("vertex id out of range");
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
    rhs[s] = zeta_;
    Eigen::VectorXd u = plain_.solve(rhs);
    Eigen::VectorXd gsig = signed_.solve(rhs);
    double acc = 0.0;
    for (Eigen::Index v = 0; v < u.size(); ++v) acc += 0.5 * (u[v] - std::abs(gsig[v]));
    return std::max(0.0, acc);
  }

 private:
  std::size_t n_;
  double zeta_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> plain_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> signed_;
};

inline double overlap_exact(const Multigraph& g, VertexId s, double mean,
                            std::size_t guard = kDefaultDenseGuard) {
  return OverlapExact(g, mean, guard).overlap(s);
}

/// Parameters of the per-seed HIGH/LOW subroutine. Derived quantities follow
///   eta = c_eta beta, tau_v = c_tau beta deg(v)/(2Qm), M = ceil(C beta^-2 log(4Q/delta)),
///   gamma = delta / (8 Q^2 M).
struct SubroutineParams {
  double beta = 0.1;
  double delta = 0.1;
  double c_eta = 0.05;
  double c_tau = 0.01;
  double trial_constant = 4.0;
  double bernstein_c = 8.0;
  double eta_cap = 0.2;     // eta is clamped below 1/4
  double push_depth = 1.0;  // r_max divisor; any r_max keeps the estimator contract

  void validate() const {
    if (!(beta > 0.0 && beta < 1.0)) throw UsageError("subroutine: beta must lie in (0, 1)");
    if (!(delta > 0.0 && delta < 1.0 / 3.0)) throw UsageError("subroutine: delta must lie in (0, 1/3)");
    if (!(c_eta > 0.0 && c_tau > 0.0 && trial_constant > 0.0 && bernstein_c > 0.0))
      throw UsageError("subroutine: calibration constants must be positive");
    if (!(eta_cap > 0.0 && eta_cap < 0.25)) throw UsageError("subroutine: eta_cap must lie in (0, 1/4)");
    if (!(push_depth >= 1.0)) throw UsageError("subroutine: push_depth must be >= 1");
  }
  double eta() const { return std::min(c_eta * beta, eta_cap); }
  std::uint64_t trials(int q) const {
    return static_cast<std::uint64_t>(
        std::ceil(trial_constant / (beta * beta) * std::log(4.0 * q / delta)));
  }
  double gamma(int q) const {
    return delta / (8.0 * q * q * static_cast<double>(trials(q)));
  }
  double tau(std::size_t deg, int q, std::size_t m) const {
    return c_tau * beta * static_cast<double>(deg) / (2.0 * q * static_cast<double>(m));
  }
  /// tau_v / D_v does not depend on v, so neither does r_max.
  double r_max(int q, std::size_t m) const {
    return eta() * std::sqrt(c_tau * beta / (4.0 * q * static_cast<double>(m))) / push_depth;
  }
};

enum class Verdict { low, high };

inline const char* verdict_name(Verdict v) { return v == Verdict::high ? "HIGH" : "LOW"; }

struct AmbiguityReport {
  VertexId seed = 0;
  double L = 1.0;
  std::string mode;           // "ug" or "overlap"; "exact" for exact reports
  std::vector<double> values;  // per seed label
  double mu = 0.0;
  double beta = 0.0;
  Verdict verdict = Verdict::low;
  std::uint64_t trials = 0;
  std::uint64_t walks_per_target = 0;
  std::uint64_t pushes = 0;
  QueryStats queries;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["seed"] = seed;
    j["L"] = L;
    j["mode"] = mode;
    j["values"] = values;
    j["mu"] = mu;
    if (mode != "exact") {
      j["beta"] = beta;
      j["verdict"] = verdict_name(verdict);
      j["trials"] = trials;
      j["walks_per_target"] = walks_per_target;
      j["pushes"] = pushes;
    }
    j["queries"] = {{"uniform_vertex", queries.uniform_vertex},
                    {"degree", queries.degree},
                    {"neighbor", queries.neighbor},
                    {"constrained_neighbor", queries.constrained_neighbor},
                    {"total", queries.total()}};
    return j;
  }
};

/// Estimates Amb_L(s, a) for every seed label a and reports HIGH iff the minimum
/// estimate is at least beta/2. Each of the M trials per label samples v from the base
/// walk and estimates the Q lifted targets (v, b) from one cached forward push from
/// (s, a). The walk context decides between constrained (UG) and parity labels.
template <AdjacencyOracle Oracle>
AmbiguityReport ambiguity_test(WalkContext<Oracle>& ctx, VertexId s, double mean,
                               const SubroutineParams& params, Rng& rng) {
  params.validate();
  if (!(mean >= 1.0)) throw UsageError("geometric mean L must be >= 1");
  Oracle& o = ctx.oracle();
  const QueryStats before = o.stats();
  const int q = ctx.alphabet();
  const std::size_t m = o.m();
  const std::uint64_t trials = params.trials(q);
  const double r_max = params.r_max(q, m);

  PprParams ppr;
  ppr.L = mean;
  ppr.eta = params.eta();
  ppr.delta = params.gamma(q);
  ppr.bernstein_c = params.bernstein_c;
  ppr.r_max = r_max;

  AmbiguityReport rep;
  rep.seed = s;
  rep.L = mean;
  rep.mode = ctx.mode() == LabelMode::parity ? "overlap" : "ug";
  rep.beta = params.beta;
  rep.trials = trials;
  const std::uint64_t stream_key = rng();

  for (int a = 0; a < q; ++a) {
    ResidualState st = forward_push(ctx, {s, static_cast<Label>(a)}, mean, r_max);
    rep.pushes += st.pushes;
    const bool residual_empty = st.residual_empty();
    double acc = 0.0;
    for (std::uint64_t j = 0; j < trials; ++j) {
      Rng trial_rng = make_stream(stream_key, {static_cast<std::uint64_t>(a), j});
      VertexId v = sample_walk_endpoint(ctx, s, mean, trial_rng);
      std::size_t dv = ctx.degree(v);
      double d_lift = 2.0 * static_cast<double>(dv);
      ppr.tau_t = params.tau(dv, q, m);
      std::uint64_t walks = residual_empty ? 0 : ppr.reverse_walks(d_lift);
      rep.walks_per_target = std::max(rep.walks_per_target, walks);
      std::vector<double> est = reverse_residual_estimate_all(ctx, st, v, mean, walks, trial_rng);
      double u_hat = 0.0, best = 0.0;
      for (int b = 0; b < q; ++b) {
        est[b] += st.p_at(v, static_cast<Label>(b));
        u_hat += est[b];
        best = std::max(best, est[b]);
      }
      if (u_hat < 2.0 * q * ppr.tau_t) continue;
      acc += std::clamp(1.0 - best / u_hat, 0.0, 1.0);
    }
    rep.values.push_back(acc / static_cast<double>(trials));
  }
  rep.mu = *std::min_element(rep.values.begin(), rep.values.end());
  rep.verdict = rep.mu >= params.beta / 2.0 ? Verdict::high : Verdict::low;
  rep.queries = o.stats() - before;
  return rep;
}

/// UGAmbiguityTest: constrained-neighbor lift.
template <AdjacencyOracle Oracle>
AmbiguityReport ug_ambiguity_test(Oracle& oracle, VertexId s, double mean, const SubroutineParams& params,
                                  Rng& rng) {
  WalkContext<Oracle> ctx(oracle, LabelMode::constrained);
  return ambiguity_test(ctx, s, mean, params, rng);
}

/// OverlapTest: plain neighbor queries, every traversal flips the label.
template <AdjacencyOracle Oracle>
AmbiguityReport overlap_test(Oracle& oracle, VertexId s, double mean, const SubroutineParams& params, Rng& rng) {
  WalkContext<Oracle> ctx(oracle, LabelMode::parity);
  return ambiguity_test(ctx, s, mean, params, rng);
}

/// Exact report in the same schema.
inline AmbiguityReport exact_ambiguity_report(const UGInstance& inst, VertexId s, double mean,
                                              std::size_t guard = kDefaultDenseGuard) {
  AmbiguityExact ex(inst, mean, guard);
  AmbiguityReport rep;
  rep.seed = s;
  rep.L = mean;
  rep.mode = "exact";
  rep.values = ex.amb_all(s);
  rep.mu = *std::min_element(rep.values.begin(), rep.values.end());
  return rep;
}

}  // namespace tolerant
