#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tolerant/errors.hpp"
#include "tolerant/oracle.hpp"
#include "tolerant/rng.hpp"
#include "tolerant/walks.hpp"

namespace tolerant {

/// Parameters of the bidirectional PageRank point estimator.
struct PprParams {
  double L = 1.0;
  double eta = 0.1;     // relative accuracy, in (0, 1/4)
  double tau_t = 0.0;   // additive threshold for the target, > 0
  double delta = 0.1;   // failure probability, in (0, 1/3)
  std::optional<double> r_max;  // derived from (eta, tau_t, D_t) unless set
  double bernstein_c = 8.0;

  void validate() const {
    if (!(L >= 1.0)) throw UsageError("PprParams: L must be >= 1");
    if (!(eta > 0.0 && eta < 0.25)) throw UsageError("PprParams: eta must lie in (0, 1/4)");
    if (!(tau_t > 0.0)) throw UsageError("PprParams: tau_t must be > 0");
    if (!(delta > 0.0 && delta < 1.0 / 3.0)) throw UsageError("PprParams: delta must lie in (0, 1/3)");
    if (r_max && !(*r_max > 0.0)) throw UsageError("PprParams: r_max must be > 0");
    if (!(bernstein_c > 0.0)) throw UsageError("PprParams: bernstein_c must be > 0");
  }

  /// r_max = eta sqrt(tau_t / D_t).
  double resolved_r_max(double target_degree) const {
    return r_max ? *r_max : eta * std::sqrt(tau_t / target_degree);
  }

  /// w = ceil(c D_t r_max / (eta^2 tau_t) log(1/delta)).
  std::uint64_t reverse_walks(double target_degree) const {
    double w = std::ceil(bernstein_c * target_degree * resolved_r_max(target_degree) /
                         (eta * eta * tau_t) * std::log(1.0 / delta));
    return static_cast<std::uint64_t>(std::max(1.0, w));
  }
};

/// Sparse push vectors over lifted states keyed by v * Q + b.
struct ResidualState {
  int alphabet = 2;
  std::unordered_map<std::uint64_t, double> p;
  std::unordered_map<std::uint64_t, double> r;
  std::uint64_t pushes = 0;

  std::uint64_t key(VertexId v, Label b) const noexcept {
    return static_cast<std::uint64_t>(v) * static_cast<std::uint64_t>(alphabet) + b;
  }
  double p_at(VertexId v, Label b) const {
    auto it = p.find(key(v, b));
    return it == p.end() ? 0.0 : it->second;
  }
  double r_at(VertexId v, Label b) const {
    auto it = r.find(key(v, b));
    return it == r.end() ? 0.0 : it->second;
  }
  /// ||r||_1 computed in key order, so the value does not depend on hashing.
  double residual_mass() const {
    std::vector<std::pair<std::uint64_t, double>> items(r.begin(), r.end());
    std::sort(items.begin(), items.end());
    double s = 0.0;
    for (const auto& [k, v] : items) s += v;
    return s;
  }
  bool residual_empty() const {
    for (const auto& [k, v] : r)
      if (v != 0.0) return false;
    return true;
  }
};

struct NoPushObserver {
  void operator()(const ResidualState&, LiftState) const noexcept {}
};

/// Forward push from x on the lift: while some state u has r(u) > r_max D_u, move
/// zeta r(u) into p(u) and spread lambda r(u) along one lifted step. States are served
/// FIFO. `observer(state, u)` runs after every push.
template <AdjacencyOracle Oracle, typename Observer = NoPushObserver>
ResidualState forward_push(WalkContext<Oracle>& ctx, LiftState x, double mean, double r_max,
                           Observer&& observer = {}) {
  if (!(r_max > 0.0)) throw UsageError("forward_push: r_max must be > 0");
  if (!(mean >= 1.0)) throw UsageError("forward_push: L must be >= 1");
  const double zeta = 1.0 / (mean + 1.0);
  const double lambda = mean / (mean + 1.0);
  ResidualState st;
  st.alphabet = ctx.alphabet();
  st.r[st.key(x.vertex, x.label)] = 1.0;

  std::deque<LiftState> queue;
  std::unordered_set<std::uint64_t> queued;
  auto over = [&](LiftState u, double ru) {
    return ru > r_max * 2.0 * static_cast<double>(ctx.degree(u.vertex));
  };
  auto offer = [&](LiftState u, double ru) {
    std::uint64_t k = st.key(u.vertex, u.label);
    if (!queued.count(k) && over(u, ru)) {
      queued.insert(k);
      queue.push_back(u);
    }
  };
  offer(x, 1.0);
  while (!queue.empty()) {
    LiftState u = queue.front();
    queue.pop_front();
    std::uint64_t ku = st.key(u.vertex, u.label);
    queued.erase(ku);
    double rho = st.r[ku];
    if (!over(u, rho)) continue;
    std::size_t d = ctx.degree(u.vertex);
    st.p[ku] += zeta * rho;
    // The self-loop returns half of the spread mass to u itself.
    st.r[ku] = lambda * rho * 0.5;
    double share = lambda * rho / (2.0 * static_cast<double>(d));
    for (std::size_t i = 1; i <= d; ++i) {
      auto [w, c] = ctx.traverse(u.vertex, i, u.label);
      double& rw = st.r[st.key(w, c)];
      rw += share;
      offer({w, c}, rw);
    }
    offer(u, st.r[ku]);
    ++st.pushes;
    observer(static_cast<const ResidualState&>(st), u);
  }
  return st;
}

/// Mean of w reverse samples Z = D_t r(Y) / D_Y with Y ~ pr_t; unbiased for
/// sum_y r(y) pr_y(t) by lifted reversibility.
template <AdjacencyOracle Oracle>
double reverse_residual_estimate(WalkContext<Oracle>& ctx, const ResidualState& st, LiftState t,
                                 double mean, std::uint64_t walks, Rng& rng) {
  if (walks == 0 || st.residual_empty()) return 0.0;
  double dt = 2.0 * static_cast<double>(ctx.degree(t.vertex));
  double sum = 0.0;
  for (std::uint64_t k = 0; k < walks; ++k) {
    LiftState y = run_lifted_walk(ctx, t, mean, rng);
    double ry = st.r_at(y.vertex, y.label);
    if (ry != 0.0) sum += dt * ry / (2.0 * static_cast<double>(ctx.degree(y.vertex)));
  }
  return sum / static_cast<double>(walks);
}

/// All Q targets (v, 0..Q-1) at once: one base walk from v with full transport serves
/// every target label, since the lifted walk from (v, b) ends at (Y, Pi(b)).
template <AdjacencyOracle Oracle>
std::vector<double> reverse_residual_estimate_all(WalkContext<Oracle>& ctx, const ResidualState& st,
                                                  VertexId v, double mean, std::uint64_t walks,
                                                  Rng& rng) {
  const int q = ctx.alphabet();
  std::vector<double> sum(static_cast<std::size_t>(q), 0.0);
  if (walks == 0 || st.residual_empty()) return sum;
  double dt = 2.0 * static_cast<double>(ctx.degree(v));
  for (std::uint64_t k = 0; k < walks; ++k) {
    WalkOutcome w = run_geometric_walk(ctx, v, mean, rng);
    double dy = 0.0;
    for (int b = 0; b < q; ++b) {
      double ry = st.r_at(w.endpoint, w.transport(static_cast<Label>(b)));
      if (ry == 0.0) continue;
      if (dy == 0.0) dy = 2.0 * static_cast<double>(ctx.degree(w.endpoint));
      sum[b] += dt * ry / dy;
    }
  }
  for (double& s : sum) s /= static_cast<double>(walks);
  return sum;
}

struct PprEstimate {
  double value = 0.0;
  double push_mass = 0.0;      // p(t)
  double residual_term = 0.0;  // reverse estimate of sum_y r(y) pr_y(t)
  std::uint64_t walks = 0;
  double r_max = 0.0;
};

/// Point estimate of pr_x(t) from an existing push state (pushed with `r_max`).
template <AdjacencyOracle Oracle>
PprEstimate ppr_point_estimate_from(WalkContext<Oracle>& ctx, const ResidualState& st, LiftState t,
                                    const PprParams& params, double r_max, Rng& rng) {
  double dt = 2.0 * static_cast<double>(ctx.degree(t.vertex));
  PprParams eff = params;
  eff.r_max = r_max;
  PprEstimate est;
  est.r_max = r_max;
  est.push_mass = st.p_at(t.vertex, t.label);
  est.walks = st.residual_empty() ? 0 : eff.reverse_walks(dt);
  est.residual_term = reverse_residual_estimate(ctx, st, t, params.L, est.walks, rng);
  est.value = est.push_mass + est.residual_term;
  return est;
}

/// Forward push from x, then reverse sampling from t.
template <AdjacencyOracle Oracle>
PprEstimate ppr_point_estimate(WalkContext<Oracle>& ctx, LiftState x, LiftState t,
                               const PprParams& params, Rng& rng) {
  params.validate();
  double dt = 2.0 * static_cast<double>(ctx.degree(t.vertex));
  double r_max = params.resolved_r_max(dt);
  ResidualState st = forward_push(ctx, x, params.L, r_max);
  return ppr_point_estimate_from(ctx, st, t, params, r_max, rng);
}

}  // namespace tolerant
