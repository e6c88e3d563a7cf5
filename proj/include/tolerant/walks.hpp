#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "tolerant/errors.hpp"
#include "tolerant/oracle.hpp"
#include "tolerant/permutation.hpp"
#include "tolerant/rng.hpp"

namespace tolerant {

/// How labels travel along traversed edges.
///  - constrained: constrained-neighbor queries, label mapped by pi_uv.
///  - parity: plain neighbor queries, every traversal flips the label of [2].
enum class LabelMode { constrained, parity };

/// Oracle plus the per-task degree cache every walk routine shares.
template <AdjacencyOracle Oracle>
class WalkContext {
 public:
  WalkContext(Oracle& oracle, LabelMode mode) : oracle_(&oracle), degrees_(oracle), mode_(mode) {}

  Oracle& oracle() noexcept { return *oracle_; }
  LabelMode mode() const noexcept { return mode_; }
  int alphabet() const noexcept { return mode_ == LabelMode::parity ? 2 : oracle_->alphabet(); }

  std::size_t degree(VertexId v) { return degrees_(v); }

  /// Traverses the i-th (1-based) entry of v carrying label b; one query.
  std::pair<VertexId, Label> traverse(VertexId v, std::size_t i, Label b) {
    if (mode_ == LabelMode::constrained) return oracle_->constrained_step(v, i, b);
    return {oracle_->neighbor(v, i), static_cast<Label>(b ^ 1)};
  }

  /// Traverses without tracking a label; one neighbor query.
  VertexId traverse_endpoint(VertexId v, std::size_t i) { return oracle_->neighbor(v, i); }

 private:
  Oracle* oracle_;
  DegreeCache<Oracle> degrees_;
  LabelMode mode_;
};

/// Geometric stopping time with mean L: Pr[T = t] = (1/(L+1)) (L/(L+1))^t, drawn by
/// inverse CDF from one 64-bit uniform.
inline std::uint64_t sample_geometric(double mean, Rng& rng) {
  if (!(mean >= 1.0)) throw UsageError("geometric mean L must be >= 1");
  double u = uniform_open_closed(rng);
  double t = std::floor(std::log(u) / std::log(mean / (mean + 1.0)));
  if (!(t < 9.0e18)) return std::numeric_limits<std::uint64_t>::max() / 2;
  return static_cast<std::uint64_t>(t);
}

struct LazyStep {
  VertexId next = 0;
  bool moved = false;
  std::uint32_t index = 0;  // 0-based adjacency entry when moved
  Permutation transport;
};

/// With probability 1/2 hold (identity); otherwise traverse a uniform incident edge copy.
template <AdjacencyOracle Oracle>
LazyStep lazy_step(WalkContext<Oracle>& ctx, VertexId v, Rng& rng) {
  const int q = ctx.alphabet();
  if (!fair_coin(rng)) return {v, false, 0, Permutation::identity(q)};
  std::size_t d = ctx.degree(v);
  if (d == 0) throw UsageError("lazy step from an isolated vertex");
  auto i = static_cast<std::uint32_t>(uniform_index(rng, d));
  if (ctx.mode() == LabelMode::parity)
    return {ctx.traverse_endpoint(v, i + 1), true, i, Permutation::transposition()};
  ConstrainedEntry e = ctx.oracle().constrained_neighbor(v, i + 1);
  return {e.endpoint, true, i, e.constraint};
}

struct WalkOutcome {
  VertexId endpoint = 0;
  Permutation transport;
  std::uint64_t length = 0;
  int parity = +1;  // (-1)^(number of real traversals)
};

/// Lazy walk from s stopped at an independent geometric time with mean L. When
/// `record` is given the path taken is stored there.
template <AdjacencyOracle Oracle>
WalkOutcome run_geometric_walk(WalkContext<Oracle>& ctx, VertexId s, double mean, Rng& rng,
                               LazyPath* record = nullptr) {
  std::uint64_t t = sample_geometric(mean, rng);
  WalkOutcome out{s, Permutation::identity(ctx.alphabet()), t, +1};
  if (record) {
    record->start = s;
    record->steps.clear();
  }
  for (std::uint64_t k = 0; k < t; ++k) {
    LazyStep step = lazy_step(ctx, out.endpoint, rng);
    if (step.moved) {
      out.transport = compose(step.transport, out.transport);
      out.parity = -out.parity;
    }
    out.endpoint = step.next;
    if (record) record->steps.push_back({step.moved, step.index});
  }
  return out;
}

/// Endpoint of a geometric lazy walk, labels ignored (neighbor queries only).
template <AdjacencyOracle Oracle>
VertexId sample_walk_endpoint(WalkContext<Oracle>& ctx, VertexId s, double mean, Rng& rng) {
  std::uint64_t t = sample_geometric(mean, rng);
  VertexId at = s;
  for (std::uint64_t k = 0; k < t; ++k) {
    if (!fair_coin(rng)) continue;
    std::size_t d = ctx.degree(at);
    at = ctx.traverse_endpoint(at, 1 + uniform_index(rng, d));
  }
  return at;
}

struct LiftState {
  VertexId vertex = 0;
  Label label = 0;
  friend bool operator==(const LiftState&, const LiftState&) = default;
};

/// Geometric walk on the label lift from (v, b); only the carried label is tracked.
template <AdjacencyOracle Oracle>
LiftState run_lifted_walk(WalkContext<Oracle>& ctx, LiftState start, double mean, Rng& rng) {
  std::uint64_t t = sample_geometric(mean, rng);
  LiftState at = start;
  for (std::uint64_t k = 0; k < t; ++k) {
    if (!fair_coin(rng)) continue;
    std::size_t d = ctx.degree(at.vertex);
    auto [w, c] = ctx.traverse(at.vertex, 1 + uniform_index(rng, d), at.label);
    at = {w, c};
  }
  return at;
}

struct TraceReturn {
  VertexId vertex = 0;
  Permutation transport;  // composed transport of the whole prefix
  std::uint64_t time = 0; // ordinary lazy-walk time H_j
};

struct TraceRun {
  std::vector<TraceReturn> returns;
  bool truncated = false;
  std::uint64_t steps = 0;
};

inline constexpr std::uint64_t kDefaultTraceStepCap = 10'000'000;

/// Records the first k returns to R of a lazy walk from s in R. Stops early, flagging
/// `truncated`, if the step cap is reached first.
template <AdjacencyOracle Oracle, typename InR>
TraceRun run_trace(WalkContext<Oracle>& ctx, VertexId s, InR&& in_r, std::size_t k, Rng& rng,
                   std::uint64_t step_cap = kDefaultTraceStepCap) {
  if (!in_r(s)) throw UsageError("trace walks must start inside R");
  TraceRun run;
  run.returns.reserve(k);
  VertexId at = s;
  Permutation acc = Permutation::identity(ctx.alphabet());
  while (run.returns.size() < k) {
    if (run.steps >= step_cap) {
      run.truncated = true;
      break;
    }
    LazyStep step = lazy_step(ctx, at, rng);
    ++run.steps;
    if (step.moved) acc = compose(step.transport, acc);
    at = step.next;
    if (in_r(at)) run.returns.push_back({at, acc, run.steps});
  }
  return run;
}

}  // namespace tolerant
