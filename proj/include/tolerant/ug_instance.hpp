#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tolerant/errors.hpp"
#include "tolerant/graph.hpp"
#include "tolerant/permutation.hpp"

namespace tolerant {

/// A labeling x : V -> [Q].
using Labeling = std::vector<Label>;

/// Unique Games instance: a multigraph plus, for every edge copy, the permutation
/// pi_uv read along its stored orientation u -> v. The reverse orientation carries the
/// inverse, which makes the instance well formed by construction.
class UGInstance {
 public:
  UGInstance() = default;

  /// `forward` holds one permutation per edge copy, for the stored orientation.
  UGInstance(Multigraph graph, int q, const std::vector<Permutation>& forward)
      : graph_(std::move(graph)), q_(q) {
    if (q < 2 || q > kMaxAlphabet) throw UsageError("alphabet size must be in [2, 16]");
    if (forward.size() != graph_.edge_count())
      throw InputError("need exactly one constraint per edge copy");
    forward_.resize(graph_.edge_count() * q_);
    backward_.resize(graph_.edge_count() * q_);
    for (std::size_t e = 0; e < forward.size(); ++e) {
      if (forward[e].size() != q) throw InputError("constraint has the wrong alphabet size");
      for (int b = 0; b < q; ++b) {
        Label c = forward[e](static_cast<Label>(b));
        forward_[e * q_ + b] = c;
        backward_[e * q_ + c] = static_cast<Label>(b);
      }
    }
  }

  /// Q = 2 instance in which every edge carries the transposition (bipartiteness).
  static UGInstance parity(Multigraph graph) {
    std::vector<Permutation> perms(graph.edge_count(), Permutation::transposition());
    return UGInstance(std::move(graph), 2, perms);
  }

  /// All-identity constraints over alphabet Q.
  static UGInstance identity(Multigraph graph, int q) {
    std::vector<Permutation> perms(graph.edge_count(), Permutation::identity(q));
    return UGInstance(std::move(graph), q, perms);
  }

  const Multigraph& graph() const noexcept { return graph_; }
  int alphabet() const noexcept { return q_; }

  /// Image list of pi along the i-th (0-based) adjacency entry of v, oriented v -> w.
  const Label* oriented_image(VertexId v, std::size_t index) const {
    const IncidentCopy& c = graph_.incident(v)[index];
    return (c.forward ? forward_.data() : backward_.data()) + static_cast<std::size_t>(c.edge) * q_;
  }

  /// Permutation of edge copy e read in orientation from -> other endpoint.
  Permutation constraint(EdgeId e, bool forward_orientation) const {
    const Label* img = (forward_orientation ? forward_.data() : backward_.data()) +
                       static_cast<std::size_t>(e) * q_;
    return Permutation::from_image({img, static_cast<std::size_t>(q_)});
  }

  Permutation oriented_constraint(VertexId v, std::size_t index) const {
    return Permutation::from_image({oriented_image(v, index), static_cast<std::size_t>(q_)});
  }

  /// True when Q = 2 and every constraint is the transposition.
  bool is_parity() const {
    if (q_ != 2) return false;
    for (std::size_t e = 0; e < graph_.edge_count(); ++e)
      if (forward_[2 * e] != 1) return false;
    return true;
  }

  /// Whether edge copy e is satisfied: x(v) = pi_uv(x(u)).
  bool satisfied(EdgeId e, const Labeling& x) const {
    const EdgeCopy& ec = graph_.edge(e);
    return forward_[static_cast<std::size_t>(e) * q_ + x[ec.u]] == x[ec.v];
  }

 private:
  Multigraph graph_;
  int q_ = 2;
  std::vector<Label> forward_;
  std::vector<Label> backward_;
};

/// Instance restricted to non-isolated vertices, constraints carried over.
struct StrippedInstance {
  UGInstance instance;
  std::vector<VertexId> original_id;
};

inline std::optional<StrippedInstance> strip_isolated(const UGInstance& inst) {
  auto stripped = strip_isolated(inst.graph());
  if (!stripped) return std::nullopt;
  std::vector<Permutation> perms;
  perms.reserve(inst.graph().edge_count());
  for (std::size_t e = 0; e < inst.graph().edge_count(); ++e)
    perms.push_back(inst.constraint(static_cast<EdgeId>(e), true));
  return StrippedInstance{UGInstance(std::move(stripped->graph), inst.alphabet(), perms),
                          std::move(stripped->original_id)};
}

/// One step of a lazy-walk path: a hold, or a traversal of adjacency entry `index`
/// (0-based) of the current vertex.
struct PathStep {
  bool moved = false;
  std::uint32_t index = 0;
};

struct LazyPath {
  VertexId start = 0;
  std::vector<PathStep> steps;
};

/// Pi_P = pi_{u_{t-1}u_t} o ... o pi_{u_0u_1}, identity factors on holding steps.
inline Permutation label_transport(const UGInstance& inst, const LazyPath& path) {
  Permutation acc = Permutation::identity(inst.alphabet());
  VertexId at = path.start;
  for (const PathStep& step : path.steps) {
    if (!step.moved) continue;
    acc = compose(inst.oriented_constraint(at, step.index), acc);
    at = inst.graph().incident(at)[step.index].endpoint;
  }
  return acc;
}

inline VertexId path_end(const Multigraph& g, const LazyPath& path) {
  VertexId at = path.start;
  for (const PathStep& step : path.steps)
    if (step.moved) at = g.incident(at)[step.index].endpoint;
  return at;
}

/// The same edge copies walked backwards from the path's endpoint.
inline LazyPath reverse_path(const Multigraph& g, const LazyPath& path) {
  std::vector<VertexId> visited{path.start};
  for (const PathStep& step : path.steps)
    visited.push_back(step.moved ? g.incident(visited.back())[step.index].endpoint : visited.back());
  LazyPath rev;
  rev.start = visited.back();
  for (std::size_t k = path.steps.size(); k-- > 0;) {
    const PathStep& step = path.steps[k];
    if (!step.moved) {
      rev.steps.push_back({false, 0});
      continue;
    }
    EdgeId e = g.incident(visited[k])[step.index].edge;
    auto back = g.incident(visited[k + 1]);
    std::uint32_t j = 0;
    while (back[j].edge != e) ++j;
    rev.steps.push_back({true, j});
  }
  return rev;
}

inline std::size_t violated_count(const UGInstance& inst, const Labeling& x) {
  if (x.size() != inst.graph().vertex_count()) throw UsageError("labeling must be total on V");
  std::size_t bad = 0;
  for (std::size_t e = 0; e < inst.graph().edge_count(); ++e)
    bad += !inst.satisfied(static_cast<EdgeId>(e), x);
  return bad;
}

/// (# violated edge copies) / m.
inline double violated_fraction(const UGInstance& inst, const Labeling& x) {
  if (inst.graph().edge_count() == 0) throw UsageError("violated_fraction needs m >= 1");
  return static_cast<double>(violated_count(inst, x)) /
         static_cast<double>(inst.graph().edge_count());
}

struct ExactOptimum {
  double value = 0.0;        // minimum violated fraction
  std::size_t violated = 0;  // minimum violated count
  Labeling witness;
};

inline constexpr double kDefaultLabelingGuard = 16777216.0;  // 2^24

/// Exact tau_UG by exhaustive search over labelings in mixed-radix order (vertex 0 is
/// the most significant digit), pruning branches whose running violation count already
/// reaches the incumbent. m = 0 gives 0.
inline ExactOptimum tau_ug_exact(const UGInstance& inst, double guard = kDefaultLabelingGuard) {
  const Multigraph& g = inst.graph();
  const std::size_t n = g.vertex_count();
  const int q = inst.alphabet();
  double space = std::pow(static_cast<double>(q), static_cast<double>(n));
  if (space > guard) throw GuardError("tau_ug_exact: Q^n", space, guard);
  ExactOptimum best;
  best.witness.assign(n, 0);
  if (g.edge_count() == 0) return best;

  // Edges checked when their later endpoint (in vertex order) is assigned.
  std::vector<std::vector<EdgeId>> closing(n);
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    const auto& ec = g.edge(e);
    closing[std::max(ec.u, ec.v)].push_back(e);
  }
  best.violated = violated_count(inst, best.witness);
  Labeling x(n, 0);
  std::vector<std::size_t> running(n + 1, 0);
  // Iterative DFS over the mixed-radix digits.
  std::size_t depth = 0;
  std::vector<int> digit(n, -1);
  while (true) {
    if (depth == n) {
      if (running[n] < best.violated) {
        best.violated = running[n];
        best.witness = x;
        if (best.violated == 0) break;
      }
      --depth;
      continue;
    }
    if (++digit[depth] >= q) {
      digit[depth] = -1;
      if (depth == 0) break;
      --depth;
      continue;
    }
    x[depth] = static_cast<Label>(digit[depth]);
    std::size_t bad = running[depth];
    for (EdgeId e : closing[depth]) bad += !inst.satisfied(e, x);
    if (bad >= best.violated) continue;
    running[depth + 1] = bad;
    ++depth;
  }
  best.value = static_cast<double>(best.violated) / static_cast<double>(g.edge_count());
  return best;
}

struct ExactCut {
  double value = 0.0;
  std::size_t uncut = 0;
  std::vector<bool> side;
};

/// Exact tau(G) = min over 2-colorings of the monochromatic fraction, by plain
/// enumeration of all 2^(n-1) colorings with vertex 0 fixed on side 0.
inline ExactCut tau_uncut_exact(const Multigraph& g, double guard = kDefaultLabelingGuard) {
  const std::size_t n = g.vertex_count();
  double space = std::pow(2.0, static_cast<double>(n));
  if (space > guard) throw GuardError("tau_uncut_exact: 2^n", space, guard);
  ExactCut best;
  best.side.assign(n, false);
  if (g.edge_count() == 0 || n <= 1) return best;
  best.uncut = g.edge_count() + 1;
  const std::uint64_t colorings = 1ULL << (n - 1);
  for (std::uint64_t mask = 0; mask < colorings; ++mask) {
    std::size_t uncut = 0;
    for (const auto& e : g.edges()) {
      bool su = e.u == 0 ? false : ((mask >> (e.u - 1)) & 1);
      bool sv = e.v == 0 ? false : ((mask >> (e.v - 1)) & 1);
      uncut += su == sv;
    }
    if (uncut < best.uncut) {
      best.uncut = uncut;
      for (std::size_t v = 1; v < n; ++v) best.side[v] = (mask >> (v - 1)) & 1;
    }
  }
  best.value = static_cast<double>(best.uncut) / static_cast<double>(g.edge_count());
  return best;
}

}  // namespace tolerant
