#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "tolerant/errors.hpp"
#include "tolerant/permutation.hpp"
#include "tolerant/rng.hpp"
#include "tolerant/ug_instance.hpp"

namespace tolerant {

struct QueryStats {
  std::uint64_t uniform_vertex = 0;
  std::uint64_t degree = 0;
  std::uint64_t neighbor = 0;
  std::uint64_t constrained_neighbor = 0;

  std::uint64_t total() const noexcept {
    return uniform_vertex + degree + neighbor + constrained_neighbor;
  }

  QueryStats& operator+=(const QueryStats& o) noexcept {
    uniform_vertex += o.uniform_vertex;
    degree += o.degree;
    neighbor += o.neighbor;
    constrained_neighbor += o.constrained_neighbor;
    return *this;
  }
  friend QueryStats operator+(QueryStats a, const QueryStats& b) noexcept { return a += b; }
  friend QueryStats operator-(QueryStats a, const QueryStats& b) noexcept {
    a.uniform_vertex -= b.uniform_vertex;
    a.degree -= b.degree;
    a.neighbor -= b.neighbor;
    a.constrained_neighbor -= b.constrained_neighbor;
    return a;
  }
  friend bool operator==(const QueryStats&, const QueryStats&) = default;
};

struct ConstrainedEntry {
  VertexId endpoint = 0;
  Permutation constraint;
};

/// Counted adjacency-list oracle over a UG instance (a plain graph is the Q = 2
/// parity instance). Every query method charges exactly one counter by one; n, m and
/// Q are free. There is deliberately no accessor for the underlying instance: code
/// that only holds a handle cannot reach the omniscient view.
///
/// Neighbor indices are 1-based as in the model.
class OracleHandle {
 public:
  explicit OracleHandle(const UGInstance& inst) : inst_(&inst) {}

  /// Fresh handle over the same instance with zeroed counters (one per worker/task).
  OracleHandle fork() const { return OracleHandle(*inst_); }

  std::size_t n() const noexcept { return inst_->graph().vertex_count(); }
  std::size_t m() const noexcept { return inst_->graph().edge_count(); }
  int alphabet() const noexcept { return inst_->alphabet(); }

  VertexId uniform_vertex(Rng& rng) {
    if (n() == 0) throw UsageError("uniform_vertex on an empty vertex set");
    ++stats_.uniform_vertex;
    return static_cast<VertexId>(uniform_index(rng, n()));
  }

  std::size_t degree(VertexId v) {
    check_vertex(v);
    ++stats_.degree;
    return inst_->graph().degree(v);
  }

  VertexId neighbor(VertexId v, std::size_t i) {
    check_entry(v, i);
    ++stats_.neighbor;
    return inst_->graph().incident(v)[i - 1].endpoint;
  }

  ConstrainedEntry constrained_neighbor(VertexId u, std::size_t i) {
    check_entry(u, i);
    ++stats_.constrained_neighbor;
    return {inst_->graph().incident(u)[i - 1].endpoint, inst_->oriented_constraint(u, i - 1)};
  }

  /// Same charge as constrained_neighbor; returns the endpoint and the label b is
  /// mapped to, skipping the Permutation copy on hot paths.
  std::pair<VertexId, Label> constrained_step(VertexId u, std::size_t i, Label b) {
    check_entry(u, i);
    ++stats_.constrained_neighbor;
    return {inst_->graph().incident(u)[i - 1].endpoint, inst_->oriented_image(u, i - 1)[b]};
  }

  const QueryStats& stats() const noexcept { return stats_; }
  void reset_stats() noexcept { stats_ = {}; }

 private:
  void check_vertex(VertexId v) const {
    if (v >= n()) throw UsageError("vertex id " + std::to_string(v) + " out of range");
  }
  void check_entry(VertexId v, std::size_t i) const {
    check_vertex(v);
    std::size_t d = inst_->graph().degree(v);
    if (i < 1 || i > d)
      throw UsageError("neighbor index " + std::to_string(i) + " out of range for degree " +
                       std::to_string(d));
  }

  const UGInstance* inst_;
  QueryStats stats_;
};

/// Anything with the oracle's query surface; lets tests substitute counting shims.
template <typename O>
concept AdjacencyOracle = requires(O& o, const O& co, Rng& rng, VertexId v, std::size_t i, Label b) {
  { co.n() } -> std::convertible_to<std::size_t>;
  { co.m() } -> std::convertible_to<std::size_t>;
  { co.alphabet() } -> std::convertible_to<int>;
  { o.uniform_vertex(rng) } -> std::convertible_to<VertexId>;
  { o.degree(v) } -> std::convertible_to<std::size_t>;
  { o.neighbor(v, i) } -> std::convertible_to<VertexId>;
  { o.constrained_step(v, i, b) } -> std::convertible_to<std::pair<VertexId, Label>>;
  { co.stats() } -> std::convertible_to<QueryStats>;
};

/// Remembers degrees already queried through one oracle; the first query per vertex
/// is charged, later lookups are free.
template <AdjacencyOracle Oracle>
class DegreeCache {
 public:
  explicit DegreeCache(Oracle& oracle) : oracle_(&oracle), cache_(oracle.n(), kUnknown) {}

  std::size_t operator()(VertexId v) {
    if (v >= cache_.size()) throw UsageError("vertex id out of range");
    std::uint32_t& slot = cache_[v];
    if (slot == kUnknown) slot = static_cast<std::uint32_t>(oracle_->degree(v));
    return slot;
  }

  Oracle& oracle() noexcept { return *oracle_; }

 private:
  static constexpr std::uint32_t kUnknown = UINT32_MAX;
  Oracle* oracle_;
  std::vector<std::uint32_t> cache_;
};

}  // namespace tolerant
