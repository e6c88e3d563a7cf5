#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tolerant/errors.hpp"

namespace tolerant {

using VertexId = std::uint32_t;
using EdgeId = std::uint32_t;

/// One undirected edge copy, stored in its construction orientation u -> v.
struct EdgeCopy {
  VertexId u = 0;
  VertexId v = 0;
};

/// Entry of a vertex's adjacency list. `forward` is true when the list owner is the
/// edge's stored tail `u`.
struct IncidentCopy {
  VertexId endpoint = 0;
  EdgeId edge = 0;
  bool forward = true;
};

/// Immutable undirected multigraph. Parallel copies are allowed and counted with
/// multiplicity; self-loops are rejected. Edge-copy ids are the construction order and
/// every vertex lists its incident copies in construction order.
class Multigraph {
 public:
  Multigraph() = default;

  Multigraph(std::size_t n, std::vector<EdgeCopy> edges) : n_(n), edges_(std::move(edges)) {
    if (n_ > UINT32_MAX) throw UsageError("vertex count exceeds 32-bit ids");
    std::vector<std::uint32_t> deg(n_, 0);
    for (const auto& e : edges_) {
      if (e.u >= n_ || e.v >= n_) throw InputError("edge endpoint out of range");
      if (e.u == e.v) throw InputError("self-loops are not allowed in the input graph");
      ++deg[e.u];
      ++deg[e.v];
    }
    offsets_.assign(n_ + 1, 0);
    for (std::size_t v = 0; v < n_; ++v) offsets_[v + 1] = offsets_[v] + deg[v];
    incident_.resize(offsets_[n_]);
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (EdgeId id = 0; id < edges_.size(); ++id) {
      const auto& e = edges_[id];
      incident_[fill[e.u]++] = {e.v, id, true};
      incident_[fill[e.v]++] = {e.u, id, false};
    }
  }

  std::size_t vertex_count() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  std::size_t degree(VertexId v) const { return offsets_.at(v + 1) - offsets_[v]; }

  std::span<const IncidentCopy> incident(VertexId v) const {
    return {incident_.data() + offsets_.at(v), offsets_[v + 1] - offsets_[v]};
  }

  const EdgeCopy& edge(EdgeId e) const { return edges_.at(e); }
  std::span<const EdgeCopy> edges() const noexcept { return edges_; }

  /// pi(v) = deg(v) / 2m. Undefined for m = 0.
  double stationary(VertexId v) const {
    return static_cast<double>(degree(v)) / (2.0 * static_cast<double>(edges_.size()));
  }

  std::uint64_t volume(std::span<const VertexId> set) const {
    std::uint64_t vol = 0;
    for (VertexId v : set) vol += degree(v);
    return vol;
  }

  bool has_isolated_vertices() const {
    for (std::size_t v = 0; v < n_; ++v)
      if (degree(static_cast<VertexId>(v)) == 0) return true;
    return false;
  }

 private:
  std::size_t n_ = 0;
  std::vector<EdgeCopy> edges_;
  std::vector<std::size_t> offsets_ = {0};
  std::vector<IncidentCopy> incident_;
};

/// Working graph with isolated vertices removed.
struct StrippedGraph {
  Multigraph graph;
  std::vector<VertexId> original_id;  // working id -> input id
};

/// Deletes isolated vertices and renumbers the rest in increasing input order.
/// Returns nullopt when m = 0 (the trivial instance).
inline std::optional<StrippedGraph> strip_isolated(const Multigraph& g) {
  if (g.edge_count() == 0) return std::nullopt;
  std::vector<VertexId> new_id(g.vertex_count(), UINT32_MAX);
  StrippedGraph out;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    if (g.degree(static_cast<VertexId>(v)) > 0) {
      new_id[v] = static_cast<VertexId>(out.original_id.size());
      out.original_id.push_back(static_cast<VertexId>(v));
    }
  }
  std::vector<EdgeCopy> edges;
  edges.reserve(g.edge_count());
  for (const auto& e : g.edges()) edges.push_back({new_id[e.u], new_id[e.v]});
  out.graph = Multigraph(out.original_id.size(), std::move(edges));
  return out;
}

}  // namespace tolerant
