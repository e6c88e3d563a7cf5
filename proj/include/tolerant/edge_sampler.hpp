#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>

#include "tolerant/errors.hpp"
#include "tolerant/oracle.hpp"
#include "tolerant/rng.hpp"
#include "tolerant/walks.hpp"

namespace tolerant {

/// Light/heavy rejection sampler for edge copies.
struct EdgeSamplerConfig {
  double xi = 0.05;
  std::optional<std::uint64_t> theta;      // default ceil(sqrt(4m / xi))
  std::optional<std::uint64_t> trial_cap;  // default ceil(64 n theta / m)

  void validate() const {
    if (!(xi > 0.0 && xi < 1.0)) throw UsageError("edge sampler: xi must lie in (0, 1)");
    if (theta && *theta == 0) throw UsageError("edge sampler: theta must be >= 1");
  }
  std::uint64_t resolved_theta(std::size_t m) const {
    if (theta) return *theta;
    return static_cast<std::uint64_t>(std::ceil(std::sqrt(4.0 * static_cast<double>(m) / xi)));
  }
  std::uint64_t resolved_trial_cap(std::size_t n, std::size_t m) const {
    if (trial_cap) return *trial_cap;
    double cap = std::ceil(64.0 * static_cast<double>(n) * static_cast<double>(resolved_theta(m)) /
                           static_cast<double>(m));
    return static_cast<std::uint64_t>(std::max(1.0, cap));
  }
};

/// An edge copy identified by its tail and 0-based adjacency index there.
struct SampledEdge {
  VertexId tail = 0;
  std::uint32_t index = 0;
  VertexId head = 0;
  std::uint64_t trials = 0;
};

/// Each trial picks a uniform vertex u and a fair coin. Light branch: if deg(u) <= theta,
/// accept with probability deg(u)/theta and return a uniform edge copy at u. Heavy
/// branch: from a light u accepted the same way, step to a uniform neighbor v; if v is
/// heavy return a uniform edge copy at v, otherwise the trial fails.
///
/// Every oriented edge copy with a light tail has trial probability exactly 1/(2 n theta);
/// heavy tails get a [1 - 2m/theta^2, 1] fraction of that when no two heavy vertices share
/// parallel copies. Only neighbor and degree
/// queries are issued.
template <AdjacencyOracle Oracle>
SampledEdge sample_edge(WalkContext<Oracle>& ctx, const EdgeSamplerConfig& config, Rng& rng) {
  config.validate();
  Oracle& o = ctx.oracle();
  if (o.m() == 0) throw UsageError("sample_edge needs m >= 1");
  const std::uint64_t theta = config.resolved_theta(o.m());
  const std::uint64_t cap = config.resolved_trial_cap(o.n(), o.m());
  for (std::uint64_t trial = 1; trial <= cap; ++trial) {
    VertexId u = o.uniform_vertex(rng);
    bool heavy_branch = fair_coin(rng);
    std::size_t du = ctx.degree(u);
    if (du == 0 || du > theta) continue;
    if (uniform01(rng) * static_cast<double>(theta) >= static_cast<double>(du)) continue;
    auto i = static_cast<std::uint32_t>(uniform_index(rng, du));
    if (!heavy_branch) return {u, i, ctx.traverse_endpoint(u, i + 1), trial};
    VertexId v = ctx.traverse_endpoint(u, i + 1);
    std::size_t dv = ctx.degree(v);
    if (dv <= theta) continue;
    auto j = static_cast<std::uint32_t>(uniform_index(rng, dv));
    return {v, j, ctx.traverse_endpoint(v, j + 1), trial};
  }
  throw SamplerFailure("edge sampler exhausted " + std::to_string(cap) + " trials");
}

/// Uniform endpoint of a sampled edge copy: law within (1 +- xi) of pi pointwise.
template <AdjacencyOracle Oracle>
VertexId sample_seed(WalkContext<Oracle>& ctx, const EdgeSamplerConfig& config, Rng& rng) {
  SampledEdge e = sample_edge(ctx, config, rng);
  return fair_coin(rng) ? e.tail : e.head;
}

}  // namespace tolerant
