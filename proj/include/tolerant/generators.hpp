#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tolerant/errors.hpp"
#include "tolerant/graph.hpp"
#include "tolerant/permutation.hpp"
#include "tolerant/rng.hpp"
#include "tolerant/ug_instance.hpp"

namespace tolerant {

/// Everything needed to regenerate an instance; generation is a pure function of it.
struct FamilySpec {
  std::string family;
  std::size_t n = 0;
  std::size_t degree = 0;  // regular families; 0 selects a uniform edge count
  std::size_t edges = 0;   // uniform-edge-count families
  int q = 2;
  double eps_plant = 0.0;
  std::uint64_t seed = 0;
  std::size_t k = 0;  // clique size for complete / barbell

  nlohmann::ordered_json to_json() const {
    return {{"schema_version", 1}, {"family", family}, {"n", n},   {"degree", degree},
            {"edges", edges},      {"q", q},           {"eps_plant", eps_plant},
            {"seed", seed},        {"k", k}};
  }
};

namespace detail {

inline std::uint64_t pair_key(VertexId a, VertexId b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace detail

/// Simple d-regular graph on n vertices by the pairing model. Each stub is matched to
/// a uniformly random remaining stub; a pick that would create a loop or a repeated
/// pair is redrawn a bounded number of times before the whole pairing restarts.
inline Multigraph random_regular_graph(std::size_t n, std::size_t d, Rng& rng) {
  if (d >= n || (n * d) % 2 != 0) throw UsageError("random_regular_graph: need d < n and n d even");
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<VertexId> stubs;
    stubs.reserve(n * d);
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t j = 0; j < d; ++j) stubs.push_back(static_cast<VertexId>(v));
    std::set<std::uint64_t> used;
    std::vector<EdgeCopy> edges;
    bool ok = true;
    while (!stubs.empty() && ok) {
      std::size_t a = stubs.size() - 1;
      VertexId u = stubs[a];
      ok = false;
      for (int tries = 0; tries < 64 && a > 0; ++tries) {
        std::size_t b = uniform_index(rng, a);
        VertexId v = stubs[b];
        if (v == u || used.count(detail::pair_key(u, v))) continue;
        used.insert(detail::pair_key(u, v));
        edges.push_back({u, v});
        stubs[b] = stubs[a - 1];
        stubs.resize(a - 1);
        ok = true;
        break;
      }
    }
    if (ok) return Multigraph(n, std::move(edges));
  }
  throw std::runtime_error("random_regular_graph: pairing kept failing");
}

/// Simple bipartite d-regular graph between {0..h-1} and {h..2h-1}.
inline Multigraph random_bipartite_regular_graph(std::size_t half, std::size_t d, Rng& rng) {
  if (d > half) throw UsageError("random_bipartite_regular_graph: need d <= half");
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<VertexId> right;
    for (std::size_t v = 0; v < half; ++v)
      for (std::size_t j = 0; j < d; ++j) right.push_back(static_cast<VertexId>(half + v));
    std::set<std::uint64_t> used;
    std::vector<EdgeCopy> edges;
    bool ok = true;
    for (std::size_t u = 0; u < half && ok; ++u) {
      for (std::size_t j = 0; j < d && ok; ++j) {
        ok = false;
        for (int tries = 0; tries < 64 && !right.empty(); ++tries) {
          std::size_t b = uniform_index(rng, right.size());
          VertexId v = right[b];
          if (used.count(detail::pair_key(static_cast<VertexId>(u), v))) continue;
          used.insert(detail::pair_key(static_cast<VertexId>(u), v));
          edges.push_back({static_cast<VertexId>(u), v});
          right[b] = right.back();
          right.pop_back();
          ok = true;
          break;
        }
      }
    }
    if (ok) return Multigraph(2 * half, std::move(edges));
  }
  throw std::runtime_error("random_bipartite_regular_graph: pairing kept failing");
}

/// Simple graph with exactly m edges chosen uniformly among vertex pairs.
inline Multigraph random_graph(std::size_t n, std::size_t m, Rng& rng) {
  if (n < 2 || m > n * (n - 1) / 2) throw UsageError("random_graph: too many edges for n");
  std::set<std::uint64_t> used;
  std::vector<EdgeCopy> edges;
  while (edges.size() < m) {
    auto u = static_cast<VertexId>(uniform_index(rng, n));
    auto v = static_cast<VertexId>(uniform_index(rng, n));
    if (u == v || !used.insert(detail::pair_key(u, v)).second) continue;
    edges.push_back({u, v});
  }
  return Multigraph(n, std::move(edges));
}

/// Random multigraph: m edge copies between uniform distinct endpoints, parallels kept.
inline Multigraph random_multigraph(std::size_t n, std::size_t m, Rng& rng) {
  if (n < 2) throw UsageError("random_multigraph: need n >= 2");
  std::vector<EdgeCopy> edges;
  while (edges.size() < m) {
    auto u = static_cast<VertexId>(uniform_index(rng, n));
    auto v = static_cast<VertexId>(uniform_index(rng, n));
    if (u != v) edges.push_back({u, v});
  }
  return Multigraph(n, std::move(edges));
}

inline Multigraph cycle_graph(std::size_t n) {
  if (n < 3) throw UsageError("cycle_graph: need n >= 3");
  std::vector<EdgeCopy> edges;
  for (std::size_t v = 0; v < n; ++v)
    edges.push_back({static_cast<VertexId>(v), static_cast<VertexId>((v + 1) % n)});
  return Multigraph(n, std::move(edges));
}

inline Multigraph path_graph(std::size_t n) {
  std::vector<EdgeCopy> edges;
  for (std::size_t v = 0; v + 1 < n; ++v)
    edges.push_back({static_cast<VertexId>(v), static_cast<VertexId>(v + 1)});
  return Multigraph(n, std::move(edges));
}

inline Multigraph star_graph(std::size_t leaves) {
  std::vector<EdgeCopy> edges;
  for (std::size_t v = 1; v <= leaves; ++v) edges.push_back({0, static_cast<VertexId>(v)});
  return Multigraph(leaves + 1, std::move(edges));
}

inline Multigraph complete_graph(std::size_t k) {
  std::vector<EdgeCopy> edges;
  for (std::size_t u = 0; u < k; ++u)
    for (std::size_t v = u + 1; v < k; ++v) edges.push_back({static_cast<VertexId>(u), static_cast<VertexId>(v)});
  return Multigraph(k, std::move(edges));
}

/// Two cliques K_a and K_b joined by one bridge edge between vertex 0 and vertex a.
inline Multigraph barbell_graph(std::size_t a, std::size_t b) {
  if (a < 2 || b < 2) throw UsageError("barbell_graph: cliques need >= 2 vertices");
  std::vector<EdgeCopy> edges;
  auto clique = [&](std::size_t off, std::size_t k) {
    for (std::size_t u = 0; u < k; ++u)
      for (std::size_t v = u + 1; v < k; ++v)
        edges.push_back({static_cast<VertexId>(off + u), static_cast<VertexId>(off + v)});
  };
  clique(0, a);
  clique(a, b);
  edges.push_back({0, static_cast<VertexId>(a)});
  return Multigraph(a + b, std::move(edges));
}

/// Uniform permutation subject to pi(from) = to.
inline Permutation random_permutation_mapping(int q, Label from, Label to, Rng& rng) {
  Permutation p = Permutation::random(q, rng);
  std::vector<Label> img(p.image().begin(), p.image().end());
  auto j = static_cast<std::size_t>(std::find(img.begin(), img.end(), to) - img.begin());
  std::swap(img[j], img[from]);
  return Permutation::from_image(img);
}

struct PlantedInstance {
  UGInstance instance;
  Labeling planted;
  std::vector<EdgeId> rerandomized;
};

/// Random graph, random labeling x, constraints consistent with x, then exactly
/// floor(eps_plant m) edge copies re-randomized to uniform permutations. Regular when
/// spec.degree > 0, otherwise spec.edges uniform pairs.
inline PlantedInstance planted_ug(const FamilySpec& spec) {
  if (!(spec.eps_plant >= 0.0 && spec.eps_plant <= 1.0)) throw UsageError("planted_ug: eps_plant in [0,1]");
  Rng rng = make_stream(spec.seed, {0x706c616e74ULL});
  Multigraph g = spec.degree > 0 ? random_regular_graph(spec.n, spec.degree, rng)
                                 : random_graph(spec.n, spec.edges, rng);
  Labeling x(spec.n);
  for (auto& b : x) b = static_cast<Label>(uniform_index(rng, static_cast<std::uint64_t>(spec.q)));
  std::vector<Permutation> perms;
  perms.reserve(g.edge_count());
  for (const auto& e : g.edges()) perms.push_back(random_permutation_mapping(spec.q, x[e.u], x[e.v], rng));
  auto noisy = static_cast<std::size_t>(std::floor(spec.eps_plant * static_cast<double>(g.edge_count()) + 1e-9));
  std::vector<EdgeId> ids(g.edge_count());
  std::iota(ids.begin(), ids.end(), 0);
  for (std::size_t i = 0; i < noisy; ++i) std::swap(ids[i], ids[i + uniform_index(rng, ids.size() - i)]);
  ids.resize(noisy);
  std::sort(ids.begin(), ids.end());
  for (EdgeId e : ids) perms[e] = Permutation::random(spec.q, rng);
  return {UGInstance(std::move(g), spec.q, perms), std::move(x), std::move(ids)};
}

/// Uniformly random constraints on a random d-regular graph.
inline UGInstance random_constraint_ug(std::size_t n, std::size_t d, int q, std::uint64_t seed) {
  Rng rng = make_stream(seed, {0x72616e64ULL});
  Multigraph g = random_regular_graph(n, d, rng);
  std::vector<Permutation> perms;
  for (std::size_t e = 0; e < g.edge_count(); ++e) perms.push_back(Permutation::random(q, rng));
  return UGInstance(std::move(g), q, perms);
}

struct NearBipartite {
  Multigraph graph;
  std::vector<bool> side;  // the planted bipartition
  std::size_t rewired = 0;
};

/// Random bipartite d-regular graph on n = 2h vertices with floor(frac m) edges
/// rewired: edge (a, b) becomes (a, a') with a' on a's side.
inline NearBipartite near_bipartite(std::size_t n, std::size_t d, double frac, std::uint64_t seed) {
  if (n % 2 != 0) throw UsageError("near_bipartite: n must be even");
  Rng rng = make_stream(seed, {0x6e656172ULL});
  std::size_t half = n / 2;
  Multigraph base = random_bipartite_regular_graph(half, d, rng);
  std::vector<EdgeCopy> edges(base.edges().begin(), base.edges().end());
  auto count = static_cast<std::size_t>(std::floor(frac * static_cast<double>(edges.size()) + 1e-9));
  std::set<std::uint64_t> used;
  for (const auto& e : edges) used.insert(detail::pair_key(e.u, e.v));
  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t done = 0;
  for (std::size_t i = 0; i < order.size() && done < count; ++i) {
    std::swap(order[i], order[i + uniform_index(rng, order.size() - i)]);
    EdgeCopy& e = edges[order[i]];
    VertexId a = e.u;  // left side
    for (int tries = 0; tries < 64; ++tries) {
      auto a2 = static_cast<VertexId>(uniform_index(rng, half));
      if (a2 == a || used.count(detail::pair_key(a, a2))) continue;
      used.erase(detail::pair_key(e.u, e.v));
      used.insert(detail::pair_key(a, a2));
      e.v = a2;
      ++done;
      break;
    }
  }
  NearBipartite out{Multigraph(n, std::move(edges)), std::vector<bool>(n, false), done};
  for (std::size_t v = half; v < n; ++v) out.side[v] = true;
  return out;
}

/// Monochromatic fraction of a fixed 2-coloring: an exact upper bound on tau(G).
inline double uncut_fraction(const Multigraph& g, const std::vector<bool>& side) {
  if (g.edge_count() == 0) return 0.0;
  std::size_t bad = 0;
  for (const auto& e : g.edges()) bad += side[e.u] == side[e.v];
  return static_cast<double>(bad) / static_cast<double>(g.edge_count());
}

/// Same constraints on n >= inst.n vertices; the new vertices are isolated.
inline UGInstance pad_isolated(const UGInstance& inst, std::size_t n) {
  const Multigraph& g = inst.graph();
  if (n < g.vertex_count()) throw UsageError("pad_isolated: n below the vertex count");
  std::vector<EdgeCopy> edges(g.edges().begin(), g.edges().end());
  std::vector<Permutation> perms;
  perms.reserve(edges.size());
  for (EdgeId e = 0; e < edges.size(); ++e) perms.push_back(inst.constraint(e, true));
  return UGInstance(Multigraph(n, std::move(edges)), inst.alphabet(), perms);
}

/// Builds the instance a FamilySpec names. Parity families return the all-transposition
/// instance.
inline UGInstance generate_family(const FamilySpec& spec) {
  const std::string& f = spec.family;
  if (f == "planted") return planted_ug(spec).instance;
  if (f == "random-ug") return random_constraint_ug(spec.n, spec.degree, spec.q, spec.seed);
  if (f == "odd-cycle" && spec.n % 2 == 0) throw UsageError("odd-cycle needs odd n");
  if (f == "odd-cycle" || f == "cycle") return UGInstance::parity(cycle_graph(spec.n));
  if (f == "complete") return UGInstance::parity(complete_graph(spec.k ? spec.k : spec.n));
  if (f == "barbell") {
    std::size_t a = spec.k ? spec.k : spec.n / 2;
    return UGInstance::parity(barbell_graph(a, spec.n > a ? spec.n - a : a));
  }
  if (f == "near-bipartite")
    return UGInstance::parity(near_bipartite(spec.n, spec.degree, spec.eps_plant, spec.seed).graph);
  if (f == "random-regular") {
    Rng rng = make_stream(spec.seed, {0x72656775ULL});
    return UGInstance::parity(random_regular_graph(spec.n, spec.degree, rng));
  }
  throw UsageError("unknown family '" + f + "'");
}

}  // namespace tolerant
