#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "tolerant/ambiguity.hpp"
#include "tolerant/edge_sampler.hpp"
#include "tolerant/generators.hpp"
#include "tolerant/heat_kernel.hpp"
#include "tolerant/lift.hpp"
#include "tolerant/parallel.hpp"
#include "tolerant/push.hpp"
#include "tolerant/trace.hpp"
#include "tolerant/walks.hpp"

namespace tolerant {

/// Case counts of the property suites. The defaults are the acceptance sizes, except
/// edgesampler, which the acceptance binary runs with AC3 sizes.
struct VerifySizes {
  std::size_t trace_cases = 100;
  std::size_t spectra_cases = 100;
  std::size_t kac_graphs = 20;
  std::size_t kac_runs = 4000;
  std::size_t heat_chains = 200;
  std::size_t mono_pairs = 1000;
  std::size_t mono_kernels = 300;
  std::size_t mono_instances = 50;
  std::size_t push_runs = 20;
  std::size_t edge_graphs = 10;
  std::size_t edge_draws = 200000;
  std::vector<double> edge_xi{0.1, 0.25};
};

struct SuiteResult {
  std::string name;
  bool pass = false;
  nlohmann::ordered_json metrics;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j{{"suite", name}, {"pass", pass}};
    j["metrics"] = metrics;
    return j;
  }
};

inline const std::vector<std::string>& verify_suite_names() {
  static const std::vector<std::string> names{"reversibility", "spectra",       "kac",        "heatkernel",
                                              "monotonicity",  "pushinvariant", "edgesampler"};
  return names;
}

namespace detail {

inline Rng case_stream(std::uint64_t seed, std::uint64_t suite, std::size_t i) {
  return make_stream(seed, {0x7665726966ULL, suite, static_cast<std::uint64_t>(i)});
}

inline UGInstance verify_instance(std::size_t n, std::size_t m, int q, Rng& rng) {
  Multigraph g = random_multigraph(n, m, rng);
  std::vector<Permutation> perms;
  for (std::size_t e = 0; e < m; ++e) perms.push_back(Permutation::random(q, rng));
  return UGInstance(std::move(g), q, perms);
}

inline UGInstance connected_verify_instance(std::size_t n, std::size_t m, int q, Rng& rng) {
  for (;;) {
    Multigraph g = random_graph(n, m, rng);
    if (g.has_isolated_vertices()) continue;
    std::vector<Permutation> perms;
    for (std::size_t e = 0; e < m; ++e) perms.push_back(Permutation::random(q, rng));
    return UGInstance(std::move(g), q, perms);
  }
}

inline std::vector<VertexId> verify_residual(std::size_t n, Rng& rng) {
  std::vector<VertexId> r;
  for (VertexId v = 0; v < n; ++v)
    if (fair_coin(rng)) r.push_back(v);
  if (r.empty()) r.push_back(static_cast<VertexId>(uniform_index(rng, n)));
  return r;
}

inline double max_of(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m = std::max(m, x);
  return m;
}

}  // namespace detail

/// Refined reversibility pi(u) K^Pi(u,v) = pi(v) K^{Pi^-1}(v,u), lifted reversibility,
/// row sums and K^id(u,u) >= 1/2 on random (instance, R).
inline SuiteResult verify_reversibility(std::uint64_t seed, unsigned workers, const VerifySizes& sz = {}) {
  struct Case {
    double refined = 0.0, lifted = 0.0, rows = 0.0, hold = 1.0;
  };
  std::vector<Case> cases(sz.trace_cases);
  parallel_for(cases.size(), workers, [&](std::size_t i) {
    Rng rng = detail::case_stream(seed, 1, i);
    int q = 2 + static_cast<int>(i % 2);
    UGInstance inst = detail::verify_instance(7, 6 + uniform_index(rng, 9), q, rng);
    TraceKernel k = trace_kernel_exact(inst, detail::verify_residual(7, rng));
    Case c;
    const auto s = static_cast<Eigen::Index>(k.size());
    for (const auto& [rank, kp] : k.by_permutation) {
      auto it = k.by_permutation.find(Permutation::unrank(q, rank).inverse().rank());
      for (Eigen::Index u = 0; u < s; ++u)
        for (Eigen::Index v = 0; v < s; ++v) {
          double back = it == k.by_permutation.end() ? 0.0 : it->second(v, u);
          c.refined = std::max(c.refined, std::abs(k.pi_r[u] * kp(u, v) - k.pi_r[v] * back));
        }
    }
    for (Eigen::Index a = 0; a < k.lifted.rows(); ++a) {
      c.rows = std::max(c.rows, std::abs(k.lifted.row(a).sum() - 1.0));
      for (Eigen::Index b = 0; b < k.lifted.cols(); ++b)
        c.lifted = std::max(c.lifted, std::abs(k.pi_r[a / q] * k.lifted(a, b) - k.pi_r[b / q] * k.lifted(b, a)));
    }
    const auto& id = k.by_permutation.at(Permutation::identity(q).rank());
    for (Eigen::Index u = 0; u < s; ++u) c.hold = std::min(c.hold, id(u, u));
    cases[i] = c;
  });
  double refined = 0.0, lifted = 0.0, rows = 0.0, hold = 1.0;
  for (const auto& c : cases) {
    refined = std::max(refined, c.refined);
    lifted = std::max(lifted, c.lifted);
    rows = std::max(rows, c.rows);
    hold = std::min(hold, c.hold);
  }
  SuiteResult r{"reversibility", refined < 1e-10 && lifted < 1e-10 && rows < 1e-10 && hold >= 0.5 - 1e-10, {}};
  r.metrics = {{"cases", cases.size()},         {"max_refined_deviation", refined},
               {"max_lifted_deviation", lifted}, {"max_row_sum_error", rows},
               {"min_identity_hold", hold},     {"tolerance", 1e-10}};
  return r;
}

/// spec(B_R) within [-1e-9, 1 + 1e-9]; the dual-Cheeger ratio is reported, not asserted.
inline SuiteResult verify_spectra(std::uint64_t seed, unsigned workers, const VerifySizes& sz = {}) {
  struct Case {
    double lo = 1.0, hi = 0.0, ratio = std::numeric_limits<double>::infinity();
  };
  std::vector<Case> cases(sz.spectra_cases);
  parallel_for(cases.size(), workers, [&](std::size_t i) {
    Rng rng = detail::case_stream(seed, 2, i);
    Multigraph g = random_multigraph(9, 6 + uniform_index(rng, 12), rng);
    TraceKernel k = trace_kernel_exact(UGInstance::parity(g), detail::verify_residual(9, rng));
    auto spec = spectrum_B(k);
    Case c{spec.front(), spec.back()};
    if (auto ratio = dual_cheeger_ratio(k, beta_signed_exact(k).value)) c.ratio = *ratio;
    cases[i] = c;
  });
  double lo = 1.0, hi = 0.0, ratio = std::numeric_limits<double>::infinity();
  for (const auto& c : cases) {
    lo = std::min(lo, c.lo);
    hi = std::max(hi, c.hi);
    ratio = std::min(ratio, c.ratio);
  }
  SuiteResult r{"spectra", lo >= -1e-9 && hi <= 1.0 + 1e-9, {}};
  r.metrics = {{"cases", cases.size()}, {"min_eigenvalue", lo}, {"max_eigenvalue", hi}, {"tolerance", 1e-9}};
  r.metrics["min_dual_cheeger_ratio"] = std::isfinite(ratio) ? nlohmann::ordered_json(ratio) : nlohmann::ordered_json();
  return r;
}

/// E[H_k] <= k / pi(R) for trace walks started from pi_R, within 3 standard errors.
inline SuiteResult verify_kac(std::uint64_t seed, unsigned workers, const VerifySizes& sz = {}) {
  static constexpr std::size_t ks[] = {1, 4, 16};
  struct Case {
    double worst_z = -std::numeric_limits<double>::infinity();
    bool truncated = false;
  };
  std::vector<Case> cases(sz.kac_graphs * std::size(ks));
  parallel_for(cases.size(), workers, [&](std::size_t i) {
    Rng rng = detail::case_stream(seed, 3, i / std::size(ks));
    std::size_t k = ks[i % std::size(ks)];
    Multigraph g = random_graph(12, 10 + uniform_index(rng, 14), rng);
    std::vector<VertexId> r = detail::verify_residual(12, rng);
    std::vector<bool> in_r(12, false);
    for (VertexId v : r) in_r[v] = true;
    double vol = static_cast<double>(g.volume(r));
    Case c;
    if (vol == 0.0) {
      cases[i] = c;
      return;
    }
    const double pi_r = vol / (2.0 * static_cast<double>(g.edge_count()));
    UGInstance inst = UGInstance::parity(g);
    OracleHandle o(inst);
    WalkContext ctx(o, LabelMode::parity);
    Rng walk = make_stream(seed, {0x6b6163ULL, i});
    std::vector<double> cumulative;
    for (VertexId v : r) cumulative.push_back((cumulative.empty() ? 0.0 : cumulative.back()) + static_cast<double>(g.degree(v)));
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t j = 0; j < sz.kac_runs; ++j) {
      double x = uniform01(walk) * vol;
      std::size_t at = std::upper_bound(cumulative.begin(), cumulative.end(), x) - cumulative.begin();
      TraceRun run = run_trace(ctx, r[std::min(at, r.size() - 1)], [&](VertexId v) { return in_r[v]; }, k, walk);
      c.truncated = c.truncated || run.truncated;
      double h = static_cast<double>(run.returns.back().time);
      sum += h;
      sum2 += h * h;
    }
    const double runs = static_cast<double>(sz.kac_runs);
    double mean = sum / runs;
    double se = std::sqrt(std::max(0.0, sum2 / runs - mean * mean) / runs);
    double bound = static_cast<double>(k) / pi_r;
    c.worst_z = se > 0.0 ? (mean - bound) / se : (mean <= bound + 1e-12 ? -1.0 : 1e9);
    cases[i] = c;
  });
  double worst = -std::numeric_limits<double>::infinity();
  bool truncated = false;
  for (const auto& c : cases) {
    worst = std::max(worst, c.worst_z);
    truncated = truncated || c.truncated;
  }
  SuiteResult r{"kac", !truncated && worst <= 3.0, {}};
  r.metrics = {{"cases", cases.size()},
               {"runs_per_case", sz.kac_runs},
               {"max_standardized_excess", worst},
               {"allowed", 3.0},
               {"truncated", truncated}};
  return r;
}

/// sum_t grad_t^2 <= 16 log(1/nu(s)) and non-increasing entropy on random lazy
/// reversible chains; reports the largest constant actually needed.
inline SuiteResult verify_heatkernel(std::uint64_t seed, unsigned workers, const VerifySizes& sz = {}) {
  struct Case {
    bool holds = false;
    double needed = 0.0, slack = 0.0, telescoping = 0.0;
  };
  std::vector<Case> cases(sz.heat_chains);
  parallel_for(cases.size(), workers, [&](std::size_t i) {
    Rng rng = detail::case_stream(seed, 4, i);
    std::size_t size = 2 + uniform_index(rng, 49);
    auto [k, nu] = random_lazy_reversible_chain(size, 0.05 + 0.5 * uniform01(rng), rng);
    std::size_t s = uniform_index(rng, size);
    HeatKernelReport rep = heat_kernel_gradient_check(k, nu, s, 4 * size + 20);
    double log_term = std::log(1.0 / nu[static_cast<Eigen::Index>(s)]);
    cases[i] = {rep.holds(), log_term > 0.0 ? rep.sum_squares / log_term : 0.0,
                (rep.bound - rep.sum_squares) / rep.bound, rep.telescoping_error};
  });
  bool all = true;
  double needed = 0.0, slack = 1.0, tele = 0.0;
  for (const auto& c : cases) {
    all = all && c.holds;
    needed = std::max(needed, c.needed);
    slack = std::min(slack, c.slack);
    tele = std::max(tele, c.telescoping);
  }
  SuiteResult r{"heatkernel", all && tele < 1e-10, {}};
  r.metrics = {{"chains", cases.size()},        {"C", 16.0},
               {"max_needed_constant", needed}, {"min_relative_margin", slack},
               {"max_telescoping_error", tele}};
  return r;
}

/// Superadditivity of A, monotonicity of A under permutation kernels, and Amb_L
/// non-decreasing in L.
inline SuiteResult verify_monotonicity(std::uint64_t seed, unsigned workers, const VerifySizes& sz = {}) {
  auto subdist = [](std::size_t states, Rng& rng) {
    Eigen::VectorXd p(static_cast<Eigen::Index>(states));
    for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = uniform01(rng);
    return Eigen::VectorXd(p / (p.sum() * (1.0 + uniform01(rng))));
  };
  std::vector<double> super(sz.mono_pairs), kernel(sz.mono_kernels), scale(sz.mono_instances);
  parallel_for(super.size(), workers, [&](std::size_t i) {
    Rng rng = detail::case_stream(seed, 5, i);
    int q = 2 + static_cast<int>(i % 3);
    std::size_t states = static_cast<std::size_t>(q) * (1 + uniform_index(rng, 12));
    Eigen::VectorXd a = subdist(states, rng), b = subdist(states, rng);
    super[i] = std::max(0.0, ambiguity_functional(a, q) + ambiguity_functional(b, q) -
                                 ambiguity_functional(Eigen::VectorXd(a + b), q));
  });
  parallel_for(kernel.size(), workers, [&](std::size_t i) {
    Rng rng = detail::case_stream(seed, 6, i);
    int q = 2 + static_cast<int>(i % 3);
    std::size_t n = 2 + uniform_index(rng, 8);
    const auto states = static_cast<Eigen::Index>(n * static_cast<std::size_t>(q));
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(states, states);
    for (std::size_t v = 0; v < n; ++v) {
      std::size_t moves = 1 + uniform_index(rng, 4);
      std::vector<double> w(moves);
      double total = 0.0;
      for (double& x : w) total += (x = uniform01(rng) + 0.01);
      for (std::size_t j = 0; j < moves; ++j) {
        std::size_t to = uniform_index(rng, n);
        Permutation p = Permutation::random(q, rng);
        for (int b = 0; b < q; ++b)
          k(static_cast<Eigen::Index>(v * q + b), static_cast<Eigen::Index>(to * q + p(static_cast<Label>(b)))) +=
              w[j] / total;
      }
    }
    Eigen::VectorXd p = subdist(static_cast<std::size_t>(states), rng);
    kernel[i] = std::max(0.0, ambiguity_functional(p, q) - ambiguity_functional(Eigen::VectorXd(k.transpose() * p), q));
  });
  parallel_for(scale.size(), workers, [&](std::size_t i) {
    Rng rng = detail::case_stream(seed, 7, i);
    int q = 2 + static_cast<int>(i % 3);
    UGInstance inst = detail::connected_verify_instance(8, 12, q, rng);
    double worst = 0.0;
    std::vector<double> prev(8, 0.0);
    for (double L : {1.0, 1.5, 2.0, 3.0, 5.0, 8.0, 13.0, 21.0}) {
      AmbiguityExact ex(inst, L);
      for (VertexId s = 0; s < 8; ++s) {
        double mu = ex.mu(s);
        worst = std::max(worst, prev[s] - mu);
        prev[s] = mu;
      }
    }
    scale[i] = worst;
  });
  double a = detail::max_of(super), b = detail::max_of(kernel), c = detail::max_of(scale);
  SuiteResult r{"monotonicity", a <= 1e-10 && b <= 1e-10 && c <= 1e-10, {}};
  r.metrics = {{"superadditivity_cases", super.size()},  {"max_superadditivity_violation", a},
               {"kernel_cases", kernel.size()},          {"max_kernel_violation", b},
               {"scale_instances", scale.size()},        {"max_scale_violation", c},
               {"tolerance", 1e-10}};
  return r;
}

/// pr_x(t) = p(t) + sum_y r(y) pr_y(t) for every t after every push, against exact rows.
inline SuiteResult verify_pushinvariant(std::uint64_t seed, unsigned workers, const VerifySizes& sz = {}) {
  struct Case {
    double worst = 0.0;
    std::uint64_t pushes = 0;
  };
  std::vector<Case> cases(sz.push_runs);
  parallel_for(cases.size(), workers, [&](std::size_t i) {
    Rng rng = detail::case_stream(seed, 8, i);
    int q = 2 + static_cast<int>(i % 2);
    UGInstance inst = detail::connected_verify_instance(10, 16, q, rng);
    double L = 1.0 + 9.0 * uniform01(rng);
    LabelLift lift(inst);
    PprExactSolver solver(lift, L);
    const auto states = static_cast<Eigen::Index>(lift.state_count());
    Eigen::MatrixXd rows(states, states);
    for (Eigen::Index x = 0; x < states; ++x) rows.row(x) = solver.row(static_cast<std::size_t>(x)).transpose();
    LiftState x{static_cast<VertexId>(uniform_index(rng, 10)), static_cast<Label>(uniform_index(rng, q))};
    Eigen::RowVectorXd target = rows.row(static_cast<Eigen::Index>(lift.index(x.vertex, x.label)));
    OracleHandle o(inst);
    WalkContext ctx(o, LabelMode::constrained);
    Case c;
    auto check = [&](const ResidualState& st, LiftState) {
      Eigen::RowVectorXd total = Eigen::RowVectorXd::Zero(states);
      for (const auto& [key, p] : st.p) total[static_cast<Eigen::Index>(key)] += p;
      for (const auto& [key, r] : st.r) total += r * rows.row(static_cast<Eigen::Index>(key));
      c.worst = std::max(c.worst, (total - target).cwiseAbs().maxCoeff());
      ++c.pushes;
    };
    forward_push(ctx, x, L, 1e-4 * std::pow(10.0, -static_cast<double>(i % 3)), check);
    cases[i] = c;
  });
  double worst = 0.0;
  std::uint64_t pushes = 0;
  for (const auto& c : cases) {
    worst = std::max(worst, c.worst);
    pushes += c.pushes;
  }
  SuiteResult r{"pushinvariant", worst <= 1e-12 && pushes > 0, {}};
  r.metrics = {{"runs", cases.size()}, {"checked_states", pushes}, {"max_deviation", worst}, {"tolerance", 1e-12}};
  return r;
}

namespace detail {

/// Random multigraph on n <= 40 vertices; odd cases add a hub whose degree exceeds
/// theta while its neighbors stay light.
inline Multigraph edge_sampler_graph(std::size_t i, Rng& rng) {
  const bool hub = i % 2 == 1;
  std::size_t n = hub ? 30 + uniform_index(rng, 11) : 8 + uniform_index(rng, 33);
  std::vector<EdgeCopy> edges;
  std::size_t m = n + uniform_index(rng, hub ? n : 3 * n);
  for (std::size_t e = 0; e < m; ++e) {
    VertexId u = static_cast<VertexId>(uniform_index(rng, n)), v = static_cast<VertexId>(uniform_index(rng, n - 1));
    if (v >= u) ++v;
    edges.push_back({u, v});
  }
  if (hub) {
    std::size_t copies = 100 + uniform_index(rng, 61);
    for (std::size_t e = 0; e < copies; ++e)
      edges.push_back({0, static_cast<VertexId>(1 + uniform_index(rng, n - 1))});
  }
  return Multigraph(n, std::move(edges));
}

}  // namespace detail

/// Per-edge-copy frequency of sample_edge within (1 +- xi)/m plus 3 standard errors.
inline SuiteResult verify_edgesampler(std::uint64_t seed, unsigned workers, const VerifySizes& sz = {}) {
  struct Case {
    double worst_z = -std::numeric_limits<double>::infinity();
    double worst_rel = 0.0;
    bool heavy = false;
  };
  const std::size_t nx = sz.edge_xi.size();
  std::vector<Case> cases(sz.edge_graphs * nx);
  parallel_for(cases.size(), workers, [&](std::size_t i) {
    Rng rng = detail::case_stream(seed, 9, i / nx);
    Multigraph g = detail::edge_sampler_graph(i / nx, rng);
    EdgeSamplerConfig cfg;
    cfg.xi = sz.edge_xi[i % nx];
    UGInstance inst = UGInstance::parity(g);
    OracleHandle o(inst);
    WalkContext ctx(o, LabelMode::parity);
    Rng draw = make_stream(seed, {0x65646765ULL, i});
    std::vector<double> count(g.edge_count(), 0.0);
    for (std::size_t j = 0; j < sz.edge_draws; ++j) {
      SampledEdge e = sample_edge(ctx, cfg, draw);
      count[g.incident(e.tail)[e.index].edge] += 1.0;
    }
    Case c;
    const std::uint64_t theta = cfg.resolved_theta(g.edge_count());
    for (VertexId v = 0; v < g.vertex_count(); ++v) c.heavy = c.heavy || g.degree(v) > theta;
    const double m = static_cast<double>(g.edge_count()), draws = static_cast<double>(sz.edge_draws);
    for (double k : count) {
      double f = k / draws;
      double se = std::sqrt((1.0 / m) * (1.0 - 1.0 / m) / draws);
      double excess = std::abs(f - 1.0 / m) - cfg.xi / m;
      c.worst_z = std::max(c.worst_z, excess / se);
      c.worst_rel = std::max(c.worst_rel, std::abs(f * m - 1.0));
    }
    cases[i] = c;
  });
  double worst = -std::numeric_limits<double>::infinity(), rel = 0.0;
  std::size_t heavy = 0;
  for (const auto& c : cases) {
    worst = std::max(worst, c.worst_z);
    rel = std::max(rel, c.worst_rel);
    heavy += c.heavy;
  }
  SuiteResult r{"edgesampler", worst <= 3.0, {}};
  r.metrics = {{"cases", cases.size()},
               {"draws_per_case", sz.edge_draws},
               {"xi", sz.edge_xi},
               {"cases_with_heavy_vertex", heavy},
               {"max_relative_deviation", rel},
               {"max_standard_errors_beyond_xi", worst},
               {"allowed", 3.0}};
  return r;
}

inline SuiteResult run_verify_suite(const std::string& name, std::uint64_t seed, unsigned workers,
                                    const VerifySizes& sz = {}) {
  if (name == "reversibility") return verify_reversibility(seed, workers, sz);
  if (name == "spectra") return verify_spectra(seed, workers, sz);
  if (name == "kac") return verify_kac(seed, workers, sz);
  if (name == "heatkernel") return verify_heatkernel(seed, workers, sz);
  if (name == "monotonicity") return verify_monotonicity(seed, workers, sz);
  if (name == "pushinvariant") return verify_pushinvariant(seed, workers, sz);
  if (name == "edgesampler") return verify_edgesampler(seed, workers, sz);
  throw UsageError("unknown verify suite '" + name + "'");
}

struct VerifyReport {
  std::uint64_t seed = 1;
  std::vector<SuiteResult> suites;

  bool pass() const {
    return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.pass; });
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["seed"] = seed;
    j["pass"] = pass();
    auto arr = nlohmann::ordered_json::array();
    for (const auto& s : suites) arr.push_back(s.to_json());
    j["suites"] = arr;
    return j;
  }
};

/// `suite` is one suite name or "all".
inline VerifyReport run_verify(const std::string& suite, std::uint64_t seed, unsigned workers,
                               const VerifySizes& sz = {}) {
  VerifyReport rep;
  rep.seed = seed;
  if (suite == "all") {
    for (const auto& name : verify_suite_names()) rep.suites.push_back(run_verify_suite(name, seed, workers, sz));
  } else {
    rep.suites.push_back(run_verify_suite(suite, seed, workers, sz));
  }
  return rep;
}

}  // namespace tolerant
