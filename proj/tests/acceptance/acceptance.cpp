// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero if any fails.
// Usage: acceptance [AC1 AC2 ...]   (no arguments runs everything)

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "tolerant/ambiguity.hpp"
#include "tolerant/budget.hpp"
#include "tolerant/config.hpp"
#include "tolerant/generators.hpp"
#include "tolerant/lift.hpp"
#include "tolerant/peeling.hpp"
#include "tolerant/push.hpp"
#include "tolerant/tester.hpp"
#include "tolerant/verify.hpp"
#include "tolerant/walks.hpp"

using namespace tolerant;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

UGInstance random_instance(std::size_t n, std::size_t m, int q, Rng& rng) {
  Multigraph g = random_multigraph(n, m, rng);
  std::vector<Permutation> perms;
  for (std::size_t e = 0; e < m; ++e) perms.push_back(Permutation::random(q, rng));
  return UGInstance(std::move(g), q, perms);
}

// Monte Carlo lifted-walk frequencies against exact PageRank rows, lifts of at most 120 states.
Outcome ac1() {
  auto t0 = std::chrono::steady_clock::now();
  const std::size_t cases = 200, walks = 100000;
  double worst = 0.0;
  std::size_t largest = 0;
  for (std::size_t i = 0; i < cases; ++i) {
    Rng rng = make_stream(1, {0xac1, i});
    int q = 2 + static_cast<int>(uniform_index(rng, 3));
    std::size_t n = 4 + uniform_index(rng, 120 / static_cast<std::size_t>(q) - 3);
    UGInstance inst = random_instance(n, n + uniform_index(rng, 2 * n), q, rng);
    double L = 1.0 + 19.0 * uniform01(rng);
    LabelLift lift(inst);
    largest = std::max(largest, lift.state_count());
    VertexId s0 = static_cast<VertexId>(uniform_index(rng, n));
    while (inst.graph().degree(s0) == 0) s0 = static_cast<VertexId>(uniform_index(rng, n));
    LiftState x{s0, static_cast<Label>(uniform_index(rng, q))};
    Eigen::VectorXd exact = ppr_exact(lift, lift.index(x.vertex, x.label), L);
    OracleHandle o(inst);
    WalkContext ctx(o, LabelMode::constrained);
    std::vector<double> freq(lift.state_count(), 0.0);
    for (std::size_t k = 0; k < walks; ++k) {
      std::size_t state;
      if (i % 2 == 0) {
        LiftState y = run_lifted_walk(ctx, x, L, rng);
        state = lift.index(y.vertex, y.label);
      } else {
        WalkOutcome w = run_geometric_walk(ctx, x.vertex, L, rng);
        state = lift.index(w.endpoint, w.transport(x.label));
      }
      freq[state] += 1.0 / static_cast<double>(walks);
    }
    double tv = 0.0;
    for (std::size_t s = 0; s < freq.size(); ++s) tv += 0.5 * std::abs(freq[s] - exact[static_cast<Eigen::Index>(s)]);
    worst = std::max(worst, tv);
  }
  double secs = seconds_since(t0);
  return {worst < 0.02 && secs < 300.0,
          fmt("cases=%zu walks=%zu max_states=%zu max_TV=%.5f (<0.02) time=%.1fs (<300s)", cases, walks, largest, worst,
              secs)};
}

// Bidirectional point estimator contract plus the push invariant.
Outcome ac2() {
  const std::size_t pairs = 200;
  std::size_t violations = 0;
  for (std::size_t i = 0; i < pairs; ++i) {
    Rng rng = make_stream(1, {0xac2, i});
    int q = 2 + static_cast<int>(i % 2);
    std::size_t n = 6 + uniform_index(rng, 15);
    UGInstance inst = detail::connected_verify_instance(n, n + uniform_index(rng, n * (n - 1) / 2 - n + 1), q, rng);
    double L = 1.0 + 9.0 * uniform01(rng);
    LabelLift lift(inst);
    LiftState x{static_cast<VertexId>(uniform_index(rng, n)), static_cast<Label>(uniform_index(rng, q))};
    LiftState t{static_cast<VertexId>(uniform_index(rng, n)), static_cast<Label>(uniform_index(rng, q))};
    double exact = ppr_exact(lift, lift.index(x.vertex, x.label), L)[static_cast<Eigen::Index>(lift.index(t.vertex, t.label))];
    PprParams p;
    p.L = L;
    p.eta = 0.1;
    p.delta = 0.1;
    double dt = 2.0 * static_cast<double>(inst.graph().degree(t.vertex));
    p.tau_t = 0.1 * dt / lift.volume();
    OracleHandle o(inst);
    WalkContext ctx(o, LabelMode::constrained);
    PprEstimate est = ppr_point_estimate(ctx, x, t, p, rng);
    if (std::abs(est.value - exact) > p.eta * (exact + p.tau_t)) ++violations;
  }
  double frac = static_cast<double>(violations) / static_cast<double>(pairs);
  double allowed = 0.1 + 3.0 * std::sqrt(0.1 * 0.9 / static_cast<double>(pairs));
  SuiteResult inv = verify_pushinvariant(1, 1);
  double dev = inv.metrics["max_deviation"].get<double>();
  return {frac <= allowed && inv.pass,
          fmt("violation_fraction=%.4f (<=%.4f) push_runs=%zu push_invariant_max_dev=%.3g (<=1e-12)", frac, allowed,
              inv.metrics["runs"].get<std::size_t>(), dev)};
}

Outcome ac3() {
  VerifySizes sz;
  sz.edge_graphs = 30;
  sz.edge_draws = 1000000;
  sz.edge_xi = {0.1, 0.25};
  SuiteResult r = verify_edgesampler(1, 1, sz);
  return {r.pass, fmt("graphs=30 draws=1e6 xi={0.1,0.25} heavy_cases=%zu max_SE_beyond_xi=%.3f (<=3)",
                      r.metrics["cases_with_heavy_vertex"].get<std::size_t>(),
                      r.metrics["max_standard_errors_beyond_xi"].get<double>())};
}

Outcome ac4() {
  std::vector<SuiteResult> rs;
  for (const char* name : {"reversibility", "spectra", "monotonicity", "heatkernel", "kac"})
    rs.push_back(run_verify_suite(name, 1, 1));
  bool all = true;
  for (const auto& r : rs) all = all && r.pass;
  const auto& rev = rs[0].metrics;
  const auto& spec = rs[1].metrics;
  const auto& mono = rs[2].metrics;
  const auto& heat = rs[3].metrics;
  const auto& kac = rs[4].metrics;
  return {all, fmt("refined_rev=%.2g lifted_rev=%.2g min_Kid=%.3f spec=[%.3g,%.12f] super=%.2g kernel=%.2g scale=%.2g "
                   "heat_chains=%zu heat_min_margin=%.3f kac_max_z=%.2f (<=3)",
                   rev["max_refined_deviation"].get<double>(), rev["max_lifted_deviation"].get<double>(),
                   rev["min_identity_hold"].get<double>(), spec["min_eigenvalue"].get<double>(),
                   spec["max_eigenvalue"].get<double>(), mono["max_superadditivity_violation"].get<double>(),
                   mono["max_kernel_violation"].get<double>(), mono["max_scale_violation"].get<double>(),
                   heat["chains"].get<std::size_t>(), heat["min_relative_margin"].get<double>(),
                   kac["max_standardized_excess"].get<double>())};
}

Outcome ac5() {
  std::size_t ok = 0, obstructions = 0, implication = 0;
  double min_slack = 1.0;
  const std::size_t runs = 50;
  for (std::size_t i = 0; i < runs; ++i) {
    Rng rng = make_stream(1, {0xac5, i});
    int q = 2 + static_cast<int>(i % 2);
    std::size_t n = q == 2 ? 9 : 7;
    UGInstance inst = random_instance(n, n + uniform_index(rng, n), q, rng);
    PeelSchedule s;
    s.eta = 0.1 + 0.1 * static_cast<double>(i % 4);
    s.nonuniform = i % 3 == 1;
    s.volume_rule = q == 2 && i % 4 == 0;
    PeelRecord rec = peel_simulate(inst, s);
    ok += rec.violated <= rec.bound;
    obstructions += rec.obstruction;
    implication += rec.implication_holds;
    min_slack = std::min(min_slack, rec.bound - rec.violated);
  }
  return {ok == runs, fmt("runs=%zu bound_holds=%zu obstructions=%zu beta_implication_holds=%zu min_slack=%.4f", runs, ok,
                          obstructions, implication, min_slack)};
}

struct Separation {
  std::size_t accepted = 0;
  std::size_t runs = 0;
};

Separation repeat_tester(const UGInstance& inst, bool bipartite, double eps, double rho) {
  Config cfg;
  Separation s;
  OracleHandle o(inst);
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    TestVerdict v = bipartite ? bipartite_tolerant_test(o, eps, rho, cfg, {seed, 1})
                              : ug_tolerant_test(o, eps, rho, cfg, {seed, 1});
    s.accepted += v.accept;
    ++s.runs;
  }
  return s;
}

Outcome ac6() {
  auto t0 = std::chrono::steady_clock::now();
  NearBipartite nb = near_bipartite(48, 6, 0.01, 1);
  double tau_yes = uncut_fraction(nb.graph, nb.side);
  Multigraph k10 = complete_graph(10);
  double tau_no = tau_uncut_exact(k10).value;
  Separation yes = repeat_tester(UGInstance::parity(nb.graph), true, 0.005, 0.3);
  Separation no = repeat_tester(UGInstance::parity(k10), true, 0.005, 0.3);
  double secs = seconds_since(t0);
  bool pass = tau_yes <= 0.01 && std::abs(tau_no - 4.0 / 9.0) < 1e-12 && yes.accepted >= 20 &&
              no.runs - no.accepted >= 20 && secs < 1200.0;
  return {pass, fmt("tau(near-bipartite)<=%.4f tau(K10)=%.6f accepted=%zu/30 (>=20) rejected=%zu/30 (>=20) "
                    "time=%.0fs (<1200s)",
                    tau_yes, tau_no, yes.accepted, no.runs - no.accepted, secs)};
}

Outcome ac7() {
  PlantedInstance pl = planted_ug(FamilySpec{"planted", 64, 8, 0, 3, 0.005, 1, 0});
  double tau_yes = violated_fraction(pl.instance, pl.planted);
  UGInstance rc = random_constraint_ug(14, 8, 3, 1);
  double tau_no = tau_ug_exact(rc).value;
  Separation yes = repeat_tester(pl.instance, false, 0.005, 0.3);
  Separation no = repeat_tester(rc, false, 0.005, 0.3);
  bool pass = tau_yes <= 0.005 && tau_no >= 0.3 && yes.accepted >= 20 && no.runs - no.accepted >= 20;
  return {pass, fmt("tau(planted)<=%.5f tau(random, exhaustive)=%.4f accepted=%zu/30 (>=20) rejected=%zu/30 (>=20)",
                    tau_yes, tau_no, yes.accepted, no.runs - no.accepted)};
}

// pi-average of exact mu on planted families against eps, at fixed L.
Outcome ac8() {
  const double L = 4.0;
  const std::vector<double> eps{0.002, 0.005, 0.01};
  std::vector<double> avg;
  std::string ratios;
  for (double e : eps) {
    double acc = 0.0;
    const int seeds = 4;
    for (int s = 1; s <= seeds; ++s) {
      PlantedInstance p = planted_ug(FamilySpec{"planted", 256, 8, 0, 3, e, static_cast<std::uint64_t>(s), 0});
      acc += AmbiguityExact(p.instance, L).pi_average_mu();
    }
    avg.push_back(acc / seeds);
    ratios += fmt(" mu(%.3f)=%.5f mu/(eps L)=%.3f", e, avg.back(), avg.back() / (e * L));
  }
  auto slope = loglog_slope(eps, avg);
  bool pass = slope && *slope >= 0.5 && *slope <= 2.0;
  return {pass, fmt("L=%.0f slope=%.3f (in [0.5, 2])", L, slope ? *slope : NAN) + ratios};
}

Config budget_config() {
  Config cfg;
  cfg.apply("push.depth=1");
  cfg.apply("amb.trial_constant=0.01");
  cfg.apply("ug.C_N=0.01");
  return cfg;
}

UGInstance planted_with_edges(std::size_t m, std::size_t n_total, std::uint64_t seed) {
  PlantedInstance p = planted_ug(FamilySpec{"planted", m / 4, 8, 0, 3, 0.0, seed, 0});
  return pad_isolated(p.instance, n_total);
}

Outcome ac9() {
  Config cfg = budget_config();
  std::vector<BudgetPoint> pts;
  for (int e = 8; e <= 14; ++e) {
    std::size_t m = std::size_t{1} << e;
    UGInstance inst = planted_with_edges(m, 4096, static_cast<std::uint64_t>(e));
    OracleHandle o(inst);
    pts.push_back(budget_point(4096, m, ug_tolerant_test(o, 0.001, 0.3, cfg, {7, 1})));
  }
  UGInstance base = planted_with_edges(1024, 256, 3);
  for (std::size_t n : {512, 1024, 2048, 4096, 8192, 16384}) {
    UGInstance inst = pad_isolated(base, n);
    OracleHandle o(inst);
    pts.push_back(budget_point(n, 1024, ug_tolerant_test(o, 0.001, 0.3, cfg, {7, 1})));
  }
  BudgetReport rep = query_budget_report(pts);
  bool pass = rep.estimation_vs_m && rep.seed_vs_n && *rep.estimation_vs_m >= 0.35 && *rep.estimation_vs_m <= 0.65 &&
              *rep.seed_vs_n >= 0.8 && *rep.seed_vs_n <= 1.2;
  return {pass, fmt("estimation_vs_m slope=%.3f (in [0.35,0.65], m=2^8..2^14, n=4096) seed_vs_n slope=%.3f "
                    "(in [0.8,1.2], m=1024, n=512..16384) config=%s",
                    rep.estimation_vs_m.value_or(NAN), rep.seed_vs_n.value_or(NAN), cfg.fingerprint().c_str())};
}

Outcome ac10() {
  std::vector<std::string> verify, bip, ug;
  Config cfg;
  UGInstance nb = UGInstance::parity(near_bipartite(48, 6, 0.01, 1).graph);
  UGInstance rc = random_constraint_ug(14, 8, 3, 1);
  OracleHandle onb(nb), orc(rc);
  for (unsigned w : {1u, 2u, 8u}) {
    verify.push_back(run_verify("all", 1, w).to_json().dump());
    bip.push_back(bipartite_tolerant_test(onb, 0.005, 0.3, cfg, {1, w}).to_json().dump());
    ug.push_back(ug_tolerant_test(orc, 0.005, 0.3, cfg, {1, w}).to_json().dump());
  }
  auto same = [](const std::vector<std::string>& v) { return v[0] == v[1] && v[0] == v[2]; };
  return {same(verify) && same(bip) && same(ug),
          fmt("verify_all=%s bipartite_tester=%s ug_tester=%s (workers 1, 2, 8)", same(verify) ? "identical" : "DIFFER",
              same(bip) ? "identical" : "DIFFER", same(ug) ? "identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10}};
  std::set<std::string> wanted(argv + 1, argv + argc);
  bool all = true;
  for (const auto& [name, fn] : criteria) {
    if (!wanted.empty() && !wanted.count(name)) continue;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("%s %s %s [%.1fs]\n", name.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
