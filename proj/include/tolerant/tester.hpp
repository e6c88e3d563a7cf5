#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tolerant/ambiguity.hpp"
#include "tolerant/config.hpp"
#include "tolerant/edge_sampler.hpp"
#include "tolerant/errors.hpp"
#include "tolerant/oracle.hpp"
#include "tolerant/parallel.hpp"
#include "tolerant/rng.hpp"
#include "tolerant/walks.hpp"

namespace tolerant {

enum class TesterKind { ug, bipartite };

struct ScaleEntry {
  double r = 1.0;          // scale value (r for UG, q for bipartite)
  double L = 1.0;          // geometric mean at this scale
  double threshold = 0.0;  // subroutine beta: alpha_r, or the constant alpha
  std::uint64_t seeds = 0;
  double delta = 0.1;      // subroutine failure budget
  double reject_at = 1.0;  // reject when active >= reject_at
};

struct ScaleSchedule {
  TesterKind kind = TesterKind::ug;
  double rho = 0.1;     // effective rho after clamping
  double lambda = 0.0;  // bipartite only
  std::vector<ScaleEntry> scales;
};

/// Q_rho = {2^j rho^2 : 0 <= j < ceil(log2 rho^-2)} u {1}, with
/// L_r = C rho^-3 r^(1/2) log n, alpha_r = c rho r^(-1/2), N_r = ceil(C_N r^-1 log(10|Q_rho|)),
/// delta_r = c_delta r and rejection at c_reject r N_r active seeds.
inline ScaleSchedule ug_schedule(double rho, std::size_t n, const Config& cfg) {
  if (!(rho > 0.0 && rho < 1.0)) throw UsageError("ug_schedule: rho must lie in (0, 1)");
  ScaleSchedule sch;
  sch.kind = TesterKind::ug;
  sch.rho = std::min(rho, cfg.get("ug.rho0"));
  const double r2 = sch.rho * sch.rho;
  const int count = static_cast<int>(std::ceil(std::log2(1.0 / r2) - 1e-12));
  std::vector<double> rs;
  for (int j = 0; j < count; ++j) rs.push_back(std::ldexp(r2, j));
  rs.push_back(1.0);
  const double logn = std::log(std::max<double>(static_cast<double>(n), 2.0));
  const double log_scales = std::log(10.0 * static_cast<double>(rs.size()));
  for (double r : rs) {
    ScaleEntry e;
    e.r = r;
    e.L = std::max(1.0, cfg.get("ug.C") * std::pow(sch.rho, -3.0) * std::sqrt(r) * logn);
    e.threshold = std::min(0.99, cfg.get("ug.c_alpha") * sch.rho / std::sqrt(r));
    e.seeds = static_cast<std::uint64_t>(std::ceil(cfg.get("ug.C_N") / r * log_scales));
    e.delta = std::min(0.3, cfg.get("ug.c_delta") * r);
    e.reject_at = cfg.get("ug.c_reject") * r * static_cast<double>(e.seeds);
    sch.scales.push_back(e);
  }
  return sch;
}

/// lambda = c_lambda rho/(1 + log(1/rho)); scales {2^j lambda <= 1} u {1} with
/// L_q = C q lambda^-2 log n, N_q = ceil(C_N q^-1 log(10|Q|)), delta_q = c_delta q and
/// rejection at c_theta q N_q active seeds.
inline ScaleSchedule bipartite_schedule(double rho, std::size_t n, const Config& cfg) {
  if (!(rho > 0.0 && rho < 1.0)) throw UsageError("bipartite_schedule: rho must lie in (0, 1)");
  ScaleSchedule sch;
  sch.kind = TesterKind::bipartite;
  sch.rho = std::min(rho, cfg.get("bip.rho0"));
  sch.lambda = cfg.get("bip.c_lambda") * sch.rho / (1.0 + std::log(1.0 / sch.rho));
  if (!(sch.lambda > 0.0 && sch.lambda <= 1.0)) throw UsageError("bipartite_schedule: lambda must lie in (0, 1]");
  std::vector<double> qs;
  for (double q = sch.lambda; q < 1.0; q *= 2.0) qs.push_back(q);
  qs.push_back(1.0);
  const double logn = std::log(std::max<double>(static_cast<double>(n), 2.0));
  const double log_scales = std::log(10.0 * static_cast<double>(qs.size()));
  for (double q : qs) {
    ScaleEntry e;
    e.r = q;
    e.L = std::max(1.0, cfg.get("bip.C") * q / (sch.lambda * sch.lambda) * logn);
    e.threshold = cfg.get("bip.alpha");
    e.seeds = static_cast<std::uint64_t>(std::ceil(cfg.get("bip.C_N") / q * log_scales));
    e.delta = std::min(0.3, cfg.get("bip.c_delta") * q);
    e.reject_at = cfg.get("bip.c_theta") * q * static_cast<double>(e.seeds);
    sch.scales.push_back(e);
  }
  return sch;
}

/// Subroutine constants shared by both testers.
inline SubroutineParams subroutine_params(const Config& cfg, double beta, double delta) {
  SubroutineParams p;
  p.beta = beta;
  p.delta = delta;
  p.c_eta = cfg.get("amb.c_eta");
  p.c_tau = cfg.get("amb.c_tau");
  p.trial_constant = cfg.get("amb.trial_constant");
  p.eta_cap = cfg.get("amb.eta_cap");
  p.bernstein_c = cfg.get("push.bernstein_c");
  p.push_depth = cfg.get("push.depth");
  return p;
}

struct ScaleOutcome {
  ScaleEntry entry;
  std::uint64_t active = 0;
  bool rejects = false;
  QueryStats seed_generation;
  QueryStats estimation;
};

struct TestVerdict {
  bool accept = true;
  std::string mode;
  double epsilon = 0.0;
  double rho = 0.0;
  double rho_effective = 0.0;
  std::uint64_t master_seed = 0;
  std::vector<ScaleOutcome> per_scale;
  QueryStats seed_generation;
  QueryStats estimation;
  std::vector<std::string> warnings;
  std::string config_fingerprint;
  double wall_seconds = 0.0;

  QueryStats total() const { return seed_generation + estimation; }

  /// Wall time is only written when asked for, so reports stay byte-identical.
  nlohmann::ordered_json to_json(bool with_timing = false) const {
    auto stats = [](const QueryStats& s) {
      return nlohmann::ordered_json{{"uniform_vertex", s.uniform_vertex},
                                    {"degree", s.degree},
                                    {"neighbor", s.neighbor},
                                    {"constrained_neighbor", s.constrained_neighbor},
                                    {"total", s.total()}};
    };
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["verdict"] = accept ? "accept" : "reject";
    j["mode"] = mode;
    j["epsilon"] = epsilon;
    j["rho"] = rho;
    j["rho_effective"] = rho_effective;
    j["master_seed"] = master_seed;
    j["config_fingerprint"] = config_fingerprint;
    auto scales = nlohmann::ordered_json::array();
    for (const auto& s : per_scale)
      scales.push_back({{"r", s.entry.r},
                        {"L", s.entry.L},
                        {"N", s.entry.seeds},
                        {"beta", s.entry.threshold},
                        {"delta", s.entry.delta},
                        {"active", s.active},
                        {"threshold", s.entry.reject_at},
                        {"rejects", s.rejects},
                        {"queries_seed_generation", s.seed_generation.total()},
                        {"queries_estimation", s.estimation.total()}});
    j["per_scale"] = scales;
    j["queries"] = {{"seed_generation", stats(seed_generation)},
                    {"estimation", stats(estimation)},
                    {"total", stats(total())}};
    j["warnings"] = warnings;
    if (with_timing) j["wall_seconds"] = wall_seconds;
    return j;
  }
};

struct TesterOptions {
  std::uint64_t master_seed = 1;
  unsigned workers = 1;
};

namespace detail {

struct SeedTask {
  bool active = false;
  QueryStats seed_generation;
  QueryStats estimation;
};

inline TestVerdict run_tester(const OracleHandle& oracle, TesterKind kind, double epsilon, double rho,
                              const Config& cfg, const TesterOptions& opt) {
  auto t0 = std::chrono::steady_clock::now();
  if (!(epsilon > 0.0 && epsilon < rho && rho < 1.0))
    throw UsageError("tester needs 0 < epsilon < rho < 1");
  TestVerdict v;
  v.mode = kind == TesterKind::ug ? "ug" : "bipartite";
  v.epsilon = epsilon;
  v.rho = rho;
  v.master_seed = opt.master_seed;
  v.config_fingerprint = cfg.fingerprint();
  if (kind == TesterKind::bipartite && oracle.alphabet() != 2)
    throw UsageError("bipartite tester needs a Q = 2 instance");
  if (oracle.m() == 0) {
    v.rho_effective = rho;
    v.warnings.push_back("m = 0: trivial instance accepted without queries");
    return v;
  }
  const std::size_t n = oracle.n();
  ScaleSchedule sch = kind == TesterKind::ug ? ug_schedule(rho, n, cfg) : bipartite_schedule(rho, n, cfg);
  v.rho_effective = sch.rho;
  if (sch.rho < rho)
    v.warnings.push_back("rho clamped to " + std::to_string(sch.rho));
  const double logn = std::log(std::max<double>(static_cast<double>(n), 2.0));
  if (kind == TesterKind::ug && !(epsilon * logn <= cfg.get("ug.gap_c") * std::pow(sch.rho, 4.0)))
    v.warnings.push_back("gap condition eps log n <= c rho^4 not met");
  if (kind == TesterKind::bipartite && !(epsilon * logn <= cfg.get("bip.gap_c") * sch.rho * sch.rho))
    v.warnings.push_back("gap condition eps log n <= c rho^2 not met");
  if (epsilon >= sch.rho) v.warnings.push_back("epsilon is not below the effective rho");

  EdgeSamplerConfig sampler;
  sampler.xi = cfg.get("edge.xi");
  struct Key {
    std::size_t scale;
    std::uint64_t seed;
  };
  std::vector<Key> keys;
  for (std::size_t i = 0; i < sch.scales.size(); ++i)
    for (std::uint64_t k = 0; k < sch.scales[i].seeds; ++k) keys.push_back({i, k});
  std::vector<SeedTask> results(keys.size());
  const LabelMode mode = kind == TesterKind::ug ? LabelMode::constrained : LabelMode::parity;

  parallel_for(keys.size(), opt.workers, [&](std::size_t t) {
    const ScaleEntry& e = sch.scales[keys[t].scale];
    OracleHandle handle = oracle.fork();
    WalkContext<OracleHandle> ctx(handle, mode);
    Rng rng = make_stream(opt.master_seed, {keys[t].scale, keys[t].seed});
    VertexId s = sample_seed(ctx, sampler, rng);
    QueryStats after_seed = handle.stats();
    SubroutineParams params = subroutine_params(cfg, e.threshold, e.delta);
    AmbiguityReport rep = ambiguity_test(ctx, s, e.L, params, rng);
    results[t] = {rep.verdict == Verdict::high, after_seed, handle.stats() - after_seed};
  });

  v.per_scale.resize(sch.scales.size());
  for (std::size_t i = 0; i < sch.scales.size(); ++i) v.per_scale[i].entry = sch.scales[i];
  for (std::size_t t = 0; t < keys.size(); ++t) {
    ScaleOutcome& out = v.per_scale[keys[t].scale];
    out.active += results[t].active;
    out.seed_generation += results[t].seed_generation;
    out.estimation += results[t].estimation;
    v.seed_generation += results[t].seed_generation;
    v.estimation += results[t].estimation;
  }
  for (auto& s : v.per_scale) {
    s.rejects = static_cast<double>(s.active) >= s.entry.reject_at;
    if (s.rejects) v.accept = false;
  }
  v.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return v;
}

}  // namespace detail

/// Tolerant Unique Games tester: accepts w.p. >= 2/3 when tau_UG <= eps and rejects
/// w.p. >= 2/3 when tau_UG >= rho, for the calibrated constants in `cfg`.
inline TestVerdict ug_tolerant_test(const OracleHandle& oracle, double epsilon, double rho, const Config& cfg,
                                    const TesterOptions& opt = {}) {
  return detail::run_tester(oracle, TesterKind::ug, epsilon, rho, cfg, opt);
}

/// Tolerant bipartiteness tester on a plain graph oracle (the Q = 2 parity instance).
inline TestVerdict bipartite_tolerant_test(const OracleHandle& oracle, double epsilon, double rho,
                                           const Config& cfg, const TesterOptions& opt = {}) {
  return detail::run_tester(oracle, TesterKind::bipartite, epsilon, rho, cfg, opt);
}

}  // namespace tolerant
