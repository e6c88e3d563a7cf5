// Command-line front end: generate, exact, test, verify, bench.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tolerant/ambiguity.hpp"
#include "tolerant/budget.hpp"
#include "tolerant/config.hpp"
#include "tolerant/generators.hpp"
#include "tolerant/graph_io.hpp"
#include "tolerant/tester.hpp"
#include "tolerant/trace.hpp"
#include "tolerant/verify.hpp"

namespace {

using namespace tolerant;
using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct Globals {
  std::string config_path;
  std::vector<std::string> overrides;
  unsigned workers = 1;
  std::uint64_t seed = 1;

  Config config() const {
    Config c = config_path.empty() ? Config() : Config::from_file(config_path);
    for (const auto& kv : overrides) c.apply(kv);
    return c;
  }
};

json stamp(const Config& cfg) {
  json j;
  j["schema_version"] = 1;
  j["config_fingerprint"] = cfg.fingerprint();
  return j;
}

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

std::vector<VertexId> parse_residual(const std::string& spec, std::size_t n) {
  std::vector<VertexId> r;
  if (spec == "all") {
    for (VertexId v = 0; v < n; ++v) r.push_back(v);
    return r;
  }
  std::stringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    unsigned long id = 0;
    try {
      id = std::stoul(item, &used);
    } catch (const std::logic_error&) {
      throw UsageError("bad vertex id '" + item + "' in --R");
    }
    if (used != item.size() || id < 1 || id > n) throw UsageError("vertex id '" + item + "' out of range in --R");
    r.push_back(static_cast<VertexId>(id - 1));
  }
  if (r.empty()) throw UsageError("--R selects no vertices");
  return r;
}

std::vector<std::size_t> plus_one(const std::vector<VertexId>& ids) {
  std::vector<std::size_t> out;
  for (VertexId v : ids) out.push_back(static_cast<std::size_t>(v) + 1);
  return out;
}

std::vector<int> labels_plus_one(const std::vector<Label>& labels) {
  std::vector<int> out;
  for (Label l : labels) out.push_back(static_cast<int>(l) + 1);
  return out;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index k = 0; k < m.cols(); ++k) row[static_cast<std::size_t>(k)] = m(i, k);
    rows.push_back(row);
  }
  return rows;
}

// ---- generate ---------------------------------------------------------------------

struct GenerateArgs {
  FamilySpec spec;
  std::string out;
};

int run_generate(const Globals& g, GenerateArgs a) {
  Config cfg = g.config();
  a.spec.seed = g.seed;
  UGInstance inst = generate_family(a.spec);
  std::string path = a.out.empty() ? a.spec.family + "_n" + std::to_string(a.spec.n) + "_seed" +
                                         std::to_string(a.spec.seed) + ".graph"
                                   : a.out;
  write_instance_file(path, inst);
  json meta = stamp(cfg);
  meta["instance"] = path;
  meta["n"] = inst.graph().vertex_count();
  meta["m"] = inst.graph().edge_count();
  meta["q"] = inst.alphabet();
  meta["spec"] = a.spec.to_json();
  std::ofstream side(path + ".json");
  if (!side) throw InputError("cannot write " + path + ".json");
  side << meta.dump(2) << '\n';
  emit(meta);
  return kExitOk;
}

// ---- exact ------------------------------------------------------------------------

struct ExactArgs {
  std::string instance;
  std::string what;
  std::size_t seed_vertex = 0;  // 1-based, 0 = every vertex
  double L = 4.0;
  std::string residual = "all";
};

int run_exact(const Globals& g, const ExactArgs& a) {
  Config cfg = g.config();
  UGInstance inst = read_instance_file(a.instance);
  const Multigraph& graph = inst.graph();
  const auto dense = static_cast<std::size_t>(cfg.get("guard.dense"));
  const double beta_guard = cfg.get("guard.beta");
  json j = stamp(cfg);
  j["what"] = a.what;
  j["n"] = graph.vertex_count();
  j["m"] = graph.edge_count();
  j["q"] = inst.alphabet();

  if (a.what == "tau") {
    ExactOptimum opt = tau_ug_exact(inst, cfg.get("guard.labelings"));
    j["tau"] = opt.value;
    j["violated"] = opt.violated;
    j["witness"] = labels_plus_one(opt.witness);
  } else if (a.what == "mu") {
    if (a.seed_vertex > graph.vertex_count()) throw UsageError("--seed-vertex out of range");
    AmbiguityExact ex(inst, a.L, dense);
    j["L"] = a.L;
    if (a.seed_vertex) {
      VertexId s = static_cast<VertexId>(a.seed_vertex - 1);
      j["seed_vertex"] = a.seed_vertex;
      j["amb"] = ex.amb_all(s);
      j["mu"] = ex.mu(s);
    } else {
      std::vector<double> mu;
      for (VertexId s = 0; s < graph.vertex_count(); ++s) mu.push_back(ex.mu(s));
      j["mu"] = mu;
      j["pi_average_mu"] = ex.pi_average_mu();
    }
  } else if (a.what == "beta" || a.what == "trace" || a.what == "spectra") {
    std::vector<VertexId> r = parse_residual(a.residual, graph.vertex_count());
    TraceKernel k = trace_kernel_exact(inst, r, dense);
    j["R"] = plus_one(k.residual);
    if (a.what == "beta") {
      BetaResult b = beta_ug_exact(k, beta_guard, g.workers);
      j["beta"] = b.value;
      j["witness"] = {{"S", plus_one(b.set)}, {"labels", labels_plus_one(b.labels)}};
      if (inst.alphabet() == 2) j["beta_signed"] = beta_signed_exact(k, beta_guard, g.workers).value;
    } else if (a.what == "trace") {
      std::vector<double> pi(k.pi_r.data(), k.pi_r.data() + k.pi_r.size());
      j["pi_R"] = pi;
      j["K_R"] = matrix_json(k.marginal);
      j["K_lifted"] = matrix_json(k.lifted);
    } else {
      if (inst.alphabet() != 2) throw UsageError("exact spectra needs a Q = 2 instance");
      j["spectrum_B"] = spectrum_B(k);
      try {
        double beta = beta_signed_exact(k, beta_guard, g.workers).value;
        j["beta_signed"] = beta;
        auto ratio = dual_cheeger_ratio(k, beta);
        j["dual_cheeger_ratio"] = ratio ? json(*ratio) : json();
      } catch (const GuardError& e) {
        j["beta_signed"] = json();
        j["dual_cheeger_ratio"] = json();
        j["note"] = e.what();
      }
    }
  } else {
    throw UsageError("exact: unknown quantity '" + a.what + "'");
  }
  emit(j);
  return kExitOk;
}

// ---- test -------------------------------------------------------------------------

struct TestArgs {
  std::string instance;
  std::string mode = "ug";
  double epsilon = 0.0;
  double rho = 0.0;
  bool timing = false;
};

int run_test(const Globals& g, const TestArgs& a) {
  Config cfg = g.config();
  UGInstance inst = read_instance_file(a.instance);
  OracleHandle o(inst);
  TesterOptions opt{g.seed, g.workers};
  TestVerdict v;
  if (a.mode == "ug")
    v = ug_tolerant_test(o, a.epsilon, a.rho, cfg, opt);
  else if (a.mode == "bipartite")
    v = bipartite_tolerant_test(o, a.epsilon, a.rho, cfg, opt);
  else
    throw UsageError("test: mode must be ug or bipartite");
  emit(v.to_json(a.timing));
  return v.accept ? kExitOk : kExitFail;
}

// ---- verify -----------------------------------------------------------------------

int run_verify_cmd(const Globals& g, const std::string& suite) {
  Config cfg = g.config();
  VerifyReport rep = run_verify(suite, g.seed, g.workers);
  json j = stamp(cfg);
  json body = rep.to_json();
  for (auto& [k, v] : body.items())
    if (k != "schema_version") j[k] = v;
  emit(j);
  for (const auto& s : rep.suites) std::cerr << (s.pass ? "PASS " : "FAIL ") << s.name << '\n';
  return rep.pass() ? kExitOk : kExitFail;
}

// ---- bench ------------------------------------------------------------------------

struct BenchArgs {
  FamilySpec spec;
  std::string mode = "ug";
  double epsilon = 0.0;
  double rho = 0.0;
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> pads;
  std::string summary;
};

int run_bench(const Globals& g, BenchArgs a) {
  Config cfg = g.config();
  if (a.mode != "ug" && a.mode != "bipartite") throw UsageError("bench: mode must be ug or bipartite");
  if (a.sizes.empty()) throw UsageError("bench: --sizes needs at least one value");
  std::vector<std::size_t> pads = a.pads.empty() ? std::vector<std::size_t>{0} : a.pads;
  std::vector<BudgetPoint> points;
  std::cout << "n,m,scale,queries_seed_gen,queries_estimation,verdict\n";
  for (std::size_t n : a.sizes) {
    a.spec.n = n;
    a.spec.seed = g.seed;
    UGInstance base = generate_family(a.spec);
    for (std::size_t pad : pads) {
      UGInstance inst = pad ? pad_isolated(base, pad) : base;
      OracleHandle o(inst);
      TesterOptions opt{g.seed, g.workers};
      TestVerdict v = a.mode == "ug" ? ug_tolerant_test(o, a.epsilon, a.rho, cfg, opt)
                                     : bipartite_tolerant_test(o, a.epsilon, a.rho, cfg, opt);
      const std::size_t vn = inst.graph().vertex_count(), vm = inst.graph().edge_count();
      const char* verdict = v.accept ? "accept" : "reject";
      for (const auto& s : v.per_scale)
        std::cout << vn << ',' << vm << ',' << s.entry.r << ',' << s.seed_generation.total() << ','
                  << s.estimation.total() << ',' << verdict << '\n';
      std::cout << vn << ',' << vm << ",total," << v.seed_generation.total() << ',' << v.estimation.total() << ','
                << verdict << '\n';
      points.push_back(budget_point(vn, vm, v));
    }
  }
  if (points.size() < 2) return kExitOk;
  json j = stamp(cfg);
  BudgetReport rep = query_budget_report(points);
  json body = rep.to_json();
  for (auto& [k, v] : body.items())
    if (k != "schema_version" && k != "points") j[k] = v;
  if (a.summary.empty()) {
    std::cerr << j.dump(2) << '\n';
  } else {
    std::ofstream out(a.summary);
    if (!out) throw InputError("cannot write " + a.summary);
    out << j.dump(2) << '\n';
  }
  return kExitOk;
}

void family_options(CLI::App* cmd, FamilySpec& spec) {
  cmd->add_option("family", spec.family,
                  "planted | random-ug | odd-cycle | cycle | complete | barbell | near-bipartite | random-regular")
      ->required();
  cmd->add_option("--deg", spec.degree, "degree of regular families (0: use --edges)");
  cmd->add_option("--edges", spec.edges, "edge count of uniform planted instances");
  cmd->add_option("--q", spec.q, "alphabet size");
  cmd->add_option("--eps", spec.eps_plant, "planted noise / rewired fraction");
  cmd->add_option("--k", spec.k, "clique size for complete and barbell");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tolerant Unique Games and bipartiteness testers with exact desk-scale oracles"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "flat key = value configuration file");
  app.add_option("--set", g.overrides, "override one config key (key=value); repeatable");
  app.add_option("--workers", g.workers, "worker threads")->check(CLI::Range(1u, 1024u));
  app.add_option("--seed", g.seed, "master seed");

  GenerateArgs gen;
  auto* c_gen = app.add_subcommand("generate", "write an instance file and its JSON family spec");
  family_options(c_gen, gen.spec);
  c_gen->add_option("--n", gen.spec.n, "vertex count")->required();
  c_gen->add_option("--out", gen.out, "instance path (spec goes to <path>.json)");

  ExactArgs ex;
  auto* c_exact = app.add_subcommand("exact", "exact statistics: tau, mu, beta, trace, spectra");
  c_exact->add_option("instance", ex.instance)->required();
  c_exact->add_option("what", ex.what)->required()->check(CLI::IsMember({"tau", "mu", "beta", "trace", "spectra"}));
  c_exact->add_option("--seed-vertex", ex.seed_vertex, "1-based seed vertex for mu (default: all)");
  c_exact->add_option("--L", ex.L, "geometric mean walk length");
  c_exact->add_option("--R", ex.residual, "residual set: all, or comma-separated 1-based ids");

  TestArgs ta;
  auto* c_test = app.add_subcommand("test", "run a tolerant tester; exit 0 accept, 1 reject");
  c_test->add_option("instance", ta.instance)->required();
  c_test->add_option("--mode", ta.mode)->check(CLI::IsMember({"ug", "bipartite"}));
  c_test->add_option("--epsilon,--eps", ta.epsilon)->required();
  c_test->add_option("--rho", ta.rho)->required();
  c_test->add_flag("--timing", ta.timing, "include wall-clock seconds in the report");

  std::string suite = "all";
  auto* c_verify = app.add_subcommand("verify", "randomized property suites; exit 0 pass, 1 fail");
  std::vector<std::string> suites = verify_suite_names();
  suites.push_back("all");
  c_verify->add_option("suite", suite)->check(CLI::IsMember(suites));

  BenchArgs bench;
  auto* c_bench = app.add_subcommand("bench", "query counts over a size grid (CSV) plus fitted slopes");
  family_options(c_bench, bench.spec);
  c_bench->add_option("--mode", bench.mode)->check(CLI::IsMember({"ug", "bipartite"}));
  c_bench->add_option("--epsilon", bench.epsilon)->required();
  c_bench->add_option("--rho", bench.rho)->required();
  c_bench->add_option("--sizes", bench.sizes, "vertex counts of the generated graphs")->delimiter(',')->required();
  c_bench->add_option("--pad", bench.pads, "pad every instance with isolated vertices up to these n")->delimiter(',');
  c_bench->add_option("--summary", bench.summary, "write the slope summary here instead of stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*c_gen) return run_generate(g, gen);
    if (*c_exact) return run_exact(g, ex);
    if (*c_test) return run_test(g, ta);
    if (*c_verify) return run_verify_cmd(g, suite);
    if (*c_bench) return run_bench(g, bench);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
