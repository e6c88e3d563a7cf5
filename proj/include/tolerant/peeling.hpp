#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <json.hpp>

#include "tolerant/errors.hpp"
#include "tolerant/trace.hpp"
#include "tolerant/ug_instance.hpp"

namespace tolerant {

struct PeelSchedule {
  double eta = 0.1;          // eta_i = eta, or eta / z_i when nonuniform
  bool nonuniform = false;
  double stop_mass = 0.0;    // stop once pi(R_i) < stop_mass
  bool volume_rule = false;  // Q = 2 volume-peelability (internal violations count twice)
  bool check_beta = true;    // compute beta_UG(K_{R_i}) at every step
};

struct PeelStep {
  std::vector<VertexId> set;
  std::vector<Label> labels;  // parallel to `set`
  double eta = 0.0;
  double z = 0.0;     // pi(R_{i-1})
  double mass = 0.0;  // pi(S_i)
  std::size_t internal_violations = 0;
  std::size_t boundary = 0;
  std::optional<double> beta;  // beta_UG(K_{R_{i-1}})
};

struct PeelRecord {
  std::vector<PeelStep> steps;
  std::vector<VertexId> residual;  // R*
  bool obstruction = false;        // stopped because no peelable set existed
  std::optional<double> obstruction_beta;
  double obstruction_eta = 0.0;
  Labeling labeling;
  double bound = 0.0;     // 2 sum eta_i pi(S_i) + pi(R*)
  double violated = 0.0;  // violated_fraction(labeling)
  /// Every step where beta < eta/4 found a peelable set (the obstruction included).
  bool implication_holds = true;

  bool bound_holds() const { return violated <= bound + 1e-12; }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    auto st = nlohmann::ordered_json::array();
    for (const auto& s : steps) {
      nlohmann::ordered_json e{{"set", s.set}, {"labels", std::vector<int>(s.labels.begin(), s.labels.end())},
                               {"eta", s.eta}, {"z", s.z}, {"mass", s.mass},
                               {"internal_violations", s.internal_violations}, {"boundary", s.boundary}};
      e["beta"] = s.beta ? nlohmann::ordered_json(*s.beta) : nlohmann::ordered_json();
      st.push_back(e);
    }
    j["steps"] = st;
    j["residual"] = residual;
    j["obstruction"] = obstruction;
    j["bound"] = bound;
    j["violated"] = violated;
    j["bound_holds"] = bound_holds();
    j["implication_holds"] = implication_holds;
    return j;
  }
};

namespace detail {

struct PeelCandidate {
  std::size_t code = 0;
  std::uint64_t volume = 0;
  std::size_t members = 0;
  std::size_t internal = 0;
  std::size_t boundary = 0;
};

}  // namespace detail

/// Greedy peeling: in each residual R_i, exhaust all (S, l) and remove the eta_i-peelable
/// set of largest volume (then most vertices, then first in enumeration order). When
/// none exists R_i is the residual obstruction. R* is labeled 0.
inline PeelRecord peel_simulate(const UGInstance& inst, const PeelSchedule& sched,
                                double beta_guard = kDefaultBetaGuard, std::size_t dense_guard = kDefaultDenseGuard) {
  const Multigraph& g = inst.graph();
  const int q = inst.alphabet();
  if (g.edge_count() == 0) throw UsageError("peel_simulate needs m >= 1");
  if (sched.volume_rule && q != 2) throw UsageError("volume-peelability needs Q = 2");
  if (!(sched.eta > 0.0)) throw UsageError("peel_simulate: eta must be positive");
  const double two_m = 2.0 * static_cast<double>(g.edge_count());
  PeelRecord rec;
  rec.labeling.assign(g.vertex_count(), 0);
  std::vector<bool> in_r(g.vertex_count(), true);
  std::vector<VertexId> r(g.vertex_count());
  for (VertexId v = 0; v < g.vertex_count(); ++v) r[v] = v;
  double peeled_term = 0.0;

  while (!r.empty()) {
    double z = static_cast<double>(g.volume(r)) / two_m;
    if (z < sched.stop_mass) break;
    double eta = sched.nonuniform && z > 0.0 ? sched.eta / z : sched.eta;
    std::optional<double> beta;
    if (sched.check_beta && z > 0.0) beta = beta_ug_exact(trace_kernel_exact(inst, r, dense_guard), beta_guard).value;

    const std::size_t radix = static_cast<std::size_t>(q) + 1;
    const std::size_t total = detail::checked_power(radix, r.size(), beta_guard, "peel_simulate: (Q+1)^|R|");
    std::vector<int> pos(g.vertex_count(), -1);
    for (std::size_t i = 0; i < r.size(); ++i) pos[r[i]] = static_cast<int>(i);
    std::vector<std::pair<std::size_t, std::size_t>> inner;  // edges of G[R] by position
    std::vector<EdgeId> inner_ids;
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
      const auto& c = g.edge(e);
      if (in_r[c.u] && in_r[c.v]) {
        inner.emplace_back(pos[c.u], pos[c.v]);
        inner_ids.push_back(e);
      }
    }
    std::optional<detail::PeelCandidate> best;
    std::vector<int> digit(r.size());
    for (std::size_t code = 1; code < total; ++code) {
      std::size_t c = code;
      detail::PeelCandidate cand{code};
      for (std::size_t i = 0; i < r.size(); ++i) {
        digit[i] = static_cast<int>(c % radix);
        c /= radix;
        if (digit[i]) {
          cand.volume += g.degree(r[i]);
          ++cand.members;
        }
      }
      for (std::size_t k = 0; k < inner.size(); ++k) {
        int a = digit[inner[k].first], b = digit[inner[k].second];
        if (a && b) {
          const auto& e = g.edge(inner_ids[k]);
          Label la = static_cast<Label>(a - 1), lb = static_cast<Label>(b - 1);
          Label lu = e.u == r[inner[k].first] ? la : lb;
          Label lv = e.u == r[inner[k].first] ? lb : la;
          cand.internal += inst.constraint(inner_ids[k], true)(lu) != lv;
        } else if (a || b) {
          ++cand.boundary;
        }
      }
      double charge = static_cast<double>((sched.volume_rule ? 2 : 1) * cand.internal + cand.boundary);
      if (charge > eta * static_cast<double>(cand.volume) + 1e-12) continue;
      if (!best || cand.volume > best->volume || (cand.volume == best->volume && cand.members > best->members))
        best = cand;
    }
    if (!best) {
      rec.obstruction = true;
      rec.obstruction_beta = beta;
      rec.obstruction_eta = eta;
      if (beta && *beta < eta / 4.0) rec.implication_holds = false;
      break;
    }
    PeelStep step;
    step.eta = eta;
    step.z = z;
    step.beta = beta;
    step.internal_violations = best->internal;
    step.boundary = best->boundary;
    std::size_t c = best->code;
    std::vector<VertexId> rest;
    for (std::size_t i = 0; i < r.size(); ++i) {
      int d = static_cast<int>(c % radix);
      c /= radix;
      if (d) {
        step.set.push_back(r[i]);
        step.labels.push_back(static_cast<Label>(d - 1));
        rec.labeling[r[i]] = static_cast<Label>(d - 1);
        in_r[r[i]] = false;
      } else {
        rest.push_back(r[i]);
      }
    }
    step.mass = static_cast<double>(best->volume) / two_m;
    peeled_term += 2.0 * eta * step.mass;
    rec.steps.push_back(std::move(step));
    r = std::move(rest);
  }
  rec.residual = r;
  rec.bound = peeled_term + static_cast<double>(g.volume(r)) / two_m;
  rec.violated = violated_fraction(inst, rec.labeling);
  return rec;
}

}  // namespace tolerant
