#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <vector>

#include <json.hpp>

#include "tolerant/ambiguity.hpp"
#include "tolerant/trace.hpp"

namespace tolerant {

struct OverlapWitnessRow {
  double L = 1.0;
  double mass = 0.0;  // pi_R-mass of starts s in R with overlap_exact(s, L) >= alpha0
};

struct OverlapWitness {
  std::vector<VertexId> residual;
  std::optional<double> beta_signed;  // beta(K_R), when within the guard
  double alpha0 = 0.25;
  double kappa0 = 7.0 / 16.0;
  std::vector<OverlapWitnessRow> rows;
  std::optional<double> l_star;  // first grid L whose mass reaches kappa0

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["residual"] = residual;
    j["beta_signed"] = beta_signed ? nlohmann::ordered_json(*beta_signed) : nlohmann::ordered_json();
    j["alpha0"] = alpha0;
    j["kappa0"] = kappa0;
    auto rs = nlohmann::ordered_json::array();
    for (const auto& r : rows) rs.push_back({{"L", r.L}, {"mass", r.mass}});
    j["rows"] = rs;
    j["L_star"] = l_star ? nlohmann::ordered_json(*l_star) : nlohmann::ordered_json();
    return j;
  }
};

/// Sweeps L over the grid and reports how much pi_R-mass of starts in R reaches parity
/// overlap alpha0. Exploratory: nothing here is asserted.
inline OverlapWitness geometric_overlap_witness(const Multigraph& g, std::vector<VertexId> r,
                                                const std::vector<double>& l_grid, double alpha0 = 0.25,
                                                double kappa0 = 7.0 / 16.0, std::size_t guard = kDefaultDenseGuard,
                                                double beta_guard = kDefaultBetaGuard) {
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  if (r.empty()) throw UsageError("overlap witness needs a nonempty R");
  OverlapWitness w;
  w.residual = r;
  w.alpha0 = alpha0;
  w.kappa0 = kappa0;
  const double vol = static_cast<double>(g.volume(r));
  if (!(vol > 0.0)) throw UsageError("overlap witness: R has zero volume");
  try {
    UGInstance par = UGInstance::parity(g);
    w.beta_signed = beta_signed_exact(trace_kernel_exact(par, r, guard), beta_guard).value;
  } catch (const GuardError&) {
  }
  for (double L : l_grid) {
    OverlapExact ex(g, L, guard);
    double mass = 0.0;
    for (VertexId s : r)
      if (ex.overlap(s) >= alpha0) mass += static_cast<double>(g.degree(s)) / vol;
    w.rows.push_back({L, mass});
    if (!w.l_star && mass >= kappa0) w.l_star = L;
  }
  return w;
}

}  // namespace tolerant
