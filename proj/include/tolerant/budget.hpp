#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tolerant/errors.hpp"
#include "tolerant/tester.hpp"

namespace tolerant {

struct BudgetPoint {
  std::size_t n = 0;
  std::size_t m = 0;
  double estimation = 0.0;       // queries
  double seed_generation = 0.0;  // queries
};

/// Least-squares slope of log y against log x. Needs two distinct x values.
inline std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw UsageError("loglog_slope: size mismatch");
  std::set<double> distinct(x.begin(), x.end());
  if (distinct.size() < 2) return std::nullopt;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw UsageError("loglog_slope: values must be positive");
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

struct BudgetReport {
  std::vector<BudgetPoint> points;
  std::optional<double> estimation_vs_m;  // reference exponent 1/2
  std::optional<double> seed_vs_n;        // reference exponent 1 at fixed m

  std::string to_csv() const {
    std::ostringstream out;
    out << "n,m,estimation_queries,seed_generation_queries\n";
    for (const auto& p : points) out << p.n << ',' << p.m << ',' << p.estimation << ',' << p.seed_generation << '\n';
    return out.str();
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    auto pts = nlohmann::ordered_json::array();
    for (const auto& p : points)
      pts.push_back({{"n", p.n}, {"m", p.m}, {"estimation", p.estimation}, {"seed_generation", p.seed_generation}});
    j["points"] = pts;
    j["estimation_vs_m"] = estimation_vs_m ? nlohmann::ordered_json(*estimation_vs_m) : nlohmann::ordered_json();
    j["seed_vs_n"] = seed_vs_n ? nlohmann::ordered_json(*seed_vs_n) : nlohmann::ordered_json();
    j["reference"] = {{"estimation_vs_m", 0.5}, {"seed_vs_n", 1.0}};
    return j;
  }
};

/// Fits estimation cost against m over the points that share the most common n, and
/// seed-generation cost against n over the points that share the most common m. A
/// slope is only reported when its axis takes two or more values.
inline BudgetReport query_budget_report(const std::vector<BudgetPoint>& points) {
  BudgetReport rep;
  rep.points = points;
  if (points.empty()) return rep;
  auto fit = [&](bool by_m) -> std::optional<double> {
    std::map<std::size_t, std::size_t> groups;
    for (const auto& p : points) ++groups[by_m ? p.n : p.m];
    std::size_t key = 0, best = 0;
    for (const auto& [k, c] : groups)
      if (c > best) key = k, best = c;
    std::vector<double> x, y;
    for (const auto& p : points) {
      if ((by_m ? p.n : p.m) != key) continue;
      x.push_back(static_cast<double>(by_m ? p.m : p.n));
      y.push_back(by_m ? p.estimation : p.seed_generation);
    }
    return loglog_slope(x, y);
  };
  rep.estimation_vs_m = fit(true);
  rep.seed_vs_n = fit(false);
  return rep;
}

inline BudgetPoint budget_point(std::size_t n, std::size_t m, const TestVerdict& v) {
  return {n, m, static_cast<double>(v.estimation.total()), static_cast<double>(v.seed_generation.total())};
}

}  // namespace tolerant
