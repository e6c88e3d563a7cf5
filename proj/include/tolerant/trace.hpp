#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "tolerant/errors.hpp"
#include "tolerant/lift.hpp"
#include "tolerant/parallel.hpp"
#include "tolerant/ug_instance.hpp"

namespace tolerant {

inline constexpr double kDefaultBetaGuard = 16777216.0;  // (Q+1)^|R| partial labelings

/// Marks every vertex whose connected component meets R.
inline std::vector<bool> components_meeting(const Multigraph& g, const std::vector<bool>& in_r) {
  std::vector<bool> seen(g.vertex_count(), false);
  std::queue<VertexId> todo;
  for (VertexId v = 0; v < g.vertex_count(); ++v)
    if (in_r[v] && !seen[v]) {
      seen[v] = true;
      todo.push(v);
    }
  while (!todo.empty()) {
    VertexId v = todo.front();
    todo.pop();
    for (const auto& c : g.incident(v))
      if (!seen[c.endpoint]) {
        seen[c.endpoint] = true;
        todo.push(c.endpoint);
      }
  }
  return seen;
}

namespace detail {

/// Return kernel on R x [k] of a lifted lazy walk whose labels live in [k]. `step(v, label)`
/// fills (vertex, label, probability) triples for one lazy step from (v, label). Uses
/// K = M_AA + M_AB (I - M_BB)^-1 M_BA over the components that meet R.
template <typename Step>
Eigen::MatrixXd absorbing_trace(const Multigraph& g, const std::vector<VertexId>& r, std::size_t k,
                                std::size_t guard, Step&& step) {
  const std::size_t n = g.vertex_count();
  std::vector<bool> in_r(n, false);
  for (VertexId v : r) in_r[v] = true;
  std::vector<bool> live = components_meeting(g, in_r);
  // Position of each vertex inside block A (R) or block B (live, outside R).
  std::vector<std::ptrdiff_t> pos(n, -1);
  std::size_t nb = 0;
  for (std::size_t i = 0; i < r.size(); ++i) pos[r[i]] = static_cast<std::ptrdiff_t>(i);
  for (VertexId v = 0; v < n; ++v)
    if (live[v] && !in_r[v]) pos[v] = static_cast<std::ptrdiff_t>(nb++);
  const std::size_t sa = r.size() * k, sb = nb * k;
  if (sa + sb > guard)
    throw GuardError("trace kernel: lifted states", static_cast<double>(sa + sb), static_cast<double>(guard));

  Eigen::MatrixXd maa = Eigen::MatrixXd::Zero(sa, sa);
  Eigen::MatrixXd mba = Eigen::MatrixXd::Zero(sb, sa);
  std::vector<Eigen::Triplet<double>> tab, tbb;
  std::vector<std::tuple<VertexId, std::size_t, double>> out;
  for (VertexId v = 0; v < n; ++v) {
    if (!live[v]) continue;
    for (std::size_t b = 0; b < k; ++b) {
      out.clear();
      step(v, b, out);
      const std::size_t row = static_cast<std::size_t>(pos[v]) * k + b;
      for (const auto& [w, c, p] : out) {
        const std::size_t col = static_cast<std::size_t>(pos[w]) * k + c;
        if (in_r[v] && in_r[w]) maa(row, col) += p;
        else if (in_r[v]) tab.emplace_back(row, col, p);
        else if (in_r[w]) mba(row, col) += p;
        else tbb.emplace_back(row, col, -p);
      }
    }
  }
  if (sb == 0) return maa;
  for (std::size_t i = 0; i < sb; ++i) tbb.emplace_back(i, i, 1.0);
  Eigen::SparseMatrix<double> ibb(sb, sb), mab(sa, sb);
  ibb.setFromTriplets(tbb.begin(), tbb.end());
  mab.setFromTriplets(tab.begin(), tab.end());
  ibb.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(ibb);
  if (lu.info() != Eigen::Success) throw std::logic_error("trace kernel: I - M_BB is singular");
  Eigen::MatrixXd x = lu.solve(mba);
  return maa + mab * x;
}

}  // namespace detail

/// Exact trace (return) kernel of the lazy walk on a residual set R.
struct TraceKernel {
  std::vector<VertexId> residual;  // sorted vertex ids of R
  int q = 2;
  Eigen::VectorXd pi_r;     // pi_R in residual order; zero on isolated vertices
  Eigen::MatrixXd lifted;   // K^(u b, v c), index i*Q + b
  Eigen::MatrixXd marginal; // K_R(u, v)
  /// K_R^Pi by permutation rank, from the group lift. Empty when it exceeded the guard.
  std::map<std::size_t, Eigen::MatrixXd> by_permutation;

  std::size_t size() const noexcept { return residual.size(); }
  bool has_permutations() const noexcept { return !by_permutation.empty(); }

  /// K^+ and K^- for Q = 2: the label kept or flipped.
  Eigen::MatrixXd plus() const { return split(0); }
  Eigen::MatrixXd minus() const { return split(1); }
  /// Signed trace operator B_R = K^+ - K^-.
  Eigen::MatrixXd signed_operator() const { return plus() - minus(); }

 private:
  Eigen::MatrixXd split(int flip) const {
    if (q != 2) throw UsageError("signed kernels need Q = 2");
    const auto k = static_cast<Eigen::Index>(size());
    Eigen::MatrixXd out(k, k);
    for (Eigen::Index u = 0; u < k; ++u)
      for (Eigen::Index v = 0; v < k; ++v) out(u, v) = lifted(2 * u, 2 * v + flip);
    return out;
  }
};

/// Computes K^_R on the label lift by absorbing-chain algebra and, when n Q! fits the
/// guard, every K_R^Pi on the group lift V x S_Q (labels are accumulated transports).
inline TraceKernel trace_kernel_exact(const UGInstance& inst, std::vector<VertexId> r,
                                      std::size_t guard = kDefaultDenseGuard) {
  const Multigraph& g = inst.graph();
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  if (r.empty()) throw UsageError("trace kernel needs a nonempty R");
  if (r.back() >= g.vertex_count()) throw UsageError("vertex id out of range");
  const int q = inst.alphabet();
  TraceKernel k;
  k.residual = r;
  k.q = q;

  auto lazy = [&](VertexId v, auto&& emit_move, auto&& emit_hold) {
    std::size_t d = g.degree(v);
    if (d == 0) {
      emit_hold(1.0);
      return;
    }
    emit_hold(0.5);
    for (std::size_t i = 0; i < d; ++i) emit_move(i, 1.0 / (2.0 * static_cast<double>(d)));
  };

  k.lifted = detail::absorbing_trace(g, r, static_cast<std::size_t>(q), guard, [&](VertexId v, std::size_t b, auto& out) {
    lazy(
        v,
        [&](std::size_t i, double p) {
          out.emplace_back(g.incident(v)[i].endpoint, inst.oriented_image(v, i)[b], p);
        },
        [&](double p) { out.emplace_back(v, b, p); });
  });
  const auto rs = static_cast<Eigen::Index>(r.size());
  k.marginal = Eigen::MatrixXd::Zero(rs, rs);
  for (Eigen::Index u = 0; u < rs; ++u)
    for (Eigen::Index v = 0; v < rs; ++v)
      for (int c = 0; c < q; ++c) k.marginal(u, v) += k.lifted(u * q, v * q + c);

  double vol = 0.0;
  for (VertexId v : r) vol += static_cast<double>(g.degree(v));
  k.pi_r = Eigen::VectorXd::Zero(rs);
  if (vol > 0.0)
    for (Eigen::Index i = 0; i < rs; ++i) k.pi_r[i] = static_cast<double>(g.degree(r[i])) / vol;

  const std::size_t fact = factorial(q);
  std::size_t live = 0;
  {
    std::vector<bool> in_r(g.vertex_count(), false);
    for (VertexId v : r) in_r[v] = true;
    auto comp = components_meeting(g, in_r);
    live = static_cast<std::size_t>(std::count(comp.begin(), comp.end(), true));
  }
  if (live * fact <= guard) {
    std::vector<Permutation> elems;
    for (std::size_t i = 0; i < fact; ++i) elems.push_back(Permutation::unrank(q, i));
    Eigen::MatrixXd group = detail::absorbing_trace(g, r, fact, guard, [&](VertexId v, std::size_t h, auto& out) {
      lazy(
          v,
          [&](std::size_t i, double p) {
            out.emplace_back(g.incident(v)[i].endpoint, compose(inst.oriented_constraint(v, i), elems[h]).rank(), p);
          },
          [&](double p) { out.emplace_back(v, h, p); });
    });
    const std::size_t id = Permutation::identity(q).rank();
    for (std::size_t h = 0; h < fact; ++h) {
      Eigen::MatrixXd kp(rs, rs);
      for (Eigen::Index u = 0; u < rs; ++u)
        for (Eigen::Index v = 0; v < rs; ++v)
          kp(u, v) = group(u * static_cast<Eigen::Index>(fact) + static_cast<Eigen::Index>(id),
                           v * static_cast<Eigen::Index>(fact) + static_cast<Eigen::Index>(h));
      if (kp.cwiseAbs().maxCoeff() > 0.0) k.by_permutation.emplace(h, std::move(kp));
    }
  }
  return k;
}

struct BetaResult {
  double value = std::numeric_limits<double>::infinity();
  std::vector<VertexId> set;   // argmin S
  std::vector<Label> labels;   // argmin labeling, parallel to `set`
};

namespace detail {

inline std::size_t checked_power(std::size_t base, std::size_t exp, double guard, const char* what) {
  double total = std::pow(static_cast<double>(base), static_cast<double>(exp));
  if (total > guard) throw GuardError(what, total, guard);
  return static_cast<std::size_t>(total);
}

/// Min-reduce of eval(code) over codes [1, total) split across workers; ties go to the
/// smallest code, so the winner does not depend on the worker count.
template <typename Eval>
std::pair<double, std::size_t> min_over_codes(std::size_t total, unsigned workers, Eval&& eval) {
  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(total, 64));
  std::vector<std::pair<double, std::size_t>> best(chunks, {std::numeric_limits<double>::infinity(), total});
  parallel_for(chunks, workers, [&](std::size_t c) {
    std::size_t lo = std::max<std::size_t>(1, total * c / chunks), hi = total * (c + 1) / chunks;
    for (std::size_t code = lo; code < hi; ++code) {
      double v = eval(code);
      if (v < best[c].first) best[c] = {v, code};
    }
  });
  auto out = best[0];
  for (const auto& b : best)
    if (b.first < out.first || (b.first == out.first && b.second < out.second)) out = b;
  return out;
}

}  // namespace detail

/// beta_UG(K_R) = min over nonempty S and l: S -> [Q] of the one-step failure probability
/// beta_R(S, l), enumerated as (Q+1)-ary codes (digit 0: outside S). Uses
/// beta = 1 - sum_{u,v in S} pi_R(u) K^(u l(u), v l(v)) / pi_R(S).
inline BetaResult beta_ug_exact(const TraceKernel& k, double guard = kDefaultBetaGuard, unsigned workers = 1) {
  const std::size_t r = k.size();
  const std::size_t radix = static_cast<std::size_t>(k.q) + 1;
  const std::size_t total = detail::checked_power(radix, r, guard, "beta_ug_exact: (Q+1)^|R|");
  const int q = k.q;
  auto decode = [&](std::size_t code, std::vector<int>& digit) {
    for (std::size_t i = 0; i < r; ++i) {
      digit[i] = static_cast<int>(code % radix);
      code /= radix;
    }
  };
  auto eval = [&](std::size_t code) {
    thread_local std::vector<int> digit;
    digit.assign(r, 0);
    decode(code, digit);
    double mass = 0.0, stay = 0.0;
    for (std::size_t u = 0; u < r; ++u) {
      if (!digit[u]) continue;
      mass += k.pi_r[static_cast<Eigen::Index>(u)];
      for (std::size_t v = 0; v < r; ++v)
        if (digit[v])
          stay += k.pi_r[static_cast<Eigen::Index>(u)] *
                  k.lifted(static_cast<Eigen::Index>(u * q + digit[u] - 1), static_cast<Eigen::Index>(v * q + digit[v] - 1));
    }
    if (!(mass > 0.0)) return std::numeric_limits<double>::infinity();
    return std::max(0.0, 1.0 - stay / mass);
  };
  auto [value, code] = detail::min_over_codes(total, workers, eval);
  BetaResult res;
  if (code >= total) throw UsageError("beta_ug_exact: R has zero volume");
  res.value = value;
  std::vector<int> digit(r);
  decode(code, digit);
  for (std::size_t i = 0; i < r; ++i)
    if (digit[i]) {
      res.set.push_back(k.residual[i]);
      res.labels.push_back(static_cast<Label>(digit[i] - 1));
    }
  return res;
}

/// Second implementation of beta_UG: S by bitmask, l by mixed radix over S, and the
/// defining sum over exits and transport-inconsistent returns using every K_R^Pi.
inline double beta_ug_direct(const TraceKernel& k, double guard = kDefaultBetaGuard) {
  if (!k.has_permutations()) throw UsageError("beta_ug_direct needs per-permutation kernels");
  const std::size_t r = k.size();
  detail::checked_power(static_cast<std::size_t>(k.q) + 1, r, guard, "beta_ug_direct: (Q+1)^|R|");
  std::vector<std::pair<Permutation, const Eigen::MatrixXd*>> perms;
  for (const auto& [rank, mat] : k.by_permutation) perms.emplace_back(Permutation::unrank(k.q, rank), &mat);
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> members;
  std::vector<int> label(r, -1);
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << r); ++mask) {
    members.clear();
    for (std::size_t i = 0; i < r; ++i)
      if (mask >> i & 1) members.push_back(i);
    double mass = 0.0;
    for (std::size_t u : members) mass += k.pi_r[static_cast<Eigen::Index>(u)];
    if (!(mass > 0.0)) continue;
    std::size_t combos = 1;
    for (std::size_t j = 0; j < members.size(); ++j) combos *= static_cast<std::size_t>(k.q);
    for (std::size_t code = 0; code < combos; ++code) {
      std::fill(label.begin(), label.end(), -1);
      std::size_t c = code;
      for (std::size_t u : members) {
        label[u] = static_cast<int>(c % static_cast<std::size_t>(k.q));
        c /= static_cast<std::size_t>(k.q);
      }
      double fail = 0.0;
      for (std::size_t u : members) {
        double row = 0.0;
        for (const auto& [pi, mat] : perms)
          for (std::size_t v = 0; v < r; ++v) {
            double p = (*mat)(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v));
            if (p == 0.0) continue;
            if (label[v] < 0 || label[v] != pi(static_cast<Label>(label[u]))) row += p;
          }
        fail += k.pi_r[static_cast<Eigen::Index>(u)] * row;
      }
      best = std::min(best, fail / mass);
    }
  }
  return best;
}

/// beta(K) of a signed kernel: S by bitmask, signing x in {+1,-1}^S by a second bitmask.
inline BetaResult beta_signed(const Eigen::MatrixXd& kp, const Eigen::MatrixXd& km, const Eigen::VectorXd& nu,
                              double guard = kDefaultBetaGuard, unsigned workers = 1) {
  const auto r = static_cast<std::size_t>(nu.size());
  const std::size_t total = detail::checked_power(3, r, guard, "beta_signed: 3^|R|");
  (void)total;
  if (r >= 32) throw GuardError("beta_signed: |R|", static_cast<double>(r), 31.0);
  // Code = mask for S in the low r bits, signing of S members in the next r bits.
  const std::uint64_t masks = std::uint64_t{1} << r;
  std::vector<std::pair<double, std::uint64_t>> best(masks, {std::numeric_limits<double>::infinity(), 0});
  parallel_for(static_cast<std::size_t>(masks - 1), workers, [&](std::size_t idx) {
    const std::uint64_t mask = idx + 1;
    double mass = 0.0;
    for (std::size_t i = 0; i < r; ++i)
      if (mask >> i & 1) mass += nu[static_cast<Eigen::Index>(i)];
    if (!(mass > 0.0)) return;
    // Enumerate signings as subsets of `mask` (negative members).
    std::uint64_t sub = 0;
    for (;;) {
      double fail = 0.0;
      for (std::size_t u = 0; u < r; ++u) {
        if (!(mask >> u & 1)) continue;
        int xu = (sub >> u & 1) ? -1 : 1;
        double row = 0.0;
        for (std::size_t v = 0; v < r; ++v) {
          double pp = kp(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v));
          double pm = km(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v));
          if (!(mask >> v & 1)) {
            row += pp + pm;
            continue;
          }
          int xv = (sub >> v & 1) ? -1 : 1;
          if (xv != xu) row += pp;
          if (xv != -xu) row += pm;
        }
        fail += nu[static_cast<Eigen::Index>(u)] * row;
      }
      double val = fail / mass;
      if (val < best[idx].first) best[idx] = {val, sub};
      if (sub == mask) break;
      sub = (sub - mask) & mask;
    }
  });
  std::size_t arg = masks;
  for (std::size_t i = 0; i + 1 < masks; ++i)
    if (arg == masks || best[i].first < best[arg].first) arg = i;
  BetaResult res;
  if (arg == masks || !std::isfinite(best[arg].first)) throw UsageError("beta_signed: zero total mass");
  res.value = best[arg].first;
  const std::uint64_t mask = arg + 1;
  for (std::size_t i = 0; i < r; ++i)
    if (mask >> i & 1) {
      res.set.push_back(static_cast<VertexId>(i));
      res.labels.push_back(static_cast<Label>(best[arg].second >> i & 1));
    }
  return res;
}

/// Signed ratio of the Q = 2 trace kernel; the witness set holds vertex ids and the
/// labels are 0 for +1 and 1 for -1.
inline BetaResult beta_signed_exact(const TraceKernel& k, double guard = kDefaultBetaGuard, unsigned workers = 1) {
  BetaResult res = beta_signed(k.plus(), k.minus(), k.pi_r, guard, workers);
  for (auto& v : res.set) v = k.residual[v];
  return res;
}

namespace detail {

inline std::vector<double> positive_mass_spectrum(const TraceKernel& k, const Eigen::MatrixXd& b) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < k.pi_r.size(); ++i)
    if (k.pi_r[i] > 0.0) keep.push_back(i);
  const auto s = static_cast<Eigen::Index>(keep.size());
  std::vector<double> out;
  if (s == 0) return out;
  Eigen::MatrixXd sym(s, s);
  for (Eigen::Index i = 0; i < s; ++i)
    for (Eigen::Index j = 0; j < s; ++j)
      sym(i, j) = std::sqrt(k.pi_r[keep[i]]) * b(keep[i], keep[j]) / std::sqrt(k.pi_r[keep[j]]);
  sym = 0.5 * (sym + sym.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  for (Eigen::Index i = 0; i < s; ++i) out.push_back(es.eigenvalues()[i]);
  return out;
}

}  // namespace detail

/// Eigenvalues (ascending) of B_R, self-adjoint on L^2(pi_R), via D^1/2 B D^-1/2. States
/// with pi_R = 0 are isolated vertices; each contributes the eigenvalue B(u, u) = 1.
inline std::vector<double> spectrum_B(const TraceKernel& k) {
  Eigen::MatrixXd b = k.signed_operator();
  std::vector<double> out = detail::positive_mass_spectrum(k, b);
  for (Eigen::Index i = 0; i < k.pi_r.size(); ++i)
    if (!(k.pi_r[i] > 0.0)) out.push_back(b(i, i));
  std::sort(out.begin(), out.end());
  return out;
}

/// ||B^j f||_{2, pi_R} for j = 0..steps.
inline std::vector<double> signed_decay(const TraceKernel& k, const Eigen::VectorXd& f, std::size_t steps) {
  if (f.size() != k.pi_r.size()) throw UsageError("signed_decay: f has the wrong size");
  Eigen::MatrixXd b = k.signed_operator();
  std::vector<double> out;
  Eigen::VectorXd x = f;
  for (std::size_t j = 0; j <= steps; ++j) {
    out.push_back(std::sqrt((x.array().square() * k.pi_r.array()).sum()));
    x = b * x;
  }
  return out;
}

/// Empirical dual-Cheeger ratio lambda_min(I - B) / beta(K)^2 on the positive-mass part.
inline std::optional<double> dual_cheeger_ratio(const TraceKernel& k, double beta) {
  if (!(beta > 0.0)) return std::nullopt;
  auto spec = detail::positive_mass_spectrum(k, k.signed_operator());
  if (spec.empty()) return std::nullopt;
  return (1.0 - spec.back()) / (beta * beta);
}

}  // namespace tolerant
