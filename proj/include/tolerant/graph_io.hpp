#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "tolerant/errors.hpp"
#include "tolerant/ug_instance.hpp"

namespace tolerant {

// Text format, 1-based vertex ids and labels:
//   n m Q                      then m lines  u v p_1 ... p_Q   (pi_uv(j) = p_j)
//   n m PARITY                 then m lines  u v               (every edge = transposition)

inline UGInstance read_instance(std::istream& in) {
  std::size_t n = 0, m = 0;
  std::string third;
  if (!(in >> n >> m >> third)) throw InputError("missing header 'n m Q' or 'n m PARITY'");
  bool parity = third == "PARITY";
  int q = 2;
  if (!parity) {
    try {
      std::size_t used = 0;
      q = std::stoi(third, &used);
      if (used != third.size()) throw InputError("bad alphabet size '" + third + "'");
    } catch (const std::logic_error&) {
      throw InputError("bad alphabet size '" + third + "'");
    }
    if (q < 2 || q > kMaxAlphabet) throw InputError("alphabet size must be in [2, 16]");
  }
  std::vector<EdgeCopy> edges;
  std::vector<Permutation> perms;
  edges.reserve(m);
  perms.reserve(m);
  std::vector<Label> image(static_cast<std::size_t>(q));
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t u = 0, v = 0;
    if (!(in >> u >> v)) throw InputError("edge line " + std::to_string(k + 1) + " is truncated");
    if (u < 1 || v < 1 || u > n || v > n)
      throw InputError("edge line " + std::to_string(k + 1) + ": vertex id out of range");
    edges.push_back({static_cast<VertexId>(u - 1), static_cast<VertexId>(v - 1)});
    if (parity) {
      perms.push_back(Permutation::transposition());
      continue;
    }
    for (int j = 0; j < q; ++j) {
      int p = 0;
      if (!(in >> p)) throw InputError("edge line " + std::to_string(k + 1) + ": short permutation");
      if (p < 1 || p > q) throw InputError("edge line " + std::to_string(k + 1) + ": label out of range");
      image[j] = static_cast<Label>(p - 1);
    }
    try {
      perms.push_back(Permutation::from_image(image));
    } catch (const UsageError&) {
      throw InputError("edge line " + std::to_string(k + 1) + ": not a permutation");
    }
  }
  return UGInstance(Multigraph(n, std::move(edges)), q, perms);
}

inline UGInstance read_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read_instance(in);
}

inline UGInstance parse_instance(const std::string& text) {
  std::istringstream in(text);
  return read_instance(in);
}

/// Parity instances are written with the PARITY shorthand.
inline void write_instance(std::ostream& out, const UGInstance& inst) {
  const Multigraph& g = inst.graph();
  bool parity = inst.is_parity();
  out << g.vertex_count() << ' ' << g.edge_count() << ' ';
  if (parity)
    out << "PARITY\n";
  else
    out << inst.alphabet() << '\n';
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    const auto& ec = g.edge(e);
    out << ec.u + 1 << ' ' << ec.v + 1;
    if (!parity) {
      Permutation p = inst.constraint(e, true);
      for (int j = 0; j < inst.alphabet(); ++j) out << ' ' << static_cast<int>(p(static_cast<Label>(j))) + 1;
    }
    out << '\n';
  }
}

inline std::string format_instance(const UGInstance& inst) {
  std::ostringstream out;
  write_instance(out, inst);
  return out.str();
}

inline void write_instance_file(const std::string& path, const UGInstance& inst) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  write_instance(out, inst);
  if (!out) throw InputError("write failed for " + path);
}

}  // namespace tolerant
