#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tolerant/errors.hpp"

namespace tolerant {

/// One documented configuration key with its default value.
struct ConfigKey {
  const char* name;
  const char* value;
  const char* doc;
};

// Every calibration constant and guard of every module. The tester and subroutine
// constants were fixed by a calibration run on the acceptance families.
inline const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> keys = {
      {"edge.xi", "0.05", "seed sampler accuracy xi"},
      {"push.bernstein_c", "8", "reverse-walk count constant c in w = c D r_max/(eta^2 tau) log(1/delta)"},
      {"push.depth", "32768", "r_max = eta sqrt(tau/D) / depth in the per-seed subroutines"},
      {"amb.c_eta", "2", "eta = c_eta beta"},
      {"amb.eta_cap", "0.2", "upper clamp on eta (must stay below 1/4)"},
      {"amb.c_tau", "0.05", "tau_v = c_tau beta deg(v) / (2 Q m)"},
      {"amb.trial_constant", "2", "M = ceil(C beta^-2 log(4Q/delta))"},
      {"ug.C", "0.0012", "L_r = C rho^-3 r^(1/2) log n"},
      {"ug.c_alpha", "2", "alpha_r = c rho r^(-1/2)"},
      {"ug.C_N", "1", "N_r = ceil(C_N r^-1 log(10 |scales|))"},
      {"ug.c_delta", "0.05", "delta_r = c_delta r"},
      {"ug.c_reject", "0.25", "reject if some scale has >= c_reject r N_r active seeds"},
      {"ug.rho0", "0.1", "rho >= rho0 is run at rho0"},
      {"ug.gap_c", "1", "warn unless eps log n <= gap_c rho^4"},
      {"bip.c_lambda", "0.2", "lambda = c_lambda rho / (1 + log(1/rho))"},
      {"bip.C", "0.00004", "L_q = C q lambda^-2 log n"},
      {"bip.alpha", "0.2", "constant overlap threshold alpha"},
      {"bip.c_theta", "0.25", "reject if >= c_theta q N_q active seeds"},
      {"bip.C_N", "1", "N_q = ceil(C_N q^-1 log(10 |scales|))"},
      {"bip.c_delta", "0.05", "delta_q = c_delta q"},
      {"bip.rho0", "0.1", "rho >= rho0 is run at rho0"},
      {"bip.gap_c", "1", "warn unless eps log n <= gap_c rho^2"},
      {"guard.labelings", "16777216", "max Q^n for exhaustive labeling search"},
      {"guard.dense", "4000", "max lifted states for dense/sparse exact solves"},
      {"guard.beta", "16777216", "max (Q+1)^|R| partial labelings for beta exhaustion"},
      {"trace.step_cap", "10000000", "hard step cap for trace runs"},
  };
  return keys;
}

/// Flat key = value configuration. '#' starts a comment. Unknown keys are rejected.
class Config {
 public:
  Config() {
    for (const auto& k : config_schema()) values_[k.name] = k.value;
  }

  static Config from_stream(std::istream& in) {
    Config c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      auto eq = line.find('=');
      if (eq == std::string::npos) throw InputError("config line " + std::to_string(lineno) + ": expected key = value");
      c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return c;
  }

  static Config from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config " + path);
    return from_stream(in);
  }

  /// Applies "key=value".
  void apply(const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos) throw UsageError("expected key=value, got '" + assignment + "'");
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
  }

  void set(const std::string& key, const std::string& value) {
    if (!values_.count(key)) throw UsageError("unknown config key '" + key + "'");
    std::istringstream probe(value);
    double x = 0.0;
    if (!(probe >> x) || !(probe >> std::ws).eof()) throw UsageError("config key '" + key + "' needs a number");
    values_[key] = value;
  }

  double get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw UsageError("unknown config key '" + key + "'");
    return std::stod(it->second);
  }

  std::string dump() const {
    std::ostringstream out;
    for (const auto& [k, v] : values_) out << k << " = " << v << '\n';
    return out.str();
  }

  /// FNV-1a over the normalized dump.
  std::string fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump()) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
  }

  const std::map<std::string, std::string>& values() const noexcept { return values_; }

 private:
  static std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  }

  std::map<std::string, std::string> values_;
};

}  // namespace tolerant
