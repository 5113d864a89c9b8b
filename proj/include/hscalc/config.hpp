#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hscalc/function_ops.hpp"
#include "hscalc/functions.hpp"
#include "hscalc/hs_calculus.hpp"
#include "hscalc/matrix_io.hpp"
#include "hscalc/operators.hpp"

namespace hscalc {

/// One [section] of key = value lines. Lists are whitespace-separated,
/// complex values are "re,im".
class ConfigBlock {
 public:
  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  std::string get(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) fail(errc::bad_config, "missing config key '" + key + "'");
    return it->second;
  }
  std::string get_or(const std::string& key, const std::string& dflt) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? dflt : it->second;
  }

  double get_real(const std::string& key) const { return parse_real(get(key), key); }
  double get_real_or(const std::string& key, double dflt) const {
    return has(key) ? get_real(key) : dflt;
  }
  int get_int(const std::string& key) const { return static_cast<int>(get_real(key)); }
  int get_int_or(const std::string& key, int dflt) const {
    return has(key) ? get_int(key) : dflt;
  }

  cplx get_complex(const std::string& key) const { return parse_complex(get(key), key); }

  std::vector<double> get_reals(const std::string& key) const {
    std::istringstream is(get(key));
    std::vector<double> out;
    std::string tok;
    while (is >> tok) out.push_back(parse_real(tok, key));
    if (out.empty()) fail(errc::bad_config, "empty list for key '" + key + "'");
    return out;
  }

  std::vector<cplx> get_complexes(const std::string& key) const {
    std::istringstream is(get(key));
    std::vector<cplx> out;
    std::string tok;
    while (is >> tok) out.push_back(parse_complex(tok, key));
    if (out.empty()) fail(errc::bad_config, "empty list for key '" + key + "'");
    return out;
  }

 private:
  static double parse_real(const std::string& s, const std::string& key) {
    try {
      std::size_t pos = 0;
      double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      fail(errc::bad_config, "key '" + key + "': cannot parse number '" + s + "'");
    }
  }
  static cplx parse_complex(const std::string& s, const std::string& key) {
    auto comma = s.find(',');
    if (comma == std::string::npos) return cplx(parse_real(s, key), 0.0);
    return cplx(parse_real(s.substr(0, comma), key), parse_real(s.substr(comma + 1), key));
  }

  std::map<std::string, std::string> kv_;
};

struct Config {
  std::map<std::string, ConfigBlock> sections;

  const ConfigBlock& section(const std::string& name) const {
    auto it = sections.find(name);
    if (it == sections.end()) fail(errc::bad_config, "missing config section [" + name + "]");
    return it->second;
  }
  bool has_section(const std::string& name) const { return sections.count(name) != 0; }
};

inline Config parse_config(std::istream& is) {
  Config cfg;
  std::string line, current;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    if (line.front() == '[') {
      if (line.back() != ']')
        fail(errc::bad_config, "line " + std::to_string(lineno) + ": unterminated section");
      current = line.substr(1, line.size() - 2);
      cfg.sections[current];
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(errc::bad_config, "line " + std::to_string(lineno) + ": expected key = value");
    auto trim = [](std::string s) {
      auto a = s.find_first_not_of(" \t");
      auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty() || current.empty())
      fail(errc::bad_config, "line " + std::to_string(lineno) + ": key outside a section");
    cfg.sections[current].set(key, value);
  }
  return cfg;
}

inline Config parse_config_string(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

inline Config load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(errc::io_failure, "cannot open config file: " + path);
  return parse_config(is);
}

inline GlueKind glue_from_string(const std::string& s) {
  if (s == "exponential" || s == "exp") return GlueKind::exponential;
  if (s == "tanh" || s == "tanh_rational") return GlueKind::tanh_rational;
  fail(errc::bad_config, "unknown glue kernel '" + s + "'");
}

/// kind in {rational, bump, char, bracket_power, custom-table} plus step.
inline CkFunction function_from_config(const ConfigBlock& blk) {
  const std::string kind = blk.get("kind");
  if (kind == "rational") {
    // scale * prod_k (z_k - x)^{-1}; poles must be off the real axis
    std::vector<cplx> poles = blk.get_complexes("poles");
    cplx scale = blk.has("scale") ? blk.get_complex("scale") : cplx(1.0);
    CkFunction f = constant_function(scale);
    for (cplx z : poles) {
      if (z.imag() == 0.0) fail(errc::bad_config, "rational pole must be off the real axis");
      f = f * inverse_linear(z);
    }
    return f;
  }
  if (kind == "bump") return bump(blk.get_real("a"), blk.get_real("b"));
  if (kind == "char")
    return approx_char(blk.get_real("a"), blk.get_real("b"), blk.get_real("eps"),
                       glue_from_string(blk.get_or("glue", "exponential")));
  if (kind == "bracket_power") return bracket_power(blk.get_real("beta"));
  if (kind == "step")
    return smooth_step(blk.get_real("a"), blk.get_real("eps"),
                       glue_from_string(blk.get_or("glue", "exponential")));
  if (kind == "custom-table") {
    std::vector<double> xs = blk.get_reals("xs");
    std::vector<cplx> ys = blk.get_complexes("vals");
    return custom_table(std::move(xs), std::move(ys));
  }
  fail(errc::bad_config, "unknown function kind '" + kind + "'");
}

inline HalfLineFunction half_line_from_config(const ConfigBlock& blk) {
  const std::string kind = blk.get("kind");
  if (kind == "exp_decay") return exp_decay_half_line(blk.get_real_or("rate", 1.0));
  if (kind == "exp_power")
    return exp_power_half_line(blk.get_int_or("power", 1), blk.get_real_or("t", 1.0));
  if (kind == "inverse_shift") return inverse_shift_half_line(blk.get_real_or("shift", 1.0));
  return restrict_to_half_line(function_from_config(blk));
}

/// An operator plus everything the calculus wants to know about it. The
/// factory route keeps the exact oracle; the inline route carries a declared
/// or fitted envelope instead.
struct OperatorSetup {
  ComplexMatrix h;
  std::optional<TestOperator> factory;
  Interval enclosure{0.0, 0.0};
  ResolventBound bound;
  std::string id = "operator";
};

inline OperatorSetup operator_from_config(const ConfigBlock& blk) {
  OperatorSetup setup;
  const std::string kind = blk.get_or("kind", "factory");
  if (kind == "factory") {
    std::vector<double> eigs = blk.get_reals("eigs");
    const std::string cond = blk.get_or("conditioner", "unitary");
    ConditionerSpec spec = UnitaryConditioner{static_cast<unsigned long>(blk.get_int_or("seed", 1))};
    if (cond == "jordan_like")
      spec = JordanLikeConditioner{blk.get_real_or("delta", 0.1),
                                   static_cast<unsigned long>(blk.get_int_or("seed", 1))};
    else if (cond == "given")
      spec = GivenConditioner{read_matrix_file(blk.get("file"))};
    else if (cond != "unitary")
      fail(errc::bad_config, "unknown conditioner '" + cond + "'");
    setup.factory = make_test_operator(std::move(eigs), spec);
    setup.h = setup.factory->h();
    setup.enclosure = setup.factory->enclosure();
    setup.bound = setup.factory->bound();
    setup.id = cond;
  } else if (kind == "inline") {
    if (blk.has("file")) {
      setup.h = read_matrix_file(blk.get("file"));
    } else {
      std::istringstream is(blk.get("rows"));
      setup.h = read_matrix(is);
    }
    if (blk.has("enclosure")) {
      auto e = blk.get_reals("enclosure");
      if (e.size() != 2) fail(errc::bad_config, "enclosure needs two numbers");
      setup.enclosure = {e[0], e[1]};
    } else {
      setup.enclosure = detail::gershgorin_enclosure(setup.h);
    }
    if (blk.has("bound_c") || blk.has("bound_alpha")) {
      setup.bound = {blk.get_real_or("bound_c", 1.0), blk.get_real_or("bound_alpha", 0.0)};
    } else {
      auto fit = fit_resolvent_bound(setup.h);
      setup.bound = fit.bound();
    }
    setup.id = "inline";
  } else {
    fail(errc::bad_config, "unknown operator kind '" + kind + "'");
  }
  return setup;
}

inline QuadratureSpec quadrature_from_config(const ConfigBlock& blk) {
  QuadratureSpec q;
  q.nx = blk.get_int_or("nx", q.nx);
  q.ny = blk.get_int_or("ny", q.ny);
  q.refinement_levels = blk.get_int_or("levels", q.refinement_levels);
  q.target_tol = blk.get_real_or("tol", q.target_tol);
  if (blk.has("x_window")) {
    auto w = blk.get_reals("x_window");
    if (w.size() != 2) fail(errc::bad_config, "x_window needs two numbers");
    q.x_window = Interval{w[0], w[1]};
  }
  q.validate();
  return q;
}

/// "auto" defers to ceil(alpha)+2 once the operator bound is known.
inline int taylor_order_from_config(const ConfigBlock& blk, const ResolventBound& bound) {
  const std::string n = blk.get_or("n", "auto");
  if (n == "auto") return default_taylor_order(bound.alpha);
  try {
    return std::stoi(n);
  } catch (const std::exception&) {
    fail(errc::bad_config, "n must be 'auto' or an integer");
  }
}

}  // namespace hscalc
