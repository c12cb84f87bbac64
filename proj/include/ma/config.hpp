#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ma/errors.hpp"
#include "ma/moving_planes.hpp"
#include "ma/rhs.hpp"
#include "ma/solver.hpp"

namespace ma {

/// Flat key = value configuration with dotted section prefixes. Keys are
/// tracked as they are consumed; anything left over is rejected.
class KeyValueFile {
 public:
  static KeyValueFile parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
  }

  static KeyValueFile parse_text(const std::string& text) {
    KeyValueFile kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      trim(line);
      if (line.empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(lineno) + " lacks '='");
      std::string key = line.substr(0, eq), val = line.substr(eq + 1);
      trim(key);
      trim(val);
      if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + " has empty key");
      for (auto& [k, v] : kv.items_)
        if (k == key) throw ConfigError("duplicate config key: " + key);
      kv.items_.emplace_back(key, val);
    }
    return kv;
  }

  bool has(const std::string& key) const {
    for (auto& [k, v] : items_)
      if (k == key) return true;
    return false;
  }

  std::string get_string(const std::string& key, const std::string& dflt) {
    for (auto& [k, v] : items_)
      if (k == key) {
        consumed_.insert(key);
        return v;
      }
    return dflt;
  }

  double get_double(const std::string& key, double dflt) {
    std::string s = get_string(key, "");
    if (s.empty()) return dflt;
    return to_double(key, s);
  }

  long get_long(const std::string& key, long dflt) {
    std::string s = get_string(key, "");
    if (s.empty()) return dflt;
    try {
      std::size_t pos = 0;
      long v = std::stol(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("key " + key + ": not an integer: " + s);
    }
  }

  bool get_bool(const std::string& key, bool dflt) {
    std::string s = get_string(key, "");
    if (s.empty()) return dflt;
    if (s == "true" || s == "on" || s == "1") return true;
    if (s == "false" || s == "off" || s == "0") return false;
    throw ConfigError("key " + key + ": not a boolean: " + s);
  }

  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& dflt) {
    std::string s = get_string(key, "");
    if (s.empty()) return dflt;
    std::vector<double> out;
    std::istringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      trim(tok);
      if (!tok.empty()) out.push_back(to_double(key, tok));
    }
    if (out.empty()) throw ConfigError("key " + key + ": empty list");
    return out;
  }

  /// Rejects keys that were never consumed.
  void reject_unknown() const {
    for (auto& [k, v] : items_)
      if (!consumed_.count(k)) throw ConfigError("unknown config key: " + k);
  }

 private:
  static void trim(std::string& s) {
    s.erase(0, s.find_first_not_of(" \t\r"));
    s.erase(s.find_last_not_of(" \t\r") + 1);
  }
  static double to_double(const std::string& key, const std::string& s) {
    try {
      std::size_t pos = 0;
      double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("key " + key + ": not a number: " + s);
    }
  }

  std::vector<std::pair<std::string, std::string>> items_;
  std::set<std::string> consumed_;
};

/// One batch experiment: command plus everything the pipelines need.
struct ExperimentConfig {
  std::string command;  // solve | sweep | barrier | check | validate

  std::string domain_name = "disk";
  // custom superellipse parameters (domain = superellipse)
  Point se_center{0.0, 0.0};
  double se_semi_a = 1.0, se_semi_b = 1.0, se_exponent = 2.0, se_skew = 0.0;

  std::string rhs_name = "linear";
  bool rhs_custom = false;
  std::array<double, 5> rhs_alphas{};
  std::string rhs_derivative_mode = "closed";  // closed | fd
  double rhs_fd_step = 1e-6;

  double grid_h = 1.0 / 32;

  std::string boundary = "constant";  // constant | manufactured
  double boundary_value = 1.0;

  std::string case_name = "radial-coupled-linear";  // validate
  std::vector<double> validate_h{1.0 / 32, 1.0 / 64, 1.0 / 128};

  SolveConfig solve;
  SweepConfig sweep;
  bool emit_heatmaps = false;
  std::string load_u, load_v;  // sweep on saved fields instead of solving

  std::vector<double> barrier_m{1.0}, barrier_c0{1.0};
  std::vector<double> barrier_gmax{1.0}, barrier_fmax{1.0};

  int check_n = 100000;
  SampleBox check_box{-2, 2, -2, 2, -2, 2, -2, 2};

  std::string output_dir = "out";
  std::uint64_t seed = 20240810;

  static ExperimentConfig from_file(const std::string& path,
                                    const std::string& command_override = "") {
    KeyValueFile kv = KeyValueFile::parse_file(path);
    return from_kv(kv, command_override);
  }

  static ExperimentConfig from_kv(KeyValueFile& kv, const std::string& command_override) {
    ExperimentConfig c;
    c.command = kv.get_string("command", "");
    if (!command_override.empty()) {
      if (!c.command.empty() && c.command != command_override)
        throw ConfigError("config command '" + c.command +
                          "' conflicts with CLI command '" + command_override + "'");
      c.command = command_override;
    }
    if (c.command.empty()) throw ConfigError("no command given");

    c.domain_name = kv.get_string("domain", c.domain_name);
    c.se_center.x1 = kv.get_double("domain.center_x1", 0.0);
    c.se_center.x2 = kv.get_double("domain.center_x2", 0.0);
    c.se_semi_a = kv.get_double("domain.semi_axis1", 1.0);
    c.se_semi_b = kv.get_double("domain.semi_axis2", 1.0);
    c.se_exponent = kv.get_double("domain.exponent", 2.0);
    c.se_skew = kv.get_double("domain.skew", 0.0);

    c.rhs_name = kv.get_string("rhs", c.rhs_name);
    c.rhs_custom = c.rhs_name == "custom";
    for (int i = 0; i < 5; ++i)
      c.rhs_alphas[i] = kv.get_double("rhs.alpha" + std::to_string(i), 0.0);
    c.rhs_derivative_mode = kv.get_string("rhs.derivative_mode", c.rhs_derivative_mode);
    if (c.rhs_derivative_mode != "closed" && c.rhs_derivative_mode != "fd")
      throw ConfigError("rhs.derivative_mode must be 'closed' or 'fd'");
    c.rhs_fd_step = kv.get_double("rhs.fd_step", c.rhs_fd_step);

    c.grid_h = kv.get_double("grid.h", c.grid_h);
    if (!(c.grid_h > 0.0)) throw ConfigError("grid.h must be positive");

    c.boundary = kv.get_string("boundary", c.boundary);
    if (c.boundary != "constant" && c.boundary != "manufactured")
      throw ConfigError("boundary must be 'constant' or 'manufactured'");
    c.boundary_value = kv.get_double("boundary.value", c.boundary_value);

    c.case_name = kv.get_string("case", c.case_name);
    c.validate_h = kv.get_double_list("validate.h_list", c.validate_h);

    c.solve.newton_tol = kv.get_double("solve.newton_tol", c.solve.newton_tol);
    c.solve.max_iters = static_cast<int>(kv.get_long("solve.max_iters", c.solve.max_iters));
    c.solve.damping_beta = kv.get_double("solve.damping_beta", c.solve.damping_beta);
    c.solve.min_step = kv.get_double("solve.min_step", c.solve.min_step);
    std::string init = kv.get_string("solve.init", "quadratic");
    if (init == "quadratic") c.solve.init = SolveConfig::Init::QUADRATIC;
    else if (init == "poisson") c.solve.init = SolveConfig::Init::POISSON;
    else throw ConfigError("solve.init must be 'quadratic' or 'poisson'");
    c.solve.linear_tol = kv.get_double("solve.linear_tol", c.solve.linear_tol);
    std::string lin = kv.get_string("solve.linear_solver", "bicgstab");
    if (lin == "bicgstab") c.solve.linear_solver = SolveConfig::Linear::BICGSTAB;
    else if (lin == "sparselu") c.solve.linear_solver = SolveConfig::Linear::SPARSELU;
    else throw ConfigError("solve.linear_solver must be 'bicgstab' or 'sparselu'");

    c.sweep.lambda_count = static_cast<int>(kv.get_long("sweep.lambda_count", c.sweep.lambda_count));
    c.sweep.sign_tol = kv.get_double("sweep.sign_tol", c.sweep.sign_tol);
    c.sweep.interior_margin =
        static_cast<int>(kv.get_long("sweep.interior_margin", c.sweep.interior_margin));
    c.emit_heatmaps = kv.get_bool("sweep.emit_heatmaps", c.emit_heatmaps);
    c.load_u = kv.get_string("sweep.load_u", "");
    c.load_v = kv.get_string("sweep.load_v", "");

    c.barrier_m = kv.get_double_list("barrier.m", c.barrier_m);
    c.barrier_c0 = kv.get_double_list("barrier.c0", c.barrier_c0);
    c.barrier_gmax = kv.get_double_list("barrier.gmax", c.barrier_gmax);
    c.barrier_fmax = kv.get_double_list("barrier.fmax", c.barrier_fmax);

    c.check_n = static_cast<int>(kv.get_long("check.n", c.check_n));
    c.check_box.u_min = kv.get_double("check.u_min", c.check_box.u_min);
    c.check_box.u_max = kv.get_double("check.u_max", c.check_box.u_max);
    c.check_box.v_min = kv.get_double("check.v_min", c.check_box.v_min);
    c.check_box.v_max = kv.get_double("check.v_max", c.check_box.v_max);
    c.check_box.p1_min = kv.get_double("check.p1_min", c.check_box.p1_min);
    c.check_box.p1_max = kv.get_double("check.p1_max", c.check_box.p1_max);
    c.check_box.p2_min = kv.get_double("check.p2_min", c.check_box.p2_min);
    c.check_box.p2_max = kv.get_double("check.p2_max", c.check_box.p2_max);

    c.output_dir = kv.get_string("output_dir", c.output_dir);
    c.seed = static_cast<std::uint64_t>(kv.get_long("seed", static_cast<long>(c.seed)));

    kv.reject_unknown();
    return c;
  }

  Domain2D make_config_domain() const {
    if (domain_name == "superellipse")
      return make_superellipse(se_center, se_semi_a, se_semi_b, se_exponent, se_skew);
    return make_domain(domain_name);
  }

  CoupledRHS make_config_rhs() const {
    CoupledRHS r = rhs_custom ? make_coefficient_rhs(rhs_alphas) : make_rhs(rhs_name);
    if (rhs_derivative_mode == "fd") {
      r.g_partials = nullptr;
      r.f_partials = nullptr;
      r.fd_step = rhs_fd_step;
    }
    return r;
  }
};

}  // namespace ma
