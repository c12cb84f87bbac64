#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "ma/config.hpp"
#include "ma/moving_planes.hpp"
#include "ma/solver.hpp"
#include "ma/svg.hpp"

namespace ma {

namespace detail {

struct VerdictSet {
  std::vector<std::pair<std::string, bool>> items;
  void add(const std::string& name, bool ok) {
    items.emplace_back(name, ok);
    std::printf("verdict %s = %s\n", name.c_str(), ok ? "pass" : "fail");
  }
  int exit_code() const {
    for (auto& [n, ok] : items)
      if (!ok) return 1;
    return 0;
  }
};

inline void write_manifest(const std::string& path,
                           const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot open for writing: " + path);
  for (auto& [k, v] : kv) out << k << " = " << v << "\n";
}

inline std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::function<double(Point)> boundary_trace_of(const ExperimentConfig& cfg) {
  if (cfg.boundary == "manufactured")
    return [](Point p) { return std::exp(0.5 * (p.x1 * p.x1 + p.x2 * p.x2)); };
  double c = cfg.boundary_value;
  return [c](Point) { return c; };
}

inline SolveResult solve_from_config(const ExperimentConfig& cfg, const Domain2D& dom,
                                     const UniformGrid& grid) {
  CoupledRHS rhs = cfg.make_config_rhs();
  auto trace = boundary_trace_of(cfg);
  return newton_solve(dom, grid, rhs, trace, trace, cfg.solve);
}

/// A-posteriori hypothesis report over the attained solution range; the
/// partial maxima are the coupling bounds a barrier run takes as G_max, F_max.
inline std::vector<std::pair<std::string, std::string>> hypothesis_manifest(
    const ExperimentConfig& cfg, const SolveResult& res) {
  CoupledRHS rhs = cfg.make_config_rhs();
  SampleBox box = attained_box(res.u, res.v);
  auto p1 = check_p1_symmetry(rhs, box, 10000, cfg.seed);
  auto cm = check_cross_monotonicity(rhs, box, 10000, cfg.seed);
  return {{"hypothesis_p1", p1.pass ? (p1.equality ? "equality" : "pass") : "fail"},
          {"hypothesis_cross", cm.pass ? "pass" : "fail"},
          {"g_dv_max", fmt_g(cm.g_dv_max)},
          {"f_du_max", fmt_g(cm.f_du_max)}};
}

inline void write_solve_outputs(const ExperimentConfig& cfg, const SolveResult& res,
                                const std::string& instance) {
  namespace fs = std::filesystem;
  fs::path out(cfg.output_dir);
  write_field_csv(res.u, (out / "u.csv").string());
  write_field_csv(res.v, (out / "v.csv").string());
  const UniformGrid& g = *res.u.grid;
  int viol = std::max(res.convexity.violations_u, res.convexity.violations_v);
  std::vector<std::pair<std::string, std::string>> kv = {
      {"case", instance},
      {"domain", g.domain().name},
      {"h", fmt_g(g.h())},
      {"iterations", std::to_string(res.iterations)},
      {"final_residual", fmt_g(res.final_residual)},
      {"converged", res.converged ? "true" : "false"},
      {"convexity_violations", std::to_string(viol)},
      {"seed", std::to_string(cfg.seed)}};
  for (auto& item : hypothesis_manifest(cfg, res)) kv.push_back(item);
  write_manifest((out / "manifest.txt").string(), kv);
}

// ---------------------------------------------------------------------------

inline int run_solve(const ExperimentConfig& cfg) {
  Domain2D dom = cfg.make_config_domain();
  UniformGrid grid(dom, cfg.grid_h);
  SolveResult res = solve_from_config(cfg, dom, grid);
  write_solve_outputs(cfg, res, cfg.rhs_name);
  VerdictSet verdicts;
  verdicts.add("converged", res.converged);
  int viol = std::max(res.convexity.violations_u, res.convexity.violations_v);
  verdicts.add("convexity", res.convexity.audited == 0 ||
                                viol <= 0.01 * res.convexity.audited);
  verdicts.add("boundary_monotonicity",
               res.boundary_monotonicity.pass_u && res.boundary_monotonicity.pass_v);
  return verdicts.exit_code();
}

inline int run_sweep(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  fs::path out(cfg.output_dir);

  std::unique_ptr<UniformGrid> loaded_grid;
  ScalarField u, v;
  std::string instance;
  int iterations = 0;
  double final_residual = 0.0;
  std::vector<std::pair<std::string, std::string>> hyp;

  if (!cfg.load_u.empty()) {
    LoadedField lu = load_field_csv(cfg.load_u);
    loaded_grid = std::move(lu.grid);
    u = std::move(lu.field);
    if (!cfg.load_v.empty()) {
      LoadedField lv = load_field_csv(cfg.load_v);
      if (lv.grid->n1() != loaded_grid->n1() || lv.grid->n2() != loaded_grid->n2() ||
          lv.grid->domain().name != loaded_grid->domain().name)
        throw ConfigError("loaded u and v fields disagree on grid or domain");
      v = ScalarField(*loaded_grid, lv.field.boundary_trace);
      v.values = lv.field.values;
    } else {
      v = u;
    }
    instance = "loaded:" + cfg.load_u;
  } else {
    Domain2D dom = cfg.make_config_domain();
    loaded_grid = std::make_unique<UniformGrid>(dom, cfg.grid_h);
    SolveResult res = solve_from_config(cfg, dom, *loaded_grid);
    hyp = hypothesis_manifest(cfg, res);
    u = std::move(res.u);
    v = std::move(res.v);
    iterations = res.iterations;
    final_residual = res.final_residual;
    instance = cfg.rhs_name;
    write_field_csv(u, (out / "u.csv").string());
    write_field_csv(v, (out / "v.csv").string());
  }

  const UniformGrid& grid = *loaded_grid;
  SweepReport rep = sweep(u, v, grid.domain(), cfg.sweep);
  write_sweep_csv(rep, (out / "sweep.csv").string());
  write_sweep_summary(rep, (out / "summary.txt").string());

  if (cfg.emit_heatmaps && rep.records.size() >= 4) {
    for (int q = 1; q <= 3; ++q) {
      std::size_t idx = q * rep.records.size() / 4;
      double lambda = rep.records[idx].lambda;
      ScalarField diff = reflect_difference(u, lambda);
      emit_heatmap(diff, (out / ("U_q" + std::to_string(q) + ".svg")).string());
    }
  }

  std::vector<std::pair<std::string, std::string>> kv = {
      {"case", instance},
      {"domain", grid.domain().name},
      {"h", fmt_g(grid.h())},
      {"iterations", std::to_string(iterations)},
      {"final_residual", fmt_g(final_residual)},
      {"converged", "true"},
      {"convexity_violations", "0"},
      {"seed", std::to_string(cfg.seed)},
      {"lambda_bar", fmt_g(rep.lambda_bar)}};
  for (auto& item : hyp) kv.push_back(item);
  write_manifest((out / "manifest.txt").string(), kv);

  VerdictSet verdicts;
  verdicts.add("sweep_nonpositive", rep.nonpositive_everywhere());
  verdicts.add("monotonicity_u", rep.monotonicity_u.pass);
  verdicts.add("monotonicity_v", rep.monotonicity_v.pass);
  return verdicts.exit_code();
}

inline int run_barrier(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  std::ofstream csv(fs::path(cfg.output_dir) / "barrier.csv", std::ios::binary);
  if (!csv) throw IOError("cannot open barrier.csv for writing");
  csv << "m,c0,gmax,fmax,epsilon0,max_ratio_at_half,verified\n";

  bool all_ok = true;
  auto rng = make_rng(cfg.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (double m : cfg.barrier_m)
    for (double c0 : cfg.barrier_c0)
      for (double gmax : cfg.barrier_gmax)
        for (double fmax : cfg.barrier_fmax) {
          double eps0 = 0.0, worst = 0.0;
          bool verified = false;
          try {
            eps0 = barrier_epsilon0(m, c0, gmax, fmax);
            BarrierParams p;
            p.m = m;
            p.C0 = c0;
            p.G_max = gmax;
            p.F_max = fmax;
            p.epsilon = 0.5 * eps0;
            p.a = std::max(1.0, eps0);  // notional strip, wide enough to fit
            worst = -std::numeric_limits<double>::infinity();
            const int strip_n = 1000, coeff_n = 1000;
            std::vector<std::pair<double, double>> draws(coeff_n);
            for (auto& d : draws) d = {c0 * unit(rng), c0 * unit(rng)};
            draws[0] = {-c0, c0};  // adversarial corner
            for (int s = 0; s <= strip_n; ++s) {
              double x1 = -p.a + p.epsilon * s / strip_n;
              for (auto& d : draws)
                worst = std::max(worst,
                                 barrier_ratio_sample(x1, p, m * m, d.first, d.second));
            }
            verified = worst < -1.0 && worst * worst > gmax * fmax;
          } catch (const NoEpsilonFound&) {
            verified = false;
          }
          char buf[200];
          std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", m,
                        c0, gmax, fmax, eps0, worst, verified ? 1 : 0);
          csv << buf;
          all_ok = all_ok && verified;
        }

  VerdictSet verdicts;
  verdicts.add("barrier_certified", all_ok);
  return verdicts.exit_code();
}

inline int run_check(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  CoupledRHS rhs = cfg.make_config_rhs();
  auto p1 = check_p1_symmetry(rhs, cfg.check_box, cfg.check_n, cfg.seed);
  auto cm = check_cross_monotonicity(rhs, cfg.check_box, cfg.check_n, cfg.seed);

  std::ofstream out(fs::path(cfg.output_dir) / "check.txt", std::ios::binary);
  if (!out) throw IOError("cannot open check.txt for writing");
  out << "rhs = " << rhs.name << "\n";
  out << "samples = " << cfg.check_n << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "p1_symmetry_pass = " << (p1.pass ? "true" : "false") << "\n";
  out << "p1_symmetry_equality = " << (p1.equality ? "true" : "false") << "\n";
  out << "p1_worst_margin = " << fmt_g(p1.worst_margin) << "\n";
  if (!p1.pass) {
    out << "p1_witness = " << fmt_g(p1.witness[0]) << "," << fmt_g(p1.witness[1]) << ","
        << fmt_g(p1.witness[2]) << "," << fmt_g(p1.witness[3]) << "\n";
    out << "p1_witness_fn = " << (p1.witness_fn == Which::G ? "g" : "f") << "\n";
  }
  out << "cross_monotonicity_pass = " << (cm.pass ? "true" : "false") << "\n";
  out << "g_dv_min = " << fmt_g(cm.g_dv_min) << "\n";
  out << "g_dv_max = " << fmt_g(cm.g_dv_max) << "\n";
  out << "f_du_min = " << fmt_g(cm.f_du_min) << "\n";
  out << "f_du_max = " << fmt_g(cm.f_du_max) << "\n";
  if (!cm.pass) {
    out << "cross_witness = " << fmt_g(cm.witness[0]) << "," << fmt_g(cm.witness[1])
        << "," << fmt_g(cm.witness[2]) << "," << fmt_g(cm.witness[3]) << "\n";
    out << "cross_witness_fn = " << (cm.witness_fn == Which::G ? "g" : "f") << "\n";
  }
  out << "certified_box = [" << fmt_g(cfg.check_box.u_min) << "," << fmt_g(cfg.check_box.u_max)
      << "]x[" << fmt_g(cfg.check_box.v_min) << "," << fmt_g(cfg.check_box.v_max) << "]x["
      << fmt_g(cfg.check_box.p1_min) << "," << fmt_g(cfg.check_box.p1_max) << "]x["
      << fmt_g(cfg.check_box.p2_min) << "," << fmt_g(cfg.check_box.p2_max) << "]\n";

  VerdictSet verdicts;
  verdicts.add("p1_symmetry", p1.pass);
  verdicts.add("cross_monotonicity", cm.pass);
  return verdicts.exit_code();
}

inline int run_validate(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  ManufacturedCase mc = manufactured_case(cfg.case_name);

  struct Row {
    double h, error, order;
    int iterations;
  };
  std::vector<Row> rows;
  bool solves_ok = true;
  for (double h : cfg.validate_h) {
    UniformGrid grid(mc.domain, h);
    SolveResult res;
    try {
      res = newton_solve(mc.domain, grid, mc.rhs, mc.boundary_u, mc.boundary_v, cfg.solve);
    } catch (const Error&) {
      solves_ok = false;
      rows.push_back({h, std::numeric_limits<double>::quiet_NaN(),
                      std::numeric_limits<double>::quiet_NaN(), -1});
      continue;
    }
    double err = 0.0;
    for (int k : grid.active_nodes())
      err = std::max(err, std::abs(res.u.values[k] - mc.exact_u(grid.coord(k))));
    rows.push_back({h, err, std::numeric_limits<double>::quiet_NaN(), res.iterations});
  }

  bool orders_ok = rows.size() >= 2;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!(rows[i - 1].error > 0.0) || !(rows[i].error > 0.0)) {
      orders_ok = false;
      continue;
    }
    double order = std::log(rows[i - 1].error / rows[i].error) /
                   std::log(rows[i - 1].h / rows[i].h);
    rows[i].order = order;
    double lo = std::log2(3.2), hi = std::log2(4.8);
    if (!(order >= lo && order <= hi)) orders_ok = false;
  }

  std::ofstream csv(fs::path(cfg.output_dir) / "validate.csv", std::ios::binary);
  if (!csv) throw IOError("cannot open validate.csv for writing");
  csv << "h,error,iterations,order\n";
  for (const Row& r : rows) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d,%.17g\n", r.h, r.error, r.iterations,
                  r.order);
    csv << buf;
  }

  VerdictSet verdicts;
  verdicts.add("solves_converged", solves_ok);
  verdicts.add("observed_order", orders_ok);
  return verdicts.exit_code();
}

}  // namespace detail

/// Executes one experiment. Returns 0 iff every verdict in the run summary
/// is a pass; throws ConfigError / SolveError / IOError (and the specific
/// solver errors) for non-verdict failures.
inline int run(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.output_dir);
  if (cfg.command == "solve") return detail::run_solve(cfg);
  if (cfg.command == "sweep") return detail::run_sweep(cfg);
  if (cfg.command == "barrier") return detail::run_barrier(cfg);
  if (cfg.command == "check") return detail::run_check(cfg);
  if (cfg.command == "validate") return detail::run_validate(cfg);
  throw ConfigError("unknown command: " + cfg.command);
}

}  // namespace ma
