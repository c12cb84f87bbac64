#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ma/field.hpp"
#include "ma/parallel.hpp"
#include "ma/rhs.hpp"

namespace ma {

struct SweepConfig {
  int lambda_count = 64;
  double sign_tol = 0.0;    // <= 0 means auto: 10 h^2 (max|u| + max|v|)
  int interior_margin = 2;  // boundary standoff in grid cells
};

struct MonotonicityReport {
  bool pass = true;
  double worst_value = -std::numeric_limits<double>::infinity();  // max d/dx1
  Point worst_node{};
  double threshold = 0.0;  // sign_tol / h
  int checked = 0;
  double min_margin() const { return threshold - worst_value; }
};

struct LambdaRecord {
  double lambda = 0.0;
  double max_u = 0.0, max_v = 0.0;
  Point argmax_u{}, argmax_v{};
  int cap_size = 0;
};

struct SweepViolation {
  double lambda = 0.0;
  Point node{};
  double value = 0.0;
};

struct SweepReport {
  std::vector<LambdaRecord> records;
  double lambda_bar = 0.0;
  std::vector<SweepViolation> violations;
  double symmetry_defect_u = 0.0, symmetry_defect_v = 0.0;
  MonotonicityReport monotonicity_u, monotonicity_v;
  double sign_tol = 0.0;
  int mirror_skipped = 0;

  bool nonpositive_everywhere() const { return violations.empty(); }
};

/// U(x, lambda) = w(reflected x) - w(x) on the cap nodes, exactly zero at
/// on-grid plane nodes. Returned as a field that is NaN off the cap.
inline ScalarField reflect_difference(const ScalarField& w, double lambda) {
  const UniformGrid& g = *w.grid;
  ScalarField diff(g, nullptr);
  CapRegion cap = cap_region(g.domain(), g, lambda);
  for (int k : cap.node_indices) {
    Point p = g.coord(k);
    diff.values[k] = sample(w, reflect(p, lambda)) - w.values[k];
  }
  for (int k : cap.plane_nodes) diff.values[k] = 0.0;
  return diff;
}

/// Checks the discrete partial d/dx1 at interior nodes with x1 <= -h.
/// Pass means every checked value stays below sign_tol / h.
inline MonotonicityReport monotonicity_check(const ScalarField& w,
                                             const SweepConfig& cfg,
                                             double sign_tol_override = 0.0) {
  const UniformGrid& g = *w.grid;
  double h = g.h();
  double tol = sign_tol_override > 0.0 ? sign_tol_override : cfg.sign_tol;
  if (tol <= 0.0) tol = 10.0 * h * h * 2.0 * max_abs(w);
  MonotonicityReport rep;
  rep.threshold = tol / h;
  for (int k : g.active_nodes()) {
    if (g.node_class(k) != NodeClass::INTERIOR) continue;
    Point p = g.coord(k);
    if (p.x1 > -h + 1e-12 * h) continue;
    double d1 = detail::apply_d1(w, k, 0);
    ++rep.checked;
    if (d1 > rep.worst_value) {
      rep.worst_value = d1;
      rep.worst_node = p;
    }
  }
  rep.pass = rep.checked == 0 || rep.worst_value < rep.threshold;
  return rep;
}

/// Full lambda sweep: per-plane maxima of U and V, the estimated critical
/// plane, tolerance violations, x1-symmetry defects and the monotonicity
/// verdicts for both fields.
inline SweepReport sweep(const ScalarField& u, const ScalarField& v,
                         const Domain2D& domain, const SweepConfig& cfg) {
  const UniformGrid& g = *u.grid;
  (void)domain;
  double a = g.half_width();
  double h = g.h();

  SweepReport rep;
  rep.sign_tol = cfg.sign_tol > 0.0 ? cfg.sign_tol
                                    : 10.0 * h * h * (max_abs(u) + max_abs(v));

  int m = std::max(cfg.lambda_count, 2);
  rep.records.assign(m, {});
  std::vector<std::vector<SweepViolation>> viols(m);

  parallel_for(static_cast<std::size_t>(m), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t idx = lo; idx < hi; ++idx) {
      double lambda = -a * (1.0 - static_cast<double>(idx + 1) / m);
      if (lambda == 0.0) lambda = 0.0;  // normalize -0
      LambdaRecord rec;
      rec.lambda = lambda;
      CapRegion cap = cap_region(g.domain(), g, lambda);
      rec.cap_size = static_cast<int>(cap.node_indices.size());
      rec.max_u = rec.max_v = 0.0;
      rec.argmax_u = rec.argmax_v = Point{lambda, 0.0};
      bool first = true;
      for (int k : cap.node_indices) {
        Point p = g.coord(k);
        Point rp = reflect(p, lambda);
        double uu = sample(u, rp) - u.values[k];
        double vv = sample(v, rp) - v.values[k];
        if (first || uu > rec.max_u) {
          rec.max_u = uu;
          rec.argmax_u = p;
        }
        if (first || vv > rec.max_v) {
          rec.max_v = vv;
          rec.argmax_v = p;
        }
        first = false;
        if (uu > rep.sign_tol) viols[idx].push_back({lambda, p, uu});
        if (vv > rep.sign_tol) viols[idx].push_back({lambda, p, vv});
      }
      if (first) {
        rec.max_u = rec.max_v = 0.0;  // empty cap: vacuously nonpositive
      }
      rep.records[idx] = rec;
    }
  });

  for (auto& vlist : viols)
    rep.violations.insert(rep.violations.end(), vlist.begin(), vlist.end());

  // critical plane: sup over the sampled prefix on which both maxima stay
  // below the tolerance; -a when even the first plane fails
  rep.lambda_bar = -a;
  for (const LambdaRecord& rec : rep.records) {
    if (rec.max_u <= rep.sign_tol && rec.max_v <= rep.sign_tol)
      rep.lambda_bar = rec.lambda;
    else
      break;
  }

  // symmetry defects against the mirrored field
  for (int pass = 0; pass < 2; ++pass) {
    const ScalarField& w = pass == 0 ? u : v;
    double defect = 0.0;
    for (int k : g.active_nodes()) {
      Point p = g.coord(k);
      if (p.x1 >= 0.0) continue;
      try {
        defect = std::max(defect, std::abs(w.values[k] - sample(w, {-p.x1, p.x2})));
      } catch (const OutsideDomain&) {
        ++rep.mirror_skipped;
      }
    }
    (pass == 0 ? rep.symmetry_defect_u : rep.symmetry_defect_v) = defect;
  }

  rep.monotonicity_u = monotonicity_check(u, cfg, rep.sign_tol);
  rep.monotonicity_v = monotonicity_check(v, cfg, rep.sign_tol);
  return rep;
}

// ---------------------------------------------------------------------------
// discrete differential inequality
// ---------------------------------------------------------------------------

struct InequalityResidualField {
  double lambda = 0.0;
  std::vector<int> nodes;           // cap node indices
  std::vector<double> value;        // discrete inequality left side
  std::vector<char> masked;         // 1: gradient precondition failed there
  std::vector<double> cap_distance; // distance to the cap boundary
  /// Minimum unmasked value over nodes at cap distance > margin.
  double min_over_margin(double margin) const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (!masked[i] && cap_distance[i] > margin) m = std::min(m, value[i]);
    return m;
  }
};

/// Discrete left side of the comparison inequality for U (which == G) or V
/// (which == F): a_ij U_ij + g(reflected state) - g(state), with
/// a_ij = det_diff_coeffs(D^2 w_lambda, D^2 w). Derivatives of the reflected
/// field are evaluated by reflecting interpolated nodal derivatives of w,
/// so no second differences of interpolated values are taken. Nodes where
/// the reflected discrete d/dx1 exceeds +h are masked, matching the
/// pointwise extra assumption under which the inequality is derived.
inline InequalityResidualField inequality_residual(const ScalarField& u,
                                                   const ScalarField& v,
                                                   double lambda,
                                                   const CoupledRHS& rhs,
                                                   Which which = Which::G) {
  const UniformGrid& g = *u.grid;
  double a = g.half_width();
  if (lambda <= -a || lambda > 0.0)
    throw LambdaOutOfRange("inequality_residual: lambda outside (-a, 0]");

  const ScalarField& w = which == Which::G ? u : v;
  const auto& fn = which == Which::G ? rhs.g_value : rhs.f_value;

  // nodal derivative fields of u, v (for the coupling term) and w
  std::vector<Sym2> hess_w(g.node_count());
  std::vector<Vec2> grad_w(g.node_count());
  for (int k : g.active_nodes()) {
    hess_w[k] = hessian(w, k);
    grad_w[k] = gradient(w, k);
  }

  CapRegion cap = cap_region(g.domain(), g, lambda);
  InequalityResidualField out;
  out.lambda = lambda;
  out.nodes = cap.node_indices;
  std::size_t n = out.nodes.size();
  out.value.assign(n, std::numeric_limits<double>::quiet_NaN());
  out.masked.assign(n, 1);
  out.cap_distance.assign(n, 0.0);

  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      int k = out.nodes[i];
      Point p = g.coord(k);
      Point rp = reflect(p, lambda);
      out.cap_distance[i] =
          std::min(-g.domain().boundary_distance(p), lambda - p.x1);

      bool ok = false;
      Sym2 hr = sample_sym2(g, hess_w, rp, &ok);
      if (!ok) continue;  // reflected stencil not available: stays masked

      // derivative transform under x1-reflection: flip the mixed entry and
      // the first gradient component
      Sym2 a_refl{hr.a11, -hr.a12, hr.a22};
      Vec2 gr{0.0, 0.0};
      {
        // bilinear interpolation of the nodal gradient field
        double fi = (rp.x1 - g.origin().x1) / g.h();
        double fj = (rp.x2 - g.origin().x2) / g.h();
        int ii = std::min(std::max(static_cast<int>(std::floor(fi)), 0), g.n1() - 2);
        int jj = std::min(std::max(static_cast<int>(std::floor(fj)), 0), g.n2() - 2);
        double ax = fi - ii, ay = fj - jj;
        int corner[4] = {g.index(ii, jj), g.index(ii + 1, jj), g.index(ii, jj + 1),
                         g.index(ii + 1, jj + 1)};
        double wt[4] = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
        bool gok = true;
        for (int c = 0; c < 4; ++c) {
          if (g.is_exterior(corner[c])) {
            gok = false;
            break;
          }
          gr.p1 += wt[c] * grad_w[corner[c]].p1;
          gr.p2 += wt[c] * grad_w[corner[c]].p2;
        }
        if (!gok) continue;
      }
      double dw_refl_dx1 = -gr.p1;  // d(w_lambda)/dx1 at p
      Vec2 grad_refl{-gr.p1, gr.p2};

      double wl = sample(w, rp);
      double ul = which == Which::G ? wl : sample(u, rp);
      double vl = which == Which::G ? sample(v, rp) : wl;

      Sym2 b = hess_w[k];
      Sym2 coeffs = det_diff_coeffs(a_refl, b);
      double lhs = frob2(coeffs, a_refl - b) +
                   fn(ul, vl, grad_refl.p1, grad_refl.p2) -
                   fn(u.values[k], v.values[k], grad_w[k].p1, grad_w[k].p2);
      out.value[i] = lhs;
      out.masked[i] = dw_refl_dx1 <= g.h() ? 0 : 1;
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// barrier certificate calculator
// ---------------------------------------------------------------------------

struct BarrierParams {
  double m = 1.0;       // ellipticity lower bound
  double C0 = 1.0;      // coefficient magnitude bound
  double a = 1.0;       // half-width of the domain
  double epsilon = 0.1; // strip width
  double G_max = 1.0;   // sup dg/dv
  double F_max = 1.0;   // sup df/du
};

inline void validate(const BarrierParams& p) {
  if (!(p.m > 0.0) || !(p.C0 > 0.0) || !(p.epsilon > 0.0) || !(p.epsilon <= p.a) ||
      !(p.G_max > 0.0) || !(p.F_max > 0.0))
    throw ConfigError("barrier params: need m, C0, G_max, F_max > 0 and 0 < epsilon <= a");
}

/// psi(x1) = e - exp((x1 + a) / (2 epsilon)) on the strip [-a, -a + epsilon].
inline double barrier_psi(double x1, const BarrierParams& p) {
  validate(p);
  if (x1 < -p.a - 1e-12 || x1 > -p.a + p.epsilon + 1e-12)
    throw DomainError("barrier_psi: x1 outside the strip");
  return std::exp(1.0) - std::exp((x1 + p.a) / (2.0 * p.epsilon));
}

inline double barrier_psi_min() { return std::exp(1.0) - std::exp(0.5); }
inline double barrier_psi_max() { return std::exp(1.0) - 1.0; }

/// Worst-case upper bound of L psi / psi over the strip and over coefficient
/// fields with A11 >= m^2, |B1| <= C0, |C| <= C0. Returns +inf when the
/// smallness mechanism gives no guarantee (nonnegative numerator).
inline double barrier_ratio_bound(const BarrierParams& p) {
  double eps = p.epsilon;
  double numerator =
      -(p.m * p.m / (4.0 * eps * eps) - p.C0 / (2.0 * eps) - p.C0) +
      p.C0 * std::exp(1.0);
  if (numerator >= 0.0) return std::numeric_limits<double>::infinity();
  return numerator / barrier_psi_min();
}

/// Sampled ratio L1 psi / psi at one strip point with explicit coefficients.
/// Used as the resampling oracle for epsilon0 certificates.
inline double barrier_ratio_sample(double x1, const BarrierParams& p, double a11,
                                   double b1, double c) {
  double e_term = std::exp((x1 + p.a) / (2.0 * p.epsilon));
  double psi = std::exp(1.0) - e_term;
  double l_psi = -a11 * e_term / (4.0 * p.epsilon * p.epsilon) -
                 b1 * e_term / (2.0 * p.epsilon) + c * psi;
  return l_psi / psi;
}

/// Largest epsilon0 such that for every eps <= epsilon0 the ratio bound stays
/// below min(-1, -sqrt(G_max F_max)), which certifies both the single-point
/// bound and the two-point product condition against the coupling bounds.
inline double barrier_epsilon0(double m, double C0, double G_max, double F_max) {
  if (!(m > 0.0) || !(C0 > 0.0) || !(G_max > 0.0) || !(F_max > 0.0))
    throw ConfigError("barrier_epsilon0: inputs must be positive");
  double target = std::min(-1.0, -std::sqrt(G_max * F_max));
  auto bound = [&](double eps) {
    BarrierParams p;
    p.m = m;
    p.C0 = C0;
    p.epsilon = eps;
    return barrier_ratio_bound(p);
  };
  double lo = 1e-12;
  if (bound(lo) > target)
    throw NoEpsilonFound("no strip width certifies the ratio target");
  double hi = m * m / C0;  // numerator is increasing on (0, m^2/C0)
  if (bound(hi) <= target) return hi;
  while ((hi - lo) / lo > 1e-8) {
    double mid = 0.5 * (lo + hi);
    (bound(mid) <= target ? lo : hi) = mid;
  }
  return lo;
}

// ---------------------------------------------------------------------------
// sweep serialization
// ---------------------------------------------------------------------------

inline void write_sweep_csv(const SweepReport& rep, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot open for writing: " + path);
  out << "lambda,max_U,max_V,argmax_x1,argmax_x2\n";
  char buf[160];
  for (const LambdaRecord& r : rep.records) {
    // the argmax column reports the worse of the two fields
    Point am = r.max_u >= r.max_v ? r.argmax_u : r.argmax_v;
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", r.lambda,
                  r.max_u, r.max_v, am.x1, am.x2);
    out << buf;
  }
}

inline void write_sweep_summary(const SweepReport& rep, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot open for writing: " + path);
  char buf[96];
  auto put = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << key << " = " << buf << "\n";
  };
  put("lambda_bar", rep.lambda_bar);
  put("sign_tol", rep.sign_tol);
  put("symmetry_defect_u", rep.symmetry_defect_u);
  put("symmetry_defect_v", rep.symmetry_defect_v);
  out << "monotonicity_pass = "
      << (rep.monotonicity_u.pass && rep.monotonicity_v.pass ? "true" : "false")
      << "\n";
  put("worst_margin",
      std::min(rep.monotonicity_u.min_margin(), rep.monotonicity_v.min_margin()));
  out << "violations = " << rep.violations.size() << "\n";
}

}  // namespace ma
