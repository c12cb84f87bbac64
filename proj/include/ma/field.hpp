#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ma/errors.hpp"
#include "ma/grid.hpp"
#include "ma/sym2.hpp"

namespace ma {

/// Nodal scalar values on a UniformGrid masked to the domain, with a
/// Dirichlet trace used at boundary cut points.
struct ScalarField {
  const UniformGrid* grid = nullptr;
  std::vector<double> values;
  std::function<double(Point)> boundary_trace;

  ScalarField() = default;
  ScalarField(const UniformGrid& g, std::function<double(Point)> trace)
      : grid(&g),
        values(g.node_count(), std::numeric_limits<double>::quiet_NaN()),
        boundary_trace(std::move(trace)) {}

  double operator[](int k) const { return values[k]; }
  double& operator[](int k) { return values[k]; }

  /// Fills nodal values (and keeps fn as the trace) from a closed form.
  static ScalarField from_function(const UniformGrid& g,
                                   const std::function<double(Point)>& fn) {
    ScalarField f(g, fn);
    for (int k : g.active_nodes()) f.values[k] = fn(g.coord(k));
    return f;
  }
};

/// Max-norm over the active nodes.
inline double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (int k : f.grid->active_nodes()) m = std::max(m, std::abs(f.values[k]));
  return m;
}

namespace detail {

inline void require_active(const UniformGrid& g, int k) {
  if (g.is_exterior(k)) throw ExteriorNode("operation requested at exterior node");
}

/// Value one arm away from node k along the axis: the neighbor node, or the
/// Dirichlet trace at the cut point when the neighbor is exterior (the cut
/// fraction can round to 1 when the boundary sits on the neighbor gridline).
inline double arm_value(const ScalarField& f, const UniformGrid& g, int k, int axis,
                        int dir, double theta) {
  int nk = k + dir * (axis == 0 ? 1 : g.n1());
  if (theta >= 1.0 && !g.is_exterior(nk)) return f.values[nk];
  Point p = g.coord(k);
  (axis == 0 ? p.x1 : p.x2) += dir * theta * g.h();
  return f.boundary_trace(p);
}

/// Second difference in difference-first form. The neighbor differences are
/// computed before any 1/theta scaling, which keeps the rounding floor at
/// O(eps/h) even for very short arms.
inline double apply_d2(const ScalarField& f, int k, int axis) {
  const UniformGrid& g = *f.grid;
  const auto& arms = g.arms(k);
  double tm = arms[axis == 0 ? ARM_XM : ARM_YM];
  double tp = arms[axis == 0 ? ARM_XP : ARM_YP];
  double f0 = f.values[k];
  double fp = arm_value(f, g, k, axis, +1, tp);
  double fm = arm_value(f, g, k, axis, -1, tm);
  double h = g.h();
  return 2.0 * ((fp - f0) / tp - (f0 - fm) / tm) / ((tm + tp) * h * h);
}

inline double apply_d1(const ScalarField& f, int k, int axis) {
  const UniformGrid& g = *f.grid;
  const auto& arms = g.arms(k);
  double tm = arms[axis == 0 ? ARM_XM : ARM_YM];
  double tp = arms[axis == 0 ? ARM_XP : ARM_YP];
  double f0 = f.values[k];
  double fp = arm_value(f, g, k, axis, +1, tp);
  double fm = arm_value(f, g, k, axis, -1, tm);
  return ((tm / tp) * (fp - f0) + (tp / tm) * (f0 - fm)) / ((tm + tp) * g.h());
}

}  // namespace detail

struct Vec2 {
  double p1 = 0.0;
  double p2 = 0.0;
};

/// Discrete gradient: central differences at INTERIOR nodes, Shortley-Weller
/// weighted one-sided differences with the Dirichlet trace at NEAR_BOUNDARY.
inline Vec2 gradient(const ScalarField& f, int k) {
  const UniformGrid& g = *f.grid;
  detail::require_active(g, k);
  return {detail::apply_d1(f, k, 0), detail::apply_d1(f, k, 1)};
}

/// Discrete Hessian: 5-point second differences on shortened arms for the
/// diagonal, 4-point cross stencil (recentered away from exterior diagonals
/// when needed) for the mixed term.
inline Sym2 hessian(const ScalarField& f, int k) {
  const UniformGrid& g = *f.grid;
  detail::require_active(g, k);
  Sym2 m;
  m.a11 = detail::apply_d2(f, k, 0);
  m.a22 = detail::apply_d2(f, k, 1);
  int c = g.cross_center(k);
  if (c >= 0) {
    auto cols = g.cross_cols(c);
    auto sgn = UniformGrid::cross_signs();
    double acc = 0.0;
    for (int t = 0; t < 4; ++t) acc += sgn[t] * f.values[cols[t]];
    m.a12 = acc * g.cross_weight();
  }
  return m;
}

/// Bilinear interpolation at p (inside the closure of the domain). Cells cut
/// by the boundary get ghost corner values extrapolated through the Dirichlet
/// trace at the cut points.
inline double sample(const ScalarField& f, Point p) {
  const UniformGrid& g = *f.grid;
  const Domain2D& dom = g.domain();
  double diam = std::max(dom.bbox.width(), dom.bbox.height());
  if (!dom.inside(p) && dom.boundary_distance(p) > 1e-8 * std::max(1.0, diam))
    throw OutsideDomain("sample point outside the domain closure");

  double fi = (p.x1 - g.origin().x1) / g.h();
  double fj = (p.x2 - g.origin().x2) / g.h();
  int i = std::min(std::max(static_cast<int>(std::floor(fi)), 0), g.n1() - 2);
  int j = std::min(std::max(static_cast<int>(std::floor(fj)), 0), g.n2() - 2);
  double ax = fi - i, ay = fj - j;

  int corner[4] = {g.index(i, j), g.index(i + 1, j), g.index(i, j + 1),
                   g.index(i + 1, j + 1)};
  double w[4] = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};

  double val[4];
  for (int c = 0; c < 4; ++c) {
    int k = corner[c];
    if (!g.is_exterior(k)) {
      val[c] = f.values[k];
      continue;
    }
    // ghost corner: extrapolate along an in-cell edge (or the diagonal)
    // through the boundary cut point
    Point pc = g.coord(k);
    static constexpr int partner_of[4][3] = {
        {1, 2, 3}, {0, 3, 2}, {3, 0, 1}, {2, 1, 0}};
    auto extrapolate = [&](int kp, double& out) {
      if (g.is_exterior(kp)) return false;
      Point pq = g.coord(kp);
      double lo = 0.0, hi = 1.0;  // inside at pq, outside at pc
      for (int it = 0; it < 50; ++it) {
        double mid = 0.5 * (lo + hi);
        Point z{pq.x1 + mid * (pc.x1 - pq.x1), pq.x2 + mid * (pc.x2 - pq.x2)};
        (dom.inside(z) ? lo : hi) = mid;
      }
      double theta = std::max(0.5 * (lo + hi), 1e-4);
      Point cut{pq.x1 + theta * (pc.x1 - pq.x1), pq.x2 + theta * (pc.x2 - pq.x2)};
      double vc = f.boundary_trace(cut);
      out = vc + (1.0 - theta) / theta * (vc - f.values[kp]);
      return true;
    };
    double acc = 0.0;
    int found = 0;
    for (int q = 0; q < 2; ++q) {
      double ghost;
      if (extrapolate(corner[partner_of[c][q]], ghost)) {
        acc += ghost;
        ++found;
      }
    }
    if (found == 0) {
      double ghost;
      if (extrapolate(corner[partner_of[c][2]], ghost)) {
        acc = ghost;
        found = 1;
      }
    }
    if (found > 0) {
      val[c] = acc / found;
    } else {
      // isolated sliver: trace at the crossing of the segment p -> corner
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 50; ++it) {
        double mid = 0.5 * (lo + hi);
        Point z{p.x1 + mid * (pc.x1 - p.x1), p.x2 + mid * (pc.x2 - p.x2)};
        (dom.inside(z) ? lo : hi) = mid;
      }
      double t = 0.5 * (lo + hi);
      val[c] = f.boundary_trace({p.x1 + t * (pc.x1 - p.x1), p.x2 + t * (pc.x2 - p.x2)});
    }
  }
  return w[0] * val[0] + w[1] * val[1] + w[2] * val[2] + w[3] * val[3];
}

/// Bilinear interpolation of a per-node Sym2 field (no ghost handling; all
/// four corners must be non-exterior).
inline Sym2 sample_sym2(const UniformGrid& g, const std::vector<Sym2>& nodal, Point p,
                        bool* ok = nullptr) {
  double fi = (p.x1 - g.origin().x1) / g.h();
  double fj = (p.x2 - g.origin().x2) / g.h();
  int i = std::min(std::max(static_cast<int>(std::floor(fi)), 0), g.n1() - 2);
  int j = std::min(std::max(static_cast<int>(std::floor(fj)), 0), g.n2() - 2);
  double ax = fi - i, ay = fj - j;
  int corner[4] = {g.index(i, j), g.index(i + 1, j), g.index(i, j + 1),
                   g.index(i + 1, j + 1)};
  double w[4] = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
  Sym2 acc;
  for (int c = 0; c < 4; ++c) {
    if (g.is_exterior(corner[c])) {
      if (ok) *ok = false;
      return acc;
    }
    acc = acc + w[c] * nodal[corner[c]];
  }
  if (ok) *ok = true;
  return acc;
}

// ---------------------------------------------------------------------------
// serialization: CSV of non-exterior nodes plus a structured-text sidecar
// ---------------------------------------------------------------------------

inline void write_field_csv(const ScalarField& f, const std::string& path) {
  const UniformGrid& g = *f.grid;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot open for writing: " + path);
  out << "x1,x2,value\n";
  char buf[96];
  for (int k : g.active_nodes()) {
    Point p = g.coord(k);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.x1, p.x2, f.values[k]);
    out << buf;
  }
  std::ofstream meta(path + ".meta", std::ios::binary);
  if (!meta) throw IOError("cannot open for writing: " + path + ".meta");
  std::snprintf(buf, sizeof buf, "%.17g", g.h());
  meta << "h = " << buf << "\n";
  meta << "n1 = " << g.n1() << "\n";
  meta << "n2 = " << g.n2() << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", g.origin().x1);
  meta << "origin_x1 = " << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", g.origin().x2);
  meta << "origin_x2 = " << buf << "\n";
  meta << "domain_name = " << g.domain().name << "\n";
}

struct LoadedField {
  std::unique_ptr<UniformGrid> grid;
  ScalarField field;
};

/// Reads a field written by write_field_csv back onto a freshly built grid.
/// The sidecar names the builtin domain and pins h; rows are matched to
/// nodes by coordinate. The loaded field gets a nearest-value trace.
inline LoadedField load_field_csv(const std::string& path) {
  std::ifstream meta(path + ".meta");
  if (!meta) throw IOError("missing sidecar: " + path + ".meta");
  double h = 0.0;
  std::string domain_name;
  int n1 = 0, n2 = 0;
  std::string line;
  while (std::getline(meta, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
    };
    trim(key);
    trim(val);
    if (key == "h") h = std::stod(val);
    else if (key == "n1") n1 = std::stoi(val);
    else if (key == "n2") n2 = std::stoi(val);
    else if (key == "domain_name") domain_name = val;
  }
  if (!(h > 0.0) || domain_name.empty())
    throw IOError("sidecar lacks h or domain_name: " + path + ".meta");

  auto grid_ptr = std::make_unique<UniformGrid>(make_domain(domain_name), h);
  UniformGrid& grid = *grid_ptr;
  if ((n1 && grid.n1() != n1) || (n2 && grid.n2() != n2))
    throw IOError("sidecar grid shape does not match rebuilt grid: " + path);

  ScalarField f(grid, nullptr);
  std::ifstream in(path);
  if (!in) throw IOError("cannot open: " + path);
  std::getline(in, line);  // header
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double x1, x2, v;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &x1, &x2, &v) != 3)
      throw IOError("bad CSV row in " + path + ": " + line);
    int i = static_cast<int>(std::lround((x1 - grid.origin().x1) / h));
    int j = static_cast<int>(std::lround((x2 - grid.origin().x2) / h));
    if (i < 0 || i >= grid.n1() || j < 0 || j >= grid.n2())
      throw IOError("CSV row outside grid in " + path);
    int k = grid.index(i, j);
    if (grid.is_exterior(k)) throw IOError("CSV row maps to exterior node in " + path);
    f.values[k] = v;
    ++rows;
  }
  if (rows != grid.active_nodes().size())
    throw IOError("CSV row count does not match grid in " + path);

  // nearest-node fallback trace (the file format carries no trace function)
  const UniformGrid* gp = f.grid;
  std::vector<double> vals = f.values;
  f.boundary_trace = [gp, vals](Point p) {
    int i = std::min(std::max(static_cast<int>(std::lround((p.x1 - gp->origin().x1) / gp->h())), 0),
                     gp->n1() - 1);
    int j = std::min(std::max(static_cast<int>(std::lround((p.x2 - gp->origin().x2) / gp->h())), 0),
                     gp->n2() - 1);
    // walk to the closest non-exterior node in a small neighborhood
    for (int r = 0; r < 4; ++r)
      for (int dj = -r; dj <= r; ++dj)
        for (int di = -r; di <= r; ++di) {
          int ii = std::clamp(i + di, 0, gp->n1() - 1);
          int jj = std::clamp(j + dj, 0, gp->n2() - 1);
          int k = gp->index(ii, jj);
          if (!gp->is_exterior(k)) return vals[k];
        }
    return 0.0;
  };
  return {std::move(grid_ptr), std::move(f)};
}

}  // namespace ma
