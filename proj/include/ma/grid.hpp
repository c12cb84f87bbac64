#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ma/errors.hpp"
#include "ma/geometry.hpp"

namespace ma {

enum class NodeClass : std::uint8_t { EXTERIOR = 0, INTERIOR = 1, NEAR_BOUNDARY = 2 };

/// Directions for arm indexing: +x1, -x1, +x2, -x2.
enum Arm : int { ARM_XP = 0, ARM_XM = 1, ARM_YP = 2, ARM_YM = 3 };

/// One-dimensional 3-point stencil along a grid axis. Entries reference
/// either nodal unknowns (cols) or Dirichlet trace values at boundary cut
/// points (tp). Weights already include the h scaling.
struct AxisStencil {
  std::array<int, 3> col{};
  std::array<double, 3> w{};
  int ncol = 0;
  std::array<Point, 2> tp{};
  std::array<double, 2> tw{};
  int ntp = 0;
};

/// Uniform isotropic grid covering the domain's bounding box with a margin
/// of fully exterior nodes, the origin snapped onto the node lattice.
/// Classification, Shortley-Weller arms and difference stencils are
/// precomputed once; the grid is immutable afterwards.
class UniformGrid {
 public:
  UniformGrid(Domain2D domain, double spacing) : dom_(std::move(domain)), h_(spacing) {
    if (!(spacing > 0.0)) throw ConfigError("grid spacing must be positive");
    if (!dom_.inside({0.0, 0.0}))
      throw ConfigError("domain does not contain the origin: " + dom_.name);
    build();
  }

  const Domain2D& domain() const { return dom_; }
  double h() const { return h_; }
  int n1() const { return n1_; }
  int n2() const { return n2_; }
  Point origin() const { return {x1_start_, x2_start_}; }
  double half_width() const { return half_width_; }

  int index(int i, int j) const { return i + n1_ * j; }
  int i_of(int k) const { return k % n1_; }
  int j_of(int k) const { return k / n1_; }
  Point coord(int k) const {
    return {x1_start_ + h_ * i_of(k), x2_start_ + h_ * j_of(k)};
  }
  int node_count() const { return n1_ * n2_; }

  NodeClass node_class(int k) const { return class_[k]; }
  bool is_exterior(int k) const { return class_[k] == NodeClass::EXTERIOR; }

  /// Fractional arm lengths toward +x1,-x1,+x2,-x2; all 1 at INTERIOR nodes.
  const std::array<double, 4>& arms(int k) const { return arms_[k]; }

  /// Node at which the 4-point cross stencil for node k is centered.
  /// Equal to k unless a diagonal neighbor is exterior; -1 if no usable
  /// center exists within the search radius.
  int cross_center(int k) const { return cross_center_[k]; }
  int cross_fallback_count() const { return cross_fallbacks_; }

  const std::vector<int>& active_nodes() const { return active_; }

  const AxisStencil& d2_stencil(int k, int axis) const { return d2_[axis][k]; }
  const AxisStencil& d1_stencil(int k, int axis) const { return d1_[axis][k]; }

  /// Weight of the cross-difference stencil (per diagonal corner).
  double cross_weight() const { return 1.0 / (4.0 * h_ * h_); }

  /// Corner offsets of the cross stencil around its center: (++, +-, -+, --).
  std::array<int, 4> cross_cols(int center) const {
    return {center + 1 + n1_, center + 1 - n1_, center - 1 + n1_, center - 1 - n1_};
  }
  static constexpr std::array<double, 4> cross_signs() { return {1.0, -1.0, -1.0, 1.0}; }

 private:
  void build() {
    const BBox& bb = dom_.bbox;
    int left = static_cast<int>(std::ceil(-bb.x1_min / h_)) + 2;
    int down = static_cast<int>(std::ceil(-bb.x2_min / h_)) + 2;
    x1_start_ = -left * h_;
    x2_start_ = -down * h_;
    n1_ = left + static_cast<int>(std::ceil(bb.x1_max / h_)) + 3;
    n2_ = down + static_cast<int>(std::ceil(bb.x2_max / h_)) + 3;

    int n = n1_ * n2_;
    std::vector<char> in(n, 0);
    // nodes inside by less than a dust tolerance (boundary running through a
    // gridline) are folded onto the boundary: their neighbors then carry a
    // full-length arm with the trace evaluated at the node's position
    double snap = 1e-9 * h_;
    for (int j = 0; j < n2_; ++j)
      for (int i = 0; i < n1_; ++i) {
        int k = index(i, j);
        Point p = coord(k);
        in[k] = dom_.inside(p) && dom_.boundary_distance(p) <= -snap ? 1 : 0;
      }

    class_.assign(n, NodeClass::EXTERIOR);
    arms_.assign(n, {1.0, 1.0, 1.0, 1.0});
    for (int j = 1; j + 1 < n2_; ++j)
      for (int i = 1; i + 1 < n1_; ++i) {
        int k = index(i, j);
        if (!in[k]) continue;
        bool xp = in[k + 1], xm = in[k - 1], yp = in[k + n1_], ym = in[k - n1_];
        if (xp && xm && yp && ym) {
          class_[k] = NodeClass::INTERIOR;
        } else {
          class_[k] = NodeClass::NEAR_BOUNDARY;
          Point p = coord(k);
          if (!xp) arms_[k][ARM_XP] = cut_fraction(p, {h_, 0.0});
          if (!xm) arms_[k][ARM_XM] = cut_fraction(p, {-h_, 0.0});
          if (!yp) arms_[k][ARM_YP] = cut_fraction(p, {0.0, h_});
          if (!ym) arms_[k][ARM_YM] = cut_fraction(p, {0.0, -h_});
        }
      }

    active_.clear();
    for (int k = 0; k < n; ++k)
      if (class_[k] != NodeClass::EXTERIOR) active_.push_back(k);

    build_cross_centers(in);
    build_axis_stencils();
    half_width_ = half_width_a(dom_);
  }

  /// Fraction in (0,1] of the step at which [p, p+step] crosses the boundary.
  double cut_fraction(Point p, Point step) const {
    double lo = 0.0, hi = 1.0;  // inside at lo, outside at hi
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      Point q{p.x1 + mid * step.x1, p.x2 + mid * step.x2};
      (dom_.inside(q) ? lo : hi) = mid;
    }
    return std::max(0.5 * (lo + hi), 1e-4);
  }

  void build_cross_centers(const std::vector<char>& in) {
    auto diagonals_ok = [&](int i, int j) {
      if (i < 1 || i + 1 >= n1_ || j < 1 || j + 1 >= n2_) return false;
      return in[index(i + 1, j + 1)] && in[index(i + 1, j - 1)] &&
             in[index(i - 1, j + 1)] && in[index(i - 1, j - 1)];
    };
    cross_center_.assign(n1_ * n2_, -1);
    cross_fallbacks_ = 0;
    for (int k : active_) {
      int i = i_of(k), j = j_of(k);
      if (diagonals_ok(i, j)) {
        cross_center_[k] = k;
        continue;
      }
      int best = -1, best_d2 = 1 << 30;
      for (int r = 1; r <= 4 && best < 0; ++r) {
        for (int dj = -r; dj <= r; ++dj)
          for (int di = -r; di <= r; ++di) {
            if (std::max(std::abs(di), std::abs(dj)) != r) continue;
            int ci = i + di, cj = j + dj;
            int d2 = di * di + dj * dj;
            if (d2 < best_d2 && diagonals_ok(ci, cj)) {
              best = index(ci, cj);
              best_d2 = d2;
            }
          }
      }
      cross_center_[k] = best;
      ++cross_fallbacks_;
    }
  }

  void build_axis_stencils() {
    for (int axis = 0; axis < 2; ++axis) {
      d2_[axis].assign(n1_ * n2_, {});
      d1_[axis].assign(n1_ * n2_, {});
    }
    for (int k : active_) {
      Point p = coord(k);
      for (int axis = 0; axis < 2; ++axis) {
        int stride = axis == 0 ? 1 : n1_;
        double tm = arms_[k][axis == 0 ? ARM_XM : ARM_YM];
        double tp = arms_[k][axis == 0 ? ARM_XP : ARM_YP];
        Point pm = p, pp = p;
        if (axis == 0) {
          pm.x1 -= tm * h_;
          pp.x1 += tp * h_;
        } else {
          pm.x2 -= tm * h_;
          pp.x2 += tp * h_;
        }
        // decide by class, not by theta: when the boundary falls exactly on
        // the neighbor gridline the cut fraction rounds to 1 while the
        // neighbor is still exterior
        bool m_is_node = class_[k - stride] != NodeClass::EXTERIOR;
        bool p_is_node = class_[k + stride] != NodeClass::EXTERIOR;

        AxisStencil& s2 = d2_[axis][k];
        AxisStencil& s1 = d1_[axis][k];
        double sum = tm + tp, hh = h_ * h_;
        double w2m = 2.0 / (tm * sum * hh);
        double w2p = 2.0 / (tp * sum * hh);
        double w20 = -2.0 / (tm * tp * hh);
        double w1m = -tp / (tm * sum * h_);
        double w1p = tm / (tp * sum * h_);
        double w10 = (tp - tm) / (tm * tp * h_);

        s2.col[s2.ncol] = k;
        s2.w[s2.ncol++] = w20;
        s1.col[s1.ncol] = k;
        s1.w[s1.ncol++] = w10;
        if (m_is_node) {
          s2.col[s2.ncol] = k - stride;
          s2.w[s2.ncol++] = w2m;
          s1.col[s1.ncol] = k - stride;
          s1.w[s1.ncol++] = w1m;
        } else {
          s2.tp[s2.ntp] = pm;
          s2.tw[s2.ntp++] = w2m;
          s1.tp[s1.ntp] = pm;
          s1.tw[s1.ntp++] = w1m;
        }
        if (p_is_node) {
          s2.col[s2.ncol] = k + stride;
          s2.w[s2.ncol++] = w2p;
          s1.col[s1.ncol] = k + stride;
          s1.w[s1.ncol++] = w1p;
        } else {
          s2.tp[s2.ntp] = pp;
          s2.tw[s2.ntp++] = w2p;
          s1.tp[s1.ntp] = pp;
          s1.tw[s1.ntp++] = w1p;
        }
      }
    }
  }

  Domain2D dom_;
  double h_;
  int n1_ = 0, n2_ = 0;
  double x1_start_ = 0.0, x2_start_ = 0.0;
  double half_width_ = 0.0;
  std::vector<NodeClass> class_;
  std::vector<std::array<double, 4>> arms_;
  std::vector<int> cross_center_;
  std::vector<int> active_;
  std::array<std::vector<AxisStencil>, 2> d2_, d1_;
  int cross_fallbacks_ = 0;
};

/// Nodes of the cap region strictly left of the plane x1 = lambda, plus the
/// on-grid nodes lying on the plane itself.
struct CapRegion {
  double lambda = 0.0;
  std::vector<int> node_indices;
  std::vector<int> plane_nodes;
};

inline CapRegion cap_region(const Domain2D& domain, const UniformGrid& grid,
                            double lambda) {
  double a = grid.half_width();
  (void)domain;
  if (lambda < -a - 1e-12 || lambda > 1e-12)
    throw LambdaOutOfRange("lambda must lie in [-a, 0], got " + std::to_string(lambda));
  CapRegion cap;
  cap.lambda = lambda;
  double tol = 1e-9 * grid.h();
  for (int k : grid.active_nodes()) {
    double x1 = grid.coord(k).x1;
    if (x1 < lambda - tol)
      cap.node_indices.push_back(k);
    else if (std::abs(x1 - lambda) <= tol)
      cap.plane_nodes.push_back(k);
  }
  return cap;
}

}  // namespace ma
