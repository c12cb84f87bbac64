#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>

#include "ma/errors.hpp"
#include "ma/sampling.hpp"

namespace ma {

struct Point {
  double x1 = 0.0;
  double x2 = 0.0;
};

struct BBox {
  double x1_min, x1_max, x2_min, x2_max;
  double width() const { return x1_max - x1_min; }
  double height() const { return x2_max - x2_min; }
};

/// Bounded planar region given by an inside test and a bounding box.
/// boundary_distance is signed (negative inside) and accurate near the
/// boundary; deep-interior values are only required to stay negative.
struct Domain2D {
  std::function<bool(Point)> inside;
  BBox bbox;
  std::function<double(Point)> boundary_distance;
  std::string name;
};

/// Reflection of p across the vertical plane x1 = lambda.
inline Point reflect(Point p, double lambda) {
  return {2.0 * lambda - p.x1, p.x2};
}

namespace detail {

/// Pseudo signed distance F/|grad F| with a floor on the gradient norm so
/// deep-interior values stay finite. Second-order accurate near the zero set.
inline double normalized_implicit(double f, double gx, double gy, double floor = 0.5) {
  return f / std::max(std::hypot(gx, gy), floor);
}

/// Leftmost boundary crossing of the row x2 = const, or +inf when the row
/// misses the domain. Coarse scan from the left, then bisection.
inline double row_leftmost(const Domain2D& dom, double x2, int scan = 4096) {
  double lo = dom.bbox.x1_min - 0.05 * dom.bbox.width() - 1e-9;
  double hi = dom.bbox.x1_max;
  double step = (hi - lo) / scan;
  double t_in = std::numeric_limits<double>::quiet_NaN();
  for (int i = 1; i <= scan; ++i) {
    double t = lo + i * step;
    if (dom.inside({t, x2})) {
      t_in = t;
      break;
    }
  }
  if (std::isnan(t_in)) return std::numeric_limits<double>::infinity();
  double a = t_in - step, b = t_in;  // inside(a) false, inside(b) true
  for (int it = 0; it < 80 && b - a > 1e-14; ++it) {
    double mid = 0.5 * (a + b);
    (dom.inside({mid, x2}) ? b : a) = mid;
  }
  return 0.5 * (a + b);
}

}  // namespace detail

/// Half-width a = -inf{ x1 : (x1,x2) in Omega } > 0.
/// Coarse row scan locates the extremal row, golden-section refines it, and
/// each row evaluation is a bisection on the inside predicate.
inline double half_width_a(const Domain2D& domain) {
  const int rows = 1024;
  double y_lo = domain.bbox.x2_min, y_hi = domain.bbox.x2_max;
  double best_y = y_lo, best = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= rows; ++j) {
    double y = y_lo + (y_hi - y_lo) * j / rows;
    double l = detail::row_leftmost(domain, y, 512);
    if (l < best) {
      best = l;
      best_y = y;
    }
  }
  if (!std::isfinite(best)) throw NonPositiveA("domain has no interior samples");

  // golden-section on the row coordinate around the coarse minimizer
  double span = (y_hi - y_lo) / rows;
  double a = best_y - 2.0 * span, b = best_y + 2.0 * span;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = detail::row_leftmost(domain, c), fd = detail::row_leftmost(domain, d);
  for (int it = 0; it < 100 && (b - a) > 1e-9; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = detail::row_leftmost(domain, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = detail::row_leftmost(domain, d);
    }
  }
  double inf_x1 = std::min({best, fc, fd});
  if (!(inf_x1 < 0.0)) throw NonPositiveA("inf x1 is not negative: " + domain.name);
  return -inf_x1;
}

struct ContainmentReport {
  bool pass = true;
  Point witness{};       // sampled interior point whose segment escapes
  double bad_x1 = 0.0;   // intermediate x1' found outside
  int checked = 0;
};

/// Samples interior points with x1 < 0 and verifies every intermediate
/// (x1', x2), x1' in (x1, -x1), stays inside. Failure is a report outcome.
inline ContainmentReport check_reflection_containment(const Domain2D& domain,
                                                      int samples,
                                                      std::uint64_t seed = 20240811ULL) {
  if (samples < 1) throw ConfigError("check_reflection_containment: samples must be >= 1");
  ContainmentReport rep;
  HaltonBox4 seq(seed);
  const int segment_probes = 64;
  int accepted = 0;
  long budget = 64L * samples + 1024;
  while (accepted < samples && budget-- > 0) {
    auto q = seq.next();
    Point p{domain.bbox.x1_min + q[0] * domain.bbox.width(),
            domain.bbox.x2_min + q[1] * domain.bbox.height()};
    if (p.x1 >= 0.0 || !domain.inside(p)) continue;
    ++accepted;
    for (int j = 1; j <= segment_probes; ++j) {
      double x1p = p.x1 + (-2.0 * p.x1) * j / (segment_probes + 1);
      if (!domain.inside({x1p, p.x2})) {
        rep.pass = false;
        rep.witness = p;
        rep.bad_x1 = x1p;
        rep.checked = accepted;
        return rep;
      }
    }
  }
  rep.checked = accepted;
  return rep;
}

// ---------------------------------------------------------------------------
// builtin domains
// ---------------------------------------------------------------------------

inline Domain2D make_disk() {
  Domain2D d;
  d.name = "disk";
  d.inside = [](Point p) { return p.x1 * p.x1 + p.x2 * p.x2 < 1.0; };
  d.boundary_distance = [](Point p) { return std::hypot(p.x1, p.x2) - 1.0; };
  d.bbox = {-1.0, 1.0, -1.0, 1.0};
  return d;
}

/// Ellipse x1^2/4 + x2^2 < 1 (semi-axes 2 and 1).
inline Domain2D make_ellipse() {
  Domain2D d;
  d.name = "ellipse";
  d.inside = [](Point p) { return p.x1 * p.x1 / 4.0 + p.x2 * p.x2 < 1.0; };
  d.boundary_distance = [](Point p) {
    double f = p.x1 * p.x1 / 4.0 + p.x2 * p.x2 - 1.0;
    return detail::normalized_implicit(f, 0.5 * p.x1, 2.0 * p.x2);
  };
  d.bbox = {-2.0, 2.0, -1.0, 1.0};
  return d;
}

/// Rectangle (-1,1)x(-0.6,0.6). Corners are a smoothness deviation; used for
/// solver stress runs, not symmetry verification.
inline Domain2D make_rect() {
  Domain2D d;
  d.name = "rect";
  d.inside = [](Point p) { return std::abs(p.x1) < 1.0 && std::abs(p.x2) < 0.6; };
  d.boundary_distance = [](Point p) {
    double dx = std::abs(p.x1) - 1.0, dy = std::abs(p.x2) - 0.6;
    double ox = std::max(dx, 0.0), oy = std::max(dy, 0.0);
    double outside = std::hypot(ox, oy);
    double inside = std::min(std::max(dx, dy), 0.0);
    return outside + inside;
  };
  d.bbox = {-1.0, 1.0, -0.6, 0.6};
  return d;
}

/// Stadium: points within 0.5 of the segment [(-0.6,0),(0.6,0)].
inline Domain2D make_stadium() {
  auto seg_dist = [](Point p) {
    double t = std::clamp(p.x1, -0.6, 0.6);
    return std::hypot(p.x1 - t, p.x2);
  };
  Domain2D d;
  d.name = "stadium";
  d.inside = [seg_dist](Point p) { return seg_dist(p) < 0.5; };
  d.boundary_distance = [seg_dist](Point p) { return seg_dist(p) - 0.5; };
  d.bbox = {-1.1, 1.1, -0.5, 0.5};
  return d;
}

/// Egg: x1^2 (1 - 0.35 clamp(x1,0,1)) + x2^2 (1 - 0.2 x1) < 0.64.
/// Asymmetric in x1 (wider on the right, half-width a = 0.8 on the left) yet
/// every leftward point reflects inside; verified by
/// check_reflection_containment at construction time in tests.
inline Domain2D make_egg() {
  auto f = [](Point p) {
    double c1 = 1.0 - 0.35 * std::clamp(p.x1, 0.0, 1.0);
    double c2 = 1.0 - 0.2 * p.x1;
    return p.x1 * p.x1 * c1 + p.x2 * p.x2 * c2 - 0.64;
  };
  Domain2D d;
  d.name = "egg";
  d.inside = [f](Point p) { return f(p) < 0.0; };
  d.boundary_distance = [f](Point p) {
    double c1 = 1.0 - 0.35 * std::clamp(p.x1, 0.0, 1.0);
    double dc1 = (p.x1 > 0.0 && p.x1 < 1.0) ? -0.35 : 0.0;
    double gx = 2.0 * p.x1 * c1 + p.x1 * p.x1 * dc1 - 0.2 * p.x2 * p.x2;
    double gy = 2.0 * p.x2 * (1.0 - 0.2 * p.x1);
    return detail::normalized_implicit(f(p), gx, gy);
  };
  d.bbox = {-0.82, 1.01, -0.82, 0.82};
  return d;
}

/// Superellipse |xi1|^m + |xi2|^m < 1 with xi1 = (x1-c1)/(A s(x1)),
/// xi2 = (x2-c2)/B. Positive skew widens the right side:
/// s(x1) = 1 + skew * clamp((x1-c1)/A, 0, 1).
inline Domain2D make_superellipse(Point center, double semi_a, double semi_b,
                                  double exponent, double skew) {
  if (!(semi_a > 0.0) || !(semi_b > 0.0) || !(exponent >= 1.0))
    throw ConfigError("superellipse: semi-axes must be positive and exponent >= 1");
  auto f = [=](Point p) {
    double t = std::clamp((p.x1 - center.x1) / semi_a, 0.0, 1.0);
    double s = 1.0 + skew * t;
    double xi1 = (p.x1 - center.x1) / (semi_a * s);
    double xi2 = (p.x2 - center.x2) / semi_b;
    return std::pow(std::abs(xi1), exponent) + std::pow(std::abs(xi2), exponent) - 1.0;
  };
  Domain2D d;
  d.name = "superellipse";
  d.inside = [f](Point p) { return f(p) < 0.0; };
  d.boundary_distance = [f](Point p) {
    const double step = 1e-6;
    double gx = (f({p.x1 + step, p.x2}) - f({p.x1 - step, p.x2})) / (2.0 * step);
    double gy = (f({p.x1, p.x2 + step}) - f({p.x1, p.x2 - step})) / (2.0 * step);
    return detail::normalized_implicit(f(p), gx, gy);
  };
  double right = semi_a * (1.0 + std::max(skew, 0.0));
  double left = semi_a * (1.0 + std::max(-skew, 0.0));
  d.bbox = {center.x1 - left - 0.01, center.x1 + right + 0.01,
            center.x2 - semi_b - 0.01, center.x2 + semi_b + 0.01};
  return d;
}

/// Builtin lookup by CLI name.
inline Domain2D make_domain(const std::string& name) {
  if (name == "disk") return make_disk();
  if (name == "ellipse") return make_ellipse();
  if (name == "rect") return make_rect();
  if (name == "stadium") return make_stadium();
  if (name == "egg") return make_egg();
  throw ConfigError("unknown domain: " + name);
}

}  // namespace ma
