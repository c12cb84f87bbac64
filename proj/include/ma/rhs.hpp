#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <string>

#include "ma/errors.hpp"
#include "ma/sampling.hpp"

namespace ma {

struct Partials {
  double du = 0.0, dv = 0.0, dp1 = 0.0, dp2 = 0.0;
};

enum class Which { G, F };

/// The coupling pair (g, f) of the system. Values are mandatory; partials
/// are optional closed forms, replaced by central finite differences of
/// step fd_step when absent.
struct CoupledRHS {
  std::string name = "custom";
  std::function<double(double, double, double, double)> g_value, f_value;
  std::function<Partials(double, double, double, double)> g_partials, f_partials;
  double fd_step = 1e-6;

  bool closed_form() const { return static_cast<bool>(g_partials); }
};

struct RhsEval {
  double value = 0.0;
  Partials partials;
};

inline RhsEval eval_rhs(const CoupledRHS& rhs, Which which, double u, double v,
                        double p1, double p2) {
  const auto& val = which == Which::G ? rhs.g_value : rhs.f_value;
  const auto& cp = which == Which::G ? rhs.g_partials : rhs.f_partials;
  RhsEval out;
  out.value = val(u, v, p1, p2);
  if (cp) {
    out.partials = cp(u, v, p1, p2);
  } else {
    double s = rhs.fd_step;
    out.partials.du = (val(u + s, v, p1, p2) - val(u - s, v, p1, p2)) / (2 * s);
    out.partials.dv = (val(u, v + s, p1, p2) - val(u, v - s, p1, p2)) / (2 * s);
    out.partials.dp1 = (val(u, v, p1 + s, p2) - val(u, v, p1 - s, p2)) / (2 * s);
    out.partials.dp2 = (val(u, v, p1, p2 + s) - val(u, v, p1, p2 - s)) / (2 * s);
  }
  if (!std::isfinite(out.value) || !std::isfinite(out.partials.du) ||
      !std::isfinite(out.partials.dv) || !std::isfinite(out.partials.dp1) ||
      !std::isfinite(out.partials.dp2))
    throw NonFiniteResult(rhs.name + ": non-finite value or partial");
  return out;
}

/// Axis-aligned sampling box in (u, v, p1, p2).
struct SampleBox {
  double u_min = -1, u_max = 1;
  double v_min = -1, v_max = 1;
  double p1_min = -1, p1_max = 1;
  double p2_min = -1, p2_max = 1;

  SampleBox inflated(double frac) const {
    auto grow = [frac](double lo, double hi, double& glo, double& ghi) {
      double half = 0.5 * frac * (hi - lo) + 1e-12;
      glo = lo - half;
      ghi = hi + half;
    };
    SampleBox b;
    grow(u_min, u_max, b.u_min, b.u_max);
    grow(v_min, v_max, b.v_min, b.v_max);
    grow(p1_min, p1_max, b.p1_min, b.p1_max);
    grow(p2_min, p2_max, b.p2_min, b.p2_max);
    return b;
  }
};

struct P1SymmetryReport {
  bool pass = true;
  bool equality = true;  // reflection bound held with equality on every sample
  double worst_margin = 0.0;
  std::array<double, 4> witness{};
  Which witness_fn = Which::G;
  int samples = 0;
  SampleBox box;  // the certified box
};

/// Samples the box with p1 < 0 and checks g(u,v,p1,p2) >= g(u,v,-p1,p2) and
/// the same for f. Also reports whether equality held everywhere sampled.
inline P1SymmetryReport check_p1_symmetry(const CoupledRHS& rhs, const SampleBox& box,
                                          int n, std::uint64_t seed = 1) {
  P1SymmetryReport rep;
  rep.box = box;
  rep.samples = n;
  HaltonBox4 seq(seed);
  double p1_hi = std::min(box.p1_max, 0.0);
  double p1_lo = std::min(box.p1_min, p1_hi);
  double scale = 0.0;
  double eq_span = 0.0;
  bool first = true;
  for (int s = 0; s < n; ++s) {
    auto q = seq.next();
    double u = box.u_min + q[0] * (box.u_max - box.u_min);
    double v = box.v_min + q[1] * (box.v_max - box.v_min);
    double p1 = p1_lo + q[2] * (p1_hi - p1_lo);
    if (p1 >= 0.0) p1 = -1e-9 * (1.0 + std::abs(p1_lo));
    double p2 = box.p2_min + q[3] * (box.p2_max - box.p2_min);
    for (Which which : {Which::G, Which::F}) {
      const auto& fn = which == Which::G ? rhs.g_value : rhs.f_value;
      double lhs = fn(u, v, p1, p2);
      double rhsv = fn(u, v, -p1, p2);
      double margin = lhs - rhsv;
      scale = std::max({scale, std::abs(lhs), std::abs(rhsv)});
      eq_span = std::max(eq_span, std::abs(margin));
      if (first || margin < rep.worst_margin) rep.worst_margin = margin;
      first = false;
      if (rep.pass && margin < -1e-12 * (1.0 + scale)) {
        rep.pass = false;
        rep.witness = {u, v, p1, p2};
        rep.witness_fn = which;
      }
    }
  }
  rep.equality = eq_span <= 1e-12 * (1.0 + scale);
  return rep;
}

struct CrossMonotonicityReport {
  bool pass = true;
  double g_dv_min = 0.0, g_dv_max = 0.0;  // range of dg/dv over the box
  double f_du_min = 0.0, f_du_max = 0.0;  // range of df/du over the box
  std::array<double, 4> witness{};
  Which witness_fn = Which::G;
  int samples = 0;
  SampleBox box;
};

/// Samples dg/dv and df/du over the box and checks strict positivity.
/// The reported maxima feed the barrier certificate's coupling bounds.
inline CrossMonotonicityReport check_cross_monotonicity(const CoupledRHS& rhs,
                                                        const SampleBox& box, int n,
                                                        std::uint64_t seed = 1) {
  CrossMonotonicityReport rep;
  rep.box = box;
  rep.samples = n;
  HaltonBox4 seq(seed);
  bool first = true;
  for (int s = 0; s < n; ++s) {
    auto q = seq.next();
    double u = box.u_min + q[0] * (box.u_max - box.u_min);
    double v = box.v_min + q[1] * (box.v_max - box.v_min);
    double p1 = box.p1_min + q[2] * (box.p1_max - box.p1_min);
    double p2 = box.p2_min + q[3] * (box.p2_max - box.p2_min);
    double gdv = eval_rhs(rhs, Which::G, u, v, p1, p2).partials.dv;
    double fdu = eval_rhs(rhs, Which::F, u, v, p1, p2).partials.du;
    if (first) {
      rep.g_dv_min = rep.g_dv_max = gdv;
      rep.f_du_min = rep.f_du_max = fdu;
      first = false;
    }
    if (rep.pass && gdv <= 0.0) {
      rep.pass = false;
      rep.witness = {u, v, p1, p2};
      rep.witness_fn = Which::G;
    } else if (rep.pass && fdu <= 0.0) {
      rep.pass = false;
      rep.witness = {u, v, p1, p2};
      rep.witness_fn = Which::F;
    }
    rep.g_dv_min = std::min(rep.g_dv_min, gdv);
    rep.g_dv_max = std::max(rep.g_dv_max, gdv);
    rep.f_du_min = std::min(rep.f_du_min, fdu);
    rep.f_du_max = std::max(rep.f_du_max, fdu);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// builtin pairs
// ---------------------------------------------------------------------------

inline CoupledRHS make_rhs(const std::string& name) {
  CoupledRHS r;
  r.name = name;
  if (name == "constant") {
    r.g_value = r.f_value = [](double, double, double, double) { return -1.0; };
    r.g_partials = r.f_partials = [](double, double, double, double) { return Partials{}; };
  } else if (name == "linear") {
    r.g_value = [](double u, double v, double, double) { return v - u - 1.0; };
    r.f_value = [](double u, double v, double, double) { return u - v - 1.0; };
    r.g_partials = [](double, double, double, double) { return Partials{-1, 1, 0, 0}; };
    r.f_partials = [](double, double, double, double) { return Partials{1, -1, 0, 0}; };
  } else if (name == "exp") {
    r.g_value = [](double, double v, double, double) { return -std::exp(-v); };
    r.f_value = [](double u, double, double, double) { return -std::exp(-u); };
    r.g_partials = [](double, double v, double, double) {
      return Partials{0, std::exp(-v), 0, 0};
    };
    r.f_partials = [](double u, double, double, double) {
      return Partials{std::exp(-u), 0, 0, 0};
    };
  } else if (name == "negexp") {
    r.g_value = [](double, double v, double, double) { return -std::exp(v); };
    r.f_value = [](double u, double, double, double) { return -std::exp(u); };
    r.g_partials = [](double, double v, double, double) {
      return Partials{0, -std::exp(v), 0, 0};
    };
    r.f_partials = [](double u, double, double, double) {
      return Partials{-std::exp(u), 0, 0, 0};
    };
  } else if (name == "decoupled") {
    r.g_value = [](double u, double, double p1, double p2) {
      return -u * u - p1 * p1 - p2 * p2;
    };
    r.f_value = [](double, double v, double p1, double p2) {
      return -v * v - p1 * p1 - p2 * p2;
    };
    r.g_partials = [](double u, double, double p1, double p2) {
      return Partials{-2 * u, 0, -2 * p1, -2 * p2};
    };
    r.f_partials = [](double, double v, double p1, double p2) {
      return Partials{0, -2 * v, -2 * p1, -2 * p2};
    };
  } else if (name == "coupled-linear") {
    r.g_value = [](double u, double v, double p1, double p2) {
      return v - u - u * u - p1 * p1 - p2 * p2;
    };
    r.f_value = [](double u, double v, double p1, double p2) {
      return u - v - v * v - p1 * p1 - p2 * p2;
    };
    r.g_partials = [](double u, double, double p1, double p2) {
      return Partials{-1 - 2 * u, 1, -2 * p1, -2 * p2};
    };
    r.f_partials = [](double, double v, double p1, double p2) {
      return Partials{1, -1 - 2 * v, -2 * p1, -2 * p2};
    };
  } else if (name == "coupled-exp") {
    r.g_value = [](double u, double v, double p1, double p2) {
      return v - u + std::expm1(v - u) - u * u - p1 * p1 - p2 * p2;
    };
    r.f_value = [](double u, double v, double p1, double p2) {
      return u - v + std::expm1(u - v) - v * v - p1 * p1 - p2 * p2;
    };
    r.g_partials = [](double u, double v, double p1, double p2) {
      double e = std::exp(v - u);
      return Partials{-1 - e - 2 * u, 1 + e, -2 * p1, -2 * p2};
    };
    r.f_partials = [](double u, double v, double p1, double p2) {
      double e = std::exp(u - v);
      return Partials{1 + e, -1 - e - 2 * v, -2 * p1, -2 * p2};
    };
  } else {
    throw ConfigError("unknown rhs: " + name);
  }
  return r;
}

/// Coefficient family g = a0 + a1 u + a2 v + a3 e^{-v} + a4 (p1^2 + p2^2)
/// with f the u<->v mirrored counterpart.
inline CoupledRHS make_coefficient_rhs(const std::array<double, 5>& a) {
  CoupledRHS r;
  r.name = "custom";
  r.g_value = [a](double u, double v, double p1, double p2) {
    return a[0] + a[1] * u + a[2] * v + a[3] * std::exp(-v) + a[4] * (p1 * p1 + p2 * p2);
  };
  r.f_value = [a](double u, double v, double p1, double p2) {
    return a[0] + a[1] * v + a[2] * u + a[3] * std::exp(-u) + a[4] * (p1 * p1 + p2 * p2);
  };
  r.g_partials = [a](double, double v, double p1, double p2) {
    return Partials{a[1], a[2] - a[3] * std::exp(-v), 2 * a[4] * p1, 2 * a[4] * p2};
  };
  r.f_partials = [a](double u, double, double p1, double p2) {
    return Partials{a[2] - a[3] * std::exp(-u), a[1], 2 * a[4] * p1, 2 * a[4] * p2};
  };
  return r;
}

}  // namespace ma
