#pragma once

#include <cmath>

namespace ma {

/// Symmetric 2x2 matrix, typically a Hessian value at a node.
struct Sym2 {
  double a11 = 0.0;
  double a12 = 0.0;
  double a22 = 0.0;

  friend Sym2 operator+(const Sym2& a, const Sym2& b) {
    return {a.a11 + b.a11, a.a12 + b.a12, a.a22 + b.a22};
  }
  friend Sym2 operator-(const Sym2& a, const Sym2& b) {
    return {a.a11 - b.a11, a.a12 - b.a12, a.a22 - b.a22};
  }
  friend Sym2 operator*(double s, const Sym2& m) {
    return {s * m.a11, s * m.a12, s * m.a22};
  }
};

/// Determinant, computed in one canonical expression everywhere.
inline double det2(const Sym2& m) { return m.a11 * m.a22 - m.a12 * m.a12; }

/// Cofactor (adjugate): det(M) * M^-1, which for 2x2 is linear in M and
/// defined for singular M as well.
inline Sym2 cof2(const Sym2& m) { return {m.a22, -m.a12, m.a11}; }

/// Frobenius pairing with the off-diagonal counted twice, i.e. the
/// contraction sum_{i,j} M_ij D_ij for symmetric matrices.
inline double frob2(const Sym2& m, const Sym2& d) {
  return m.a11 * d.a11 + 2.0 * m.a12 * d.a12 + m.a22 * d.a22;
}

/// Coefficients of the exact determinant-difference linearization:
/// det2(A) - det2(B) == frob2(det_diff_coeffs(A,B), A - B) identically,
/// because the 2x2 adjugate is linear in its argument.
inline Sym2 det_diff_coeffs(const Sym2& a, const Sym2& b) {
  return 0.5 * (cof2(a) + cof2(b));
}

/// Positive definiteness via the leading-minor test.
inline bool is_spd(const Sym2& m) { return m.a11 > 0.0 && det2(m) > 0.0; }

/// Eigenvalues, ascending. Used by tests as an independent SPD oracle.
inline void eigvals2(const Sym2& m, double& lo, double& hi) {
  double half_tr = 0.5 * (m.a11 + m.a22);
  double rad = std::sqrt(0.25 * (m.a11 - m.a22) * (m.a11 - m.a22) + m.a12 * m.a12);
  lo = half_tr - rad;
  hi = half_tr + rad;
}

}  // namespace ma
