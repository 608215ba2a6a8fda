// Sign-exact orientation and in-circle predicates: a floating-point fast
// path guarded by a forward error bound, with an exact fallback built on
// error-free transforms and nonoverlapping expansions (Shewchuk's
// arithmetic). Exactness holds for any non-overflowing double inputs, in
// particular all coordinates below 1e7 m.
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace bathykit::detail {

inline constexpr double kEps = 1.1102230246251565e-16;  // 2^-53
inline constexpr double kCcwErrBoundA = (3.0 + 16.0 * kEps) * kEps;
inline constexpr double kIccErrBoundA = (10.0 + 96.0 * kEps) * kEps;

inline void two_sum(double a, double b, double& x, double& y) {
  x = a + b;
  const double bv = x - a;
  const double av = x - bv;
  y = (a - av) + (b - bv);
}

inline void fast_two_sum(double a, double b, double& x, double& y) {
  x = a + b;  // requires |a| >= |b|
  y = b - (x - a);
}

inline void two_prod(double a, double b, double& x, double& y) {
  x = a * b;
  y = std::fma(a, b, -x);
}

/// Nonoverlapping expansion, components in increasing magnitude. The exact
/// predicate fallback is cold, so a heap-backed representation is fine.
class Expansion {
 public:
  void clear() { e_.clear(); }

  /// Adds a scalar, keeping the expansion exact (grow-expansion).
  void add(double b) {
    tmp_.clear();
    double q = b;
    for (double comp : e_) {
      double qn, h;
      two_sum(q, comp, qn, h);
      if (h != 0.0) tmp_.push_back(h);
      q = qn;
    }
    if (q != 0.0 || tmp_.empty()) tmp_.push_back(q);
    e_.swap(tmp_);
  }

  /// Adds s * a * b exactly.
  void add_product(double s, double a, double b) {
    double hi, lo;
    two_prod(a, b, hi, lo);
    add(s * lo);
    add(s * hi);
  }

  /// Adds s * f1 * f2 * f3 * f4 exactly.
  void add_product4(double s, double f1, double f2, double f3, double f4) {
    double hi, lo;
    two_prod(f1, f2, hi, lo);
    double pair[2] = {lo, hi};
    double scaled1[4];
    const int n1 = scale(pair, 2, f3, scaled1);
    double scaled2[8];
    const int n2 = scale(scaled1, n1, f4, scaled2);
    for (int i = 0; i < n2; ++i) add(s * scaled2[i]);
  }

  int sign() const {
    // components are ordered by increasing magnitude; sign of the largest
    // nonzero one is the sign of the total
    for (auto it = e_.rbegin(); it != e_.rend(); ++it) {
      if (*it > 0.0) return 1;
      if (*it < 0.0) return -1;
    }
    return 0;
  }

 private:
  // scale-expansion-zeroelim
  static int scale(const double* e, int elen, double b, double* h) {
    double q, hh;
    two_prod(e[0], b, q, hh);
    int n = 0;
    if (hh != 0.0) h[n++] = hh;
    for (int i = 1; i < elen; ++i) {
      double p1, p0;
      two_prod(e[i], b, p1, p0);
      double sum;
      two_sum(q, p0, sum, hh);
      if (hh != 0.0) h[n++] = hh;
      fast_two_sum(p1, sum, q, hh);
      if (hh != 0.0) h[n++] = hh;
    }
    if (q != 0.0 || n == 0) h[n++] = q;
    return n;
  }

  std::vector<double> e_, tmp_;
};

struct Pt {
  double x, y;
};

inline int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

/// Exact sign of the 2x2 orientation determinant.
inline int orient2d_exact(const Pt& a, const Pt& b, const Pt& c) {
  thread_local Expansion acc;
  acc.clear();
  acc.add_product(+1.0, a.x, b.y);
  acc.add_product(-1.0, a.x, c.y);
  acc.add_product(-1.0, a.y, b.x);
  acc.add_product(+1.0, a.y, c.x);
  acc.add_product(+1.0, b.x, c.y);
  acc.add_product(-1.0, b.y, c.x);
  return acc.sign();
}

/// Sign of orient2d(a, b, c): +1 if c lies left of the directed line a->b
/// (counter-clockwise), -1 right, 0 collinear. Never misclassifies.
inline int orient2d_sign(const Pt& a, const Pt& b, const Pt& c) {
  const double detleft = (a.x - c.x) * (b.y - c.y);
  const double detright = (a.y - c.y) * (b.x - c.x);
  const double det = detleft - detright;
  double detsum;
  if (detleft > 0.0) {
    if (detright <= 0.0) return sign_of(det);
    detsum = detleft + detright;
  } else if (detleft < 0.0) {
    if (detright >= 0.0) return sign_of(det);
    detsum = -detleft - detright;
  } else {
    return sign_of(det);
  }
  const double errbound = kCcwErrBoundA * detsum;
  if (det >= errbound || -det >= errbound) return sign_of(det);
  return orient2d_exact(a, b, c);
}

namespace incircle_detail {

// Adds s * det3 of rows [u v w] with columns (x, y, x^2+y^2) to acc.
inline void add_det3(Expansion& acc, const Pt& u, const Pt& v, const Pt& w,
                     double s) {
  const auto lift_term = [&](double f1, double f2, const Pt& z, double sgn) {
    acc.add_product4(s * sgn, f1, f2, z.x, z.x);
    acc.add_product4(s * sgn, f1, f2, z.y, z.y);
  };
  lift_term(u.x, v.y, w, +1.0);
  lift_term(u.x, w.y, v, -1.0);
  lift_term(u.y, v.x, w, -1.0);
  lift_term(u.y, w.x, v, +1.0);
  lift_term(v.x, w.y, u, +1.0);
  lift_term(v.y, w.x, u, -1.0);
}

}  // namespace incircle_detail

/// Exact sign of the 4x4 in-circle determinant, rows (a, b, c, p), columns
/// (x, y, x^2 + y^2, 1). Positive iff p is strictly inside the circumcircle
/// of the counter-clockwise triangle (a, b, c).
inline int incircle_exact(const Pt& a, const Pt& b, const Pt& c, const Pt& p) {
  thread_local Expansion acc;
  acc.clear();
  incircle_detail::add_det3(acc, b, c, p, -1.0);
  incircle_detail::add_det3(acc, a, c, p, +1.0);
  incircle_detail::add_det3(acc, a, b, p, -1.0);
  incircle_detail::add_det3(acc, a, b, c, +1.0);
  return acc.sign();
}

/// Sign of the in-circle test with a fast filtered path.
inline int incircle_sign(const Pt& a, const Pt& b, const Pt& c, const Pt& p) {
  const double adx = a.x - p.x, ady = a.y - p.y;
  const double bdx = b.x - p.x, bdy = b.y - p.y;
  const double cdx = c.x - p.x, cdy = c.y - p.y;

  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double alift = adx * adx + ady * ady;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double blift = bdx * bdx + bdy * bdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;
  const double clift = cdx * cdx + cdy * cdy;

  const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) +
                     clift * (adxbdy - bdxady);
  const double permanent = (std::fabs(bdxcdy) + std::fabs(cdxbdy)) * alift +
                           (std::fabs(cdxady) + std::fabs(adxcdy)) * blift +
                           (std::fabs(adxbdy) + std::fabs(bdxady)) * clift;
  const double errbound = kIccErrBoundA * permanent;
  if (det > errbound || -det > errbound) return sign_of(det);
  return incircle_exact(a, b, c, p);
}

/// In-circle with symbolic perturbation: exact cocircularity is resolved by
/// nudging every point infinitesimally down the lifting paraboloid, lower
/// vertex index first. This makes the triangulation of cocircular point
/// sets unique: the shared diagonal lands on the lowest-indexed vertices.
inline int incircle_sos(const Pt& a, std::uint32_t ia, const Pt& b,
                        std::uint32_t ib, const Pt& c, std::uint32_t ic,
                        const Pt& p, std::uint32_t ip) {
  const int s = incircle_sign(a, b, c, p);
  if (s != 0) return s;
  // Cofactors of the lifted column, rows (a, b, c, p). Perturbing row r's
  // lift by -eps changes the determinant by -eps * C_r; the smallest vertex
  // index with a nonzero cofactor decides.
  struct RowRef {
    std::uint32_t index;
    int cofactor_sign;
  };
  RowRef rows[4] = {
      {ia, +orient2d_sign(b, c, p)},
      {ib, -orient2d_sign(a, c, p)},
      {ic, +orient2d_sign(a, b, p)},
      {ip, -orient2d_sign(a, b, c)},
  };
  RowRef* order[4] = {&rows[0], &rows[1], &rows[2], &rows[3]};
  for (int i = 1; i < 4; ++i)  // tiny insertion sort by vertex index
    for (int j = i; j > 0 && order[j]->index < order[j - 1]->index; --j)
      std::swap(order[j], order[j - 1]);
  for (const RowRef* r : order)
    if (r->cofactor_sign != 0) return -r->cofactor_sign;
  return 0;  // all four collinear; unreachable for a valid triangle
}

}  // namespace bathykit::detail
