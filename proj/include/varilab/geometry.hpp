#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "varilab/common.hpp"

// Dimension-generic triangle primitives. Faces live in R^n with n >= 3, so
// everything is phrased through edge Gram matrices and tangent-plane
// projections instead of cross products.

namespace varilab {

using Vec = Eigen::VectorXd;
using Vec2 = Eigen::Vector2d;
using Mat = Eigen::MatrixXd;

inline double triangle_area(const Vec& a, const Vec& b, const Vec& c) {
  Vec e1 = b - a, e2 = c - a;
  double g11 = e1.squaredNorm(), g22 = e2.squaredNorm(), g12 = e1.dot(e2);
  double s = g11 * g22 - g12 * g12;
  return 0.5 * std::sqrt(std::max(s, 0.0));
}

// Interior angle at `a`.
inline double triangle_angle(const Vec& a, const Vec& b, const Vec& c) {
  Vec u = b - a, v = c - a;
  double cosv = u.dot(v);
  double sinv = 2.0 * triangle_area(a, b, c);
  return std::atan2(sinv, cosv);
}

inline double cotangent_at(const Vec& a, const Vec& b, const Vec& c) {
  Vec u = b - a, v = c - a;
  double sinv = 2.0 * triangle_area(a, b, c);
  if (sinv <= 0.0) return 0.0;
  return u.dot(v) / sinv;
}

// Orthonormal 2-frame spanning the face plane, columns follow the (b-a, c-a)
// orientation.
inline Mat face_tangent_basis(const Vec& a, const Vec& b, const Vec& c) {
  Vec e1 = b - a, e2 = c - a;
  Mat B(a.size(), 2);
  Vec t1 = e1 / e1.norm();
  Vec t2 = e2 - t1.dot(e2) * t1;
  double n2 = t2.norm();
  if (n2 <= 0.0) throw Error(ErrorKind::DegenerateFace, "collinear triangle in tangent basis");
  B.col(0) = t1;
  B.col(1) = t2 / n2;
  return B;
}

// Component of w orthogonal to the plane spanned by basis B (n x 2, PtP=I).
inline Vec perpendicular_part(const Mat& B, const Vec& w) {
  return w - B * (B.transpose() * w);
}

// Squared distance from point p to triangle abc (exact, any dimension).
inline double point_triangle_sqdist(const Vec& p, const Vec& a, const Vec& b, const Vec& c) {
  Vec e1 = b - a, e2 = c - a, d = p - a;
  double g11 = e1.squaredNorm(), g22 = e2.squaredNorm(), g12 = e1.dot(e2);
  double r1 = e1.dot(d), r2 = e2.dot(d);
  double det = g11 * g22 - g12 * g12;
  double u = 0.0, v = 0.0;
  if (det > 0.0) {
    u = (g22 * r1 - g12 * r2) / det;
    v = (g11 * r2 - g12 * r1) / det;
  }
  if (u < 0 || v < 0 || u + v > 1) {
    // clamp to the three edges
    auto seg = [](const Vec& q, const Vec& s0, const Vec& s1) {
      Vec e = s1 - s0;
      double t = e.squaredNorm() > 0 ? std::clamp((q - s0).dot(e) / e.squaredNorm(), 0.0, 1.0) : 0.0;
      return (q - (s0 + t * e)).squaredNorm();
    };
    return std::min({seg(p, a, b), seg(p, b, c), seg(p, c, a)});
  }
  Vec foot = a + u * e1 + v * e2;
  return (p - foot).squaredNorm();
}

namespace detail {

// Signed area contribution of one directed edge (a -> b) against the disk of
// radius rho centered at the origin: chord pieces contribute the triangle
// (0,a',b'), arc pieces the circular sector. Summing over a CCW polygon
// boundary yields area(polygon ∩ disk) by Green's theorem.
inline double disk_edge_contribution(const Vec2& a, const Vec2& b, double rho) {
  auto cross2 = [](const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); };
  auto piece = [&](const Vec2& p, const Vec2& q, bool inside) {
    if (inside) return 0.5 * cross2(p, q);
    double ang = std::atan2(cross2(p, q), p.dot(q));
    return 0.5 * rho * rho * ang;
  };
  Vec2 d = b - a;
  double dd = d.squaredNorm();
  if (dd == 0.0) return 0.0;
  // |a + t d|^2 = rho^2
  double pb = a.dot(d) / dd;
  double q = (a.squaredNorm() - rho * rho) / dd;
  double disc = pb * pb - q;
  std::array<double, 4> ts{0.0, 1.0, 1.0, 1.0};
  int nt = 2;
  if (disc > 0.0) {
    double sq = std::sqrt(disc);
    for (double t : {-pb - sq, -pb + sq})
      if (t > 0.0 && t < 1.0) ts[nt++] = t;
  }
  std::sort(ts.begin(), ts.begin() + nt);
  double total = 0.0;
  for (int i = 0; i + 1 < nt; ++i) {
    double t0 = ts[i], t1 = ts[i + 1];
    if (t1 <= t0) continue;
    Vec2 p = a + t0 * d, r = a + t1 * d;
    Vec2 m = a + 0.5 * (t0 + t1) * d;
    total += piece(p, r, m.squaredNorm() <= rho * rho);
  }
  return total;
}

}  // namespace detail

// Area of triangle ∩ disk, both in the plane, disk centered at the origin.
// Exact circular-segment integration (no subdivision parameter).
inline double disk_triangle_area(const Vec2& a, const Vec2& b, const Vec2& c, double rho) {
  if (rho <= 0.0) return 0.0;
  double signed_area =
      0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
  double s = signed_area >= 0 ? 1.0 : -1.0;
  double total = detail::disk_edge_contribution(a, s >= 0 ? b : c, rho);
  if (s >= 0) {
    total += detail::disk_edge_contribution(b, c, rho);
    total += detail::disk_edge_contribution(c, a, rho);
  } else {
    total += detail::disk_edge_contribution(c, b, rho);
    total += detail::disk_edge_contribution(b, a, rho);
  }
  return std::max(total, 0.0);
}

// Area of the part of triangle abc (in R^n) inside the ball B(x, r).
inline double ball_triangle_area(const Vec& x, const Vec& a, const Vec& b, const Vec& c, double r) {
  Mat B = face_tangent_basis(a, b, c);
  Vec d = x - a;
  Vec2 xc = B.transpose() * d;
  double h2 = (d - B * xc).squaredNorm();
  double rho2 = r * r - h2;
  if (rho2 <= 0.0) return 0.0;
  Vec2 pa = -xc;
  Vec2 pb = Vec2(B.transpose() * (b - a)) - xc;
  Vec2 pc = Vec2(B.transpose() * (c - a)) - xc;
  return disk_triangle_area(pa, pb, pc, std::sqrt(rho2));
}

// Area of the part of triangle abc inside the half-space {y : <y,u> <= off}.
inline double halfspace_triangle_area(const Vec& u, double off, const Vec& a, const Vec& b,
                                      const Vec& c) {
  std::array<const Vec*, 3> P{&a, &b, &c};
  std::array<double, 3> s;
  for (int i = 0; i < 3; ++i) s[i] = u.dot(*P[i]) - off;
  // collect clipped polygon in barycentric-free fashion: work with points in R^n
  std::array<Vec, 7> poly;
  int np = 0;
  for (int i = 0; i < 3; ++i) {
    int j = (i + 1) % 3;
    if (s[i] <= 0) poly[np++] = *P[i];
    if ((s[i] < 0) != (s[j] < 0) && s[i] != s[j]) {
      double t = s[i] / (s[i] - s[j]);
      if (t > 0 && t < 1) poly[np++] = *P[i] + t * (*P[j] - *P[i]);
    }
  }
  if (np < 3) return 0.0;
  double area = 0.0;
  for (int i = 1; i + 1 < np; ++i) area += triangle_area(poly[0], poly[i], poly[i + 1]);
  return area;
}

// Nearest matrix with orthonormal columns (polar factor), n x 2.
inline Mat polar_orthonormal(const Mat& A) {
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.singularValues().minCoeff() < 1e-8)
    throw Error(ErrorKind::DegenerateFit, "frame average has rank < 2");
  return svd.matrixU() * svd.matrixV().transpose();
}

// Closest 2x2 rotation Q minimizing ||B Q - R||_F (Procrustes with det +1).
inline Eigen::Matrix2d procrustes_rotation(const Eigen::Matrix2d& M) {
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix2d U = svd.matrixU(), V = svd.matrixV();
  Eigen::Matrix2d Q = U * V.transpose();
  if (Q.determinant() < 0) {
    U.col(1) *= -1.0;
    Q = U * V.transpose();
  }
  return Q;
}

// Deterministic random rotation (QR of a seeded Gaussian matrix, det +1).
inline Mat random_rotation(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Mat G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = gauss(rng);
  Eigen::HouseholderQR<Mat> qr(G);
  Mat Q = qr.householderQ();
  Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i)
    if (R(i, i) < 0) Q.col(i) *= -1.0;
  if (Q.determinant() < 0) Q.col(0) *= -1.0;
  return Q;
}

// Signed solid angle of triangle (a,b,c) in R^3 seen from the origin
// (Van Oosterom–Strackee).
inline double signed_solid_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                 const Eigen::Vector3d& c) {
  double num = a.dot(b.cross(c));
  double la = a.norm(), lb = b.norm(), lc = c.norm();
  double den = la * lb * lc + a.dot(b) * lc + a.dot(c) * lb + b.dot(c) * la;
  return 2.0 * std::atan2(num, den);
}

}  // namespace varilab
