#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "varilab/moebius.hpp"
#include "varilab/varifold.hpp"

// Deterministic generators for the surfaces the acceptance battery needs.

namespace varilab {

enum class ZooKind {
  Icosphere,
  PerturbedSphere,
  Ellipsoid,
  Torus,
  YPrism,
  DoubleBubble,
  MultiplicitySphere,
};

inline const char* zoo_kind_name(ZooKind k) {
  switch (k) {
    case ZooKind::Icosphere: return "icosphere";
    case ZooKind::PerturbedSphere: return "perturbed_sphere";
    case ZooKind::Ellipsoid: return "ellipsoid";
    case ZooKind::Torus: return "torus";
    case ZooKind::YPrism: return "y_prism";
    case ZooKind::DoubleBubble: return "double_bubble";
    case ZooKind::MultiplicitySphere: return "multiplicity_sphere";
  }
  return "icosphere";
}

inline ZooKind zoo_kind_from_name(const std::string& s) {
  for (ZooKind k : {ZooKind::Icosphere, ZooKind::PerturbedSphere, ZooKind::Ellipsoid,
                    ZooKind::Torus, ZooKind::YPrism, ZooKind::DoubleBubble,
                    ZooKind::MultiplicitySphere})
    if (s == zoo_kind_name(k)) return k;
  throw Error(ErrorKind::InvalidSpec, "unknown zoo kind '" + s + "'");
}

struct ZooSpec {
  ZooKind kind = ZooKind::Icosphere;
  int subdivisions = 4;       // icosphere family
  double radius = 1.0;
  int harmonic_l = 2, harmonic_m = 0;
  double amplitude = 0.05;    // perturbed sphere
  double semi_axes[3] = {1.0, 1.0, 1.0};
  double torus_R = std::sqrt(2.0), torus_r = 1.0;
  int torus_nu = 64, torus_nv = 156;
  double half_length = 20.0;  // y_prism extent along the junction line
  double truncation = 20.0;   // y_prism extent along each sheet
  double base_edge = 0.05;    // y_prism grading seed, spacing grows away from the junction
  double grading_ratio = 1.12;
  Eigen::Vector3d pole = Eigen::Vector3d(std::cos(kPi / 6.0), std::sin(kPi / 6.0), 0.0);
  int multiplicity = 2;       // multiplicity_sphere
  unsigned seed = 0;          // reserved for vertex jitter; 0 = none
};

// ---------------------------------------------------------------------------
// icosphere family

namespace zoo_detail {

inline void icosahedron(Mat& V, Eigen::MatrixXi& F) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  V.resize(12, 3);
  V << -1, t, 0, 1, t, 0, -1, -t, 0, 1, -t, 0, 0, -1, t, 0, 1, t, 0, -1, -t, 0, 1, -t, t, 0, -1,
      t, 0, 1, -t, 0, -1, -t, 0, 1;
  V.rowwise().normalize();
  F.resize(20, 3);
  F << 0, 11, 5, 0, 5, 1, 0, 1, 7, 0, 7, 10, 0, 10, 11, 1, 5, 9, 5, 11, 4, 11, 10, 2, 10, 7, 6,
      7, 1, 8, 3, 9, 4, 3, 4, 2, 3, 2, 6, 3, 6, 8, 3, 8, 9, 4, 9, 5, 2, 4, 11, 6, 2, 10, 8, 6, 7,
      9, 8, 1;
}

inline void subdivide_project(Mat& V, Eigen::MatrixXi& F) {
  std::map<std::pair<int, int>, int> midpoint;
  std::vector<Eigen::Vector3d> verts;
  verts.reserve(V.rows() * 4);
  for (int i = 0; i < V.rows(); ++i) verts.push_back(V.row(i));
  auto mid = [&](int a, int b) {
    auto key = std::make_pair(std::min(a, b), std::max(a, b));
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    Eigen::Vector3d m = (verts[a] + verts[b]).normalized();
    int idx = static_cast<int>(verts.size());
    verts.push_back(m);
    midpoint[key] = idx;
    return idx;
  };
  Eigen::MatrixXi F2(F.rows() * 4, 3);
  for (int f = 0; f < F.rows(); ++f) {
    int a = F(f, 0), b = F(f, 1), c = F(f, 2);
    int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
    F2.row(4 * f + 0) << a, ab, ca;
    F2.row(4 * f + 1) << b, bc, ab;
    F2.row(4 * f + 2) << c, ca, bc;
    F2.row(4 * f + 3) << ab, bc, ca;
  }
  V.resize(static_cast<int>(verts.size()), 3);
  for (std::size_t i = 0; i < verts.size(); ++i) V.row(static_cast<int>(i)) = verts[i];
  F = std::move(F2);
}

inline void unit_icosphere(int subdiv, Mat& V, Eigen::MatrixXi& F) {
  icosahedron(V, F);
  for (int s = 0; s < subdiv; ++s) subdivide_project(V, F);
}

}  // namespace zoo_detail

// Real spherical harmonic, orthonormal on the unit sphere.
inline double real_spherical_harmonic(int l, int m, double theta, double phi) {
  int am = std::abs(m);
  if (am > l) throw Error(ErrorKind::InvalidSpec, "|m| must not exceed l");
  double fac = 1.0;
  for (int k = l - am + 1; k <= l + am; ++k) fac *= k;
  double norm = std::sqrt((2.0 * l + 1.0) / (4.0 * kPi) / fac);
  double p = std::assoc_legendre(l, am, std::cos(theta));
  if (m == 0) return norm * p;
  double trig = m > 0 ? std::cos(am * phi) : std::sin(am * phi);
  return std::sqrt(2.0) * norm * p * trig;
}

// ---------------------------------------------------------------------------
// torus and prism

namespace zoo_detail {

inline void torus_grid(double R, double r, int nu, int nv, Mat& V, Eigen::MatrixXi& F) {
  V.resize(nu * nv, 3);
  for (int i = 0; i < nu; ++i) {
    double th = 2.0 * kPi * i / nu;
    for (int j = 0; j < nv; ++j) {
      double ph = 2.0 * kPi * j / nv;
      V.row(i * nv + j) << (R + r * std::cos(th)) * std::cos(ph),
          (R + r * std::cos(th)) * std::sin(ph), r * std::sin(th);
    }
  }
  F.resize(2 * nu * nv, 3);
  int fi = 0;
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      int a = i * nv + j, b = ((i + 1) % nu) * nv + j;
      int c = ((i + 1) % nu) * nv + (j + 1) % nv, d = i * nv + (j + 1) % nv;
      F.row(fi++) << a, b, c;
      F.row(fi++) << a, c, d;
    }
  }
}

inline std::vector<double> graded_axis(double extent, double h0, double ratio) {
  std::vector<double> xs{0.0};
  double h = h0;
  while (xs.back() < extent) {
    xs.push_back(std::min(xs.back() + h, extent));
    h *= ratio;
  }
  return xs;
}

// Three half-planes meeting along the z-axis at 120 degrees (rays at 90, 210
// and 330 degrees). The junction row of vertices is shared by all sheets.
inline void y_prism_mesh(double half_length, double trunc, double h0, double ratio, Mat& V,
                         Eigen::MatrixXi& F) {
  auto ts = graded_axis(trunc, h0, ratio);
  auto zs_half = graded_axis(half_length, h0, ratio);
  std::vector<double> zs;
  for (auto it = zs_half.rbegin(); it != zs_half.rend(); ++it) zs.push_back(-*it);
  for (std::size_t i = 1; i < zs_half.size(); ++i) zs.push_back(zs_half[i]);
  const int nt = static_cast<int>(ts.size()), nz = static_cast<int>(zs.size());
  const double angles[3] = {kPi / 2.0, kPi * 7.0 / 6.0, kPi * 11.0 / 6.0};

  std::vector<Eigen::Vector3d> verts;
  for (int iz = 0; iz < nz; ++iz) verts.emplace_back(0.0, 0.0, zs[iz]);
  std::vector<Eigen::Vector3i> faces;
  for (int s = 0; s < 3; ++s) {
    Eigen::Vector2d u(std::cos(angles[s]), std::sin(angles[s]));
    std::vector<int> prev(nz), cur(nz);
    for (int iz = 0; iz < nz; ++iz) prev[iz] = iz;  // junction row
    for (int it = 1; it < nt; ++it) {
      for (int iz = 0; iz < nz; ++iz) {
        cur[iz] = static_cast<int>(verts.size());
        verts.emplace_back(ts[it] * u.x(), ts[it] * u.y(), zs[iz]);
      }
      for (int iz = 0; iz + 1 < nz; ++iz) {
        faces.emplace_back(prev[iz], cur[iz], cur[iz + 1]);
        faces.emplace_back(prev[iz], cur[iz + 1], prev[iz + 1]);
      }
      std::swap(prev, cur);
    }
  }
  V.resize(static_cast<int>(verts.size()), 3);
  for (std::size_t i = 0; i < verts.size(); ++i) V.row(static_cast<int>(i)) = verts[i];
  F.resize(static_cast<int>(faces.size()), 3);
  for (std::size_t i = 0; i < faces.size(); ++i) F.row(static_cast<int>(i)) = faces[i];
}

}  // namespace zoo_detail

namespace zoo_detail {

// seeded vertex jitter, 5% of the mean edge length per coordinate
inline void apply_jitter(Mat& V, const Eigen::MatrixXi& F, unsigned seed) {
  if (seed == 0) return;
  KahanSum len;
  for (int f = 0; f < F.rows(); ++f)
    for (int e = 0; e < 3; ++e)
      len.add((V.row(F(f, e)) - V.row(F(f, (e + 1) % 3))).norm());
  double scale = 0.05 * len.value() / (3.0 * F.rows());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int i = 0; i < V.rows(); ++i)
    for (int d = 0; d < V.cols(); ++d) V(i, d) += scale * uni(rng);
}

}  // namespace zoo_detail

inline DiscreteVarifold generate(const ZooSpec& spec) {
  Mat V;
  Eigen::MatrixXi F;
  Eigen::VectorXi theta;
  switch (spec.kind) {
    case ZooKind::Icosphere:
    case ZooKind::MultiplicitySphere: {
      if (spec.subdivisions < 0 || spec.subdivisions > 8)
        throw Error(ErrorKind::InvalidSpec, "subdivision level out of range");
      zoo_detail::unit_icosphere(spec.subdivisions, V, F);
      V *= spec.radius;
      int k = spec.kind == ZooKind::MultiplicitySphere ? spec.multiplicity : 1;
      if (k < 1) throw Error(ErrorKind::InvalidSpec, "multiplicity must be >= 1");
      theta = Eigen::VectorXi::Constant(F.rows(), k);
      break;
    }
    case ZooKind::PerturbedSphere: {
      zoo_detail::unit_icosphere(spec.subdivisions, V, F);
      for (int i = 0; i < V.rows(); ++i) {
        Eigen::Vector3d u = V.row(i);
        double th = std::acos(std::clamp(u.z(), -1.0, 1.0));
        double phi = std::atan2(u.y(), u.x());
        double y = real_spherical_harmonic(spec.harmonic_l, spec.harmonic_m, th, phi);
        V.row(i) = spec.radius * (1.0 + spec.amplitude * y) * u;
      }
      break;
    }
    case ZooKind::Ellipsoid: {
      zoo_detail::unit_icosphere(spec.subdivisions, V, F);
      for (int d = 0; d < 3; ++d) {
        if (!(spec.semi_axes[d] > 0))
          throw Error(ErrorKind::InvalidSpec, "semi-axes must be positive");
        V.col(d) *= spec.semi_axes[d];
      }
      break;
    }
    case ZooKind::Torus: {
      if (!(spec.torus_R > spec.torus_r && spec.torus_r > 0))
        throw Error(ErrorKind::InvalidSpec, "torus requires R > r > 0");
      if (spec.torus_nu < 8 || spec.torus_nv < 8)
        throw Error(ErrorKind::InvalidSpec, "torus resolution too small");
      zoo_detail::torus_grid(spec.torus_R, spec.torus_r, spec.torus_nu, spec.torus_nv, V, F);
      break;
    }
    case ZooKind::YPrism: {
      if (!(spec.half_length > 0 && spec.truncation > 0 && spec.base_edge > 0))
        throw Error(ErrorKind::InvalidSpec, "prism extents must be positive");
      zoo_detail::y_prism_mesh(spec.half_length, spec.truncation, spec.base_edge,
                               spec.grading_ratio, V, F);
      break;
    }
    case ZooKind::DoubleBubble: {
      ZooSpec prism = spec;
      prism.kind = ZooKind::YPrism;
      DiscreteVarifold y = generate(prism);
      // pole off the prism: inversion carries R x Y to three caps meeting at
      // 120 degrees along the image of the junction line
      return invert(y, Vec(spec.pole), 0.0).image;
    }
  }
  if (V.rows() == 0) throw Error(ErrorKind::InvalidSpec, "unhandled zoo kind");
  zoo_detail::apply_jitter(V, F, spec.seed);
  return build(std::move(V), std::move(F), std::move(theta), 3);
}

// One-variable integral for the Willmore energy of a torus of revolution,
// W = (pi/2) ∫ (1/r + cos t/(R + r cos t))^2 r (R + r cos t) dt.
inline double torus_willmore_oracle(double R, double r, int n = 1 << 14) {
  KahanSum s;
  double h = 2.0 * kPi / n;
  auto f = [&](double t) {
    double q = R + r * std::cos(t);
    double H = 1.0 / r + std::cos(t) / q;
    return H * H * r * q;
  };
  // composite Simpson on the periodic integrand
  for (int i = 0; i < n; ++i) {
    double a = i * h;
    s.add(h / 6.0 * (f(a) + 4.0 * f(a + 0.5 * h) + f(a + h)));
  }
  return 0.25 * 2.0 * kPi * s.value();
}

struct AnalyticReference {
  std::optional<double> mass, willmore, max_density, diameter;
};

inline AnalyticReference analytic_reference(const ZooSpec& spec) {
  AnalyticReference ref;
  double R = spec.radius;
  switch (spec.kind) {
    case ZooKind::Icosphere:
      ref.mass = 4.0 * kPi * R * R;
      ref.willmore = 4.0 * kPi;
      ref.max_density = 1.0;
      ref.diameter = 2.0 * R;
      return ref;
    case ZooKind::MultiplicitySphere:
      ref.mass = 4.0 * kPi * R * R * spec.multiplicity;
      ref.willmore = 4.0 * kPi * spec.multiplicity;
      ref.max_density = spec.multiplicity;
      ref.diameter = 2.0 * R;
      return ref;
    case ZooKind::Torus:
      ref.mass = 4.0 * kPi * kPi * spec.torus_R * spec.torus_r;
      ref.willmore = torus_willmore_oracle(spec.torus_R, spec.torus_r);
      ref.max_density = 1.0;
      ref.diameter = 2.0 * (spec.torus_R + spec.torus_r);
      return ref;
    case ZooKind::DoubleBubble:
      ref.willmore = 6.0 * kPi;
      ref.max_density = 1.5;
      return ref;
    case ZooKind::YPrism:
      ref.mass = 3.0 * 2.0 * spec.half_length * spec.truncation;
      ref.willmore = 0.0;  // flat sheets, stationary junction
      ref.max_density = 1.5;
      return ref;
    default:
      throw Error(ErrorKind::NoReference,
                  std::string("no closed form for kind '") + zoo_kind_name(spec.kind) + "'");
  }
}

}  // namespace varilab
