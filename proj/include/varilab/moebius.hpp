#pragma once

#include <Eigen/Dense>
#include <vector>

#include "varilab/curvature.hpp"
#include "varilab/monotonicity.hpp"
#include "varilab/varifold.hpp"

// Moebius inversion f_p(x) = (x-p)/|x-p|^2 + p of a discrete varifold, the
// closed-form mean curvature transformation law, and the numerical checks of
// the inversion identities.

namespace varilab {

// R_x(w) = w - 2 <w,x> x / |x|^2, the reflection across direction x.
inline Vec reflection(const Vec& x_dir, const Vec& w) {
  double n2 = x_dir.squaredNorm();
  if (n2 <= 0.0) throw Error(ErrorKind::ZeroDirection, "reflection direction is zero");
  return w - (2.0 * w.dot(x_dir) / n2) * x_dir;
}

struct InversionResult {
  DiscreteVarifold image;            // f_p applied facewise to surviving faces
  Mat transformed_H;                 // per image vertex, closed-form law from source H
  Mat recomputed_H;                  // per image vertex, cotangent operator on the image
  std::vector<bool> image_valid;     // interior image vertices with both H fields meaningful
  std::vector<int> source_vertex;    // image vertex -> source vertex index
  std::vector<int> image_vertex;     // source vertex -> image vertex index or -1
  double excised_mass = 0.0;
  Vec pole;
  double excision_radius = 0.0;
};

inline Vec invert_point(const Vec& x, const Vec& p) {
  Vec d = x - p;
  return d / d.squaredNorm() + p;
}

// Faces within distance eta of p are excised and their measure recorded.
// transformed_H uses the source curvature field and the perpendicular part of
// x - p against the source vertex tangent planes.
inline InversionResult invert(const DiscreteVarifold& v, const Vec& p, double eta) {
  InversionResult out;
  out.pole = p;
  out.excision_radius = eta;

  const int nf = v.num_faces();
  std::vector<char> keep(nf, 1);
  KahanSum excised;
  for (int f = 0; f < nf; ++f) {
    Vec a = v.vertices.row(v.faces(f, 0)), b = v.vertices.row(v.faces(f, 1)),
        c = v.vertices.row(v.faces(f, 2));
    if (eta > 0.0 && point_triangle_sqdist(p, a, b, c) < eta * eta) {
      keep[f] = 0;
      excised.add(v.multiplicity(f) * v.face_area(f));
    }
  }
  out.excised_mass = excised.value();
  if (out.excised_mass > 0.1 * v.total_measure)
    throw Error(ErrorKind::ExcisionTooLarge, "excised mass exceeds 10% of total");

  std::vector<int> vmap(v.num_vertices(), -1);
  int nkeep = 0;
  for (int f = 0; f < nf; ++f)
    if (keep[f]) ++nkeep;
  if (nkeep == 0) throw Error(ErrorKind::ExcisionTooLarge, "no faces survive excision");
  Eigen::MatrixXi F2(nkeep, 3);
  int fi = 0;
  std::vector<int> src;
  for (int f = 0; f < nf; ++f) {
    if (!keep[f]) continue;
    for (int c = 0; c < 3; ++c) {
      int idx = v.faces(f, c);
      if (vmap[idx] < 0) {
        vmap[idx] = static_cast<int>(src.size());
        src.push_back(idx);
      }
      F2(fi, c) = vmap[idx];
    }
    ++fi;
  }
  Eigen::VectorXi theta2(nkeep);
  fi = 0;
  for (int f = 0; f < nf; ++f)
    if (keep[f]) theta2(fi++) = v.multiplicity(f);

  Mat V2(static_cast<int>(src.size()), v.ambient_dim);
  for (int i = 0; i < static_cast<int>(src.size()); ++i) {
    Vec x = v.vertices.row(src[i]);
    double d2 = (x - p).squaredNorm();
    if (d2 == 0.0) throw Error(ErrorKind::PoleOnMesh, "pole coincides with a surviving vertex");
    V2.row(i) = invert_point(x, p).transpose();
  }
  out.image = build(std::move(V2), std::move(F2), std::move(theta2), v.ambient_dim);
  out.source_vertex = std::move(src);
  out.image_vertex = std::move(vmap);

  if (eta > 0.0) {
    double gate = eta / 10.0;
    for (int f = 0; f < out.image.num_faces(); ++f) {
      Vec a = v.vertices.row(out.source_vertex[out.image.faces(f, 0)]);
      Vec b = v.vertices.row(out.source_vertex[out.image.faces(f, 1)]);
      Vec c = v.vertices.row(out.source_vertex[out.image.faces(f, 2)]);
      if (point_triangle_sqdist(p, a, b, c) < gate * gate)
        throw Error(ErrorKind::PoleOnMesh, "pole within eta/10 of a surviving face");
    }
  }

  // closed-form law at surviving vertices
  CurvatureField srcH = mean_curvature(v);
  auto tangents = vertex_tangent_bases(v);
  const int ni = out.image.num_vertices();
  out.transformed_H = Mat::Zero(ni, v.ambient_dim);
  for (int i = 0; i < ni; ++i) {
    int s = out.source_vertex[i];
    Vec x = Vec(v.vertices.row(s)) - p;
    double n2 = x.squaredNorm();
    Vec xperp = perpendicular_part(tangents[s], x);
    Vec field = Vec(srcH.mean_curvature.row(s)) + (4.0 / n2) * xperp;
    out.transformed_H.row(i) = (n2 * reflection(x, field)).transpose();
  }

  CurvatureField imgH = mean_curvature(out.image);
  out.recomputed_H = imgH.mean_curvature;
  out.image_valid.assign(ni, false);
  for (int i = 0; i < ni; ++i)
    out.image_valid[i] = imgH.valid[i] && srcH.valid[out.source_vertex[i]];
  return out;
}

// 1/4 ∫ |H + 4 (x-p)perp/|x-p|^2|^2 dmu by face-centroid quadrature. This is
// the Willmore energy of the inverted varifold expressed on the source side;
// H per face is averaged over its unmasked vertices, so flat sheets around a
// junction integrate exactly.
inline double transformed_energy_face_quadrature(const DiscreteVarifold& v,
                                                 const CurvatureField& field, const Vec& p) {
  KahanSum e;
  for (int f = 0; f < v.num_faces(); ++f) {
    Vec a = v.vertices.row(v.faces(f, 0)), b = v.vertices.row(v.faces(f, 1)),
        c = v.vertices.row(v.faces(f, 2));
    Vec h = Vec::Zero(v.ambient_dim);
    int nvalid = 0;
    for (int ci = 0; ci < 3; ++ci) {
      int idx = v.faces(f, ci);
      if (field.valid[idx]) {
        h += Vec(field.mean_curvature.row(idx));
        ++nvalid;
      }
    }
    if (nvalid == 0) continue;
    h /= nvalid;
    Vec cen = (a + b + c) / 3.0 - p;
    Mat B = face_tangent_basis(a, b, c);
    Vec perp = perpendicular_part(B, cen);
    double integ = (h + 4.0 / cen.squaredNorm() * perp).squaredNorm();
    e.add(v.multiplicity(f) * v.face_area(f) * integ);
  }
  return 0.25 * e.value();
}

struct InversionIdentityReport {
  double lhs_energy = 0.0;            // ∫ |H~|^2 dmu~ recomputed on the image
  double rhs_energy = 0.0;            // ∫ |H + 4 xperp/|x|^2|^2 dmu on the source
  double energy_minus_density = 0.0;  // ∫ |H|^2 dmu - 16 pi Theta(mu, p)
  double theta_infinity = 0.0;        // large-radius density slope of the image
  double theta_at_p = 0.0;            // density limit of the source at p
  double excised_mass = 0.0;
};

// Both energy routes integrate the same surviving region: source vertices are
// counted only when their image vertex is interior on the image mesh.
inline InversionIdentityReport verify_inversion_identities(const DiscreteVarifold& v,
                                                           int pole_vertex, double eta) {
  Vec p = v.vertices.row(pole_vertex);
  InversionResult inv = invert(v, p, eta);

  CurvatureField srcH = mean_curvature(v);
  auto tangents = vertex_tangent_bases(v);
  KahanSum lhs, rhs;
  for (int i = 0; i < inv.image.num_vertices(); ++i) {
    if (!inv.image_valid[i]) continue;
    int s = inv.source_vertex[i];
    lhs.add(Vec(inv.recomputed_H.row(i)).squaredNorm() * inv.image.vertex_area(i));
    Vec x = Vec(v.vertices.row(s)) - p;
    Vec xperp = perpendicular_part(tangents[s], x);
    Vec field = Vec(srcH.mean_curvature.row(s)) + (4.0 / x.squaredNorm()) * xperp;
    rhs.add(field.squaredNorm() * v.vertex_area(s));
  }

  InversionIdentityReport rep;
  rep.lhs_energy = lhs.value();
  rep.rhs_energy = rhs.value();
  rep.excised_mass = inv.excised_mass;

  KahanSum h2;
  for (int i = 0; i < v.num_vertices(); ++i)
    if (srcH.valid[i]) h2.add(Vec(srcH.mean_curvature.row(i)).squaredNorm() * v.vertex_area(i));

  DensityProfile source_prof = density_profile(v, p, default_radius_schedule(v, diameter(v).value));
  rep.theta_at_p = source_prof.limit_estimate;
  rep.energy_minus_density = h2.value() - 16.0 * kPi * rep.theta_at_p;

  // Theta(mu~, infinity): LSQ slope of mu~(B_rho) against pi rho^2 over the
  // top three radii, capped at half the image extent about p.
  double ext = 0.0;
  for (int i = 0; i < inv.image.num_vertices(); ++i)
    ext = std::max(ext, (Vec(inv.image.vertices.row(i)) - p).norm());
  std::vector<double> rhos;
  for (int k = 0; k < 3; ++k) rhos.push_back(0.5 * ext * std::pow(0.8, 2 - k));
  Mat X(3, 2);
  Vec y(3);
  for (int k = 0; k < 3; ++k) {
    X(k, 0) = kPi * rhos[k] * rhos[k];
    X(k, 1) = 1.0;
    y(k) = ball_mass(inv.image, {p, rhos[k]});
  }
  Vec coef = (X.transpose() * X).ldlt().solve(X.transpose() * y);
  rep.theta_infinity = coef(0);
  return rep;
}

}  // namespace varilab
