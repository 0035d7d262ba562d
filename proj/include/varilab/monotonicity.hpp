#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <vector>

#include "varilab/curvature.hpp"
#include "varilab/varifold.hpp"

// Density ratios Theta(mu,x,r) = mu(B(x,r))/(pi r^2), Simon-type monotone
// quantities, the Li-Yau bound check, and diameter bounds under the 32-pi
// energy hypothesis.

namespace varilab {

struct DensityProfile {
  Vec center;
  std::vector<double> radii;
  std::vector<double> ratios;
  std::vector<double> remainder;  // cumulative ∫_{B_r} |H/4 + (x-p)perp/|x-p|^2|^2 dmu
  double limit_estimate = 0.0;    // weighted extrapolation of ratios to r -> 0
  bool radius_warning = false;    // smallest radius under 2x local edge length
};

struct DiameterCheck {
  bool lower_ok = false;          // diam >= (1/7) sqrt(mu / 4pi)
  double upper_constant = 0.0;    // measured diam / sqrt(mu)
  double diam = 0.0;
};

struct MonotonicityReport {
  double willmore = 0.0;
  double max_density_estimate = 0.0;
  int argmax_vertex = -1;
  double li_yau_slack = 0.0;      // W - 4 pi * max density
  DiameterCheck diameter_check;
};

// 8 logarithmically spaced radii between 3x median edge and half the diameter.
inline std::vector<double> default_radius_schedule(const DiscreteVarifold& v, double diam,
                                                   int count = 8) {
  double rmax = 0.5 * diam;
  double rmin = std::min(3.0 * v.median_edge, 0.5 * rmax);
  std::vector<double> rs(count);
  for (int i = 0; i < count; ++i)
    rs[i] = rmin * std::pow(rmax / rmin, count > 1 ? double(i) / (count - 1) : 0.0);
  return rs;
}

namespace detail {

// All ball masses for one center in a single pass over faces. Exact clipping
// on crossing faces, cheap vertex-distance classification elsewhere.
inline std::vector<double> ball_masses(const DiscreteVarifold& v, const Vec& x,
                                       const std::vector<double>& radii) {
  const int nf = v.num_faces();
  Vec dist(v.num_vertices());
  for (int i = 0; i < v.num_vertices(); ++i)
    dist(i) = (v.vertices.row(i).transpose() - x).norm();
  std::vector<double> dmin(nf), dmax(nf), fdiam(nf);
  for (int f = 0; f < nf; ++f) {
    double d0 = dist(v.faces(f, 0)), d1 = dist(v.faces(f, 1)), d2 = dist(v.faces(f, 2));
    dmin[f] = std::min({d0, d1, d2});
    dmax[f] = std::max({d0, d1, d2});
    Vec a = v.vertices.row(v.faces(f, 0)), b = v.vertices.row(v.faces(f, 1)),
        c = v.vertices.row(v.faces(f, 2));
    fdiam[f] = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
  }
  std::vector<double> out(radii.size());
  for (std::size_t k = 0; k < radii.size(); ++k) {
    double r = radii[k];
    KahanSum m;
    for (int f = 0; f < nf; ++f) {
      double th = v.multiplicity(f);
      if (dmax[f] <= r) {
        m.add(th * v.face_area(f));
        continue;
      }
      if (dmin[f] - fdiam[f] >= r) continue;
      Vec a = v.vertices.row(v.faces(f, 0)), b = v.vertices.row(v.faces(f, 1)),
          c = v.vertices.row(v.faces(f, 2));
      if (dmin[f] >= r && point_triangle_sqdist(x, a, b, c) >= r * r) continue;
      m.add(th * ball_triangle_area(x, a, b, c, r));
    }
    out[k] = m.value();
  }
  return out;
}

// Per-vertex remainder integrand |H/4 + (x-p)perp/|x-p|^2|^2; the center
// vertex itself is skipped (its integrand is a limit in the continuum).
inline Vec remainder_integrand(const DiscreteVarifold& v, const CurvatureField& field,
                               const std::vector<Mat>& tangents, const Vec& p) {
  Vec e = Vec::Zero(v.num_vertices());
  for (int i = 0; i < v.num_vertices(); ++i) {
    if (!field.valid[i]) continue;
    Vec d = Vec(v.vertices.row(i)) - p;
    double r2 = d.squaredNorm();
    if (r2 <= 1e-30) continue;
    Vec perp = perpendicular_part(tangents[i], d);
    e(i) = (0.25 * Vec(field.mean_curvature.row(i)) + perp / r2).squaredNorm();
  }
  return e;
}

inline double extrapolate_limit(const std::vector<double>& radii,
                                const std::vector<double>& ratios) {
  // linear-in-r weighted least squares over the three smallest radii,
  // weights proportional to 1/r
  int m = std::min<int>(3, static_cast<int>(radii.size()));
  if (m == 1) return ratios[0];
  Mat X(m, 2);
  Vec y(m), w(m);
  for (int i = 0; i < m; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = radii[i];
    y(i) = ratios[i];
    w(i) = 1.0 / radii[i];
  }
  Mat Xw = w.asDiagonal() * X;
  Vec coef = (X.transpose() * Xw).ldlt().solve(X.transpose() * (w.asDiagonal() * y));
  return coef(0);
}

}  // namespace detail

inline DensityProfile density_profile(const DiscreteVarifold& v, const Vec& x,
                                      const std::vector<double>& radii,
                                      const CurvatureField* field = nullptr,
                                      const std::vector<Mat>* tangents = nullptr) {
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1]))
      throw Error(ErrorKind::InvalidSpec, "radii must be strictly increasing");
  if (radii.empty() || radii.front() <= 0)
    throw Error(ErrorKind::InvalidSpec, "radii must be positive");

  DensityProfile prof;
  prof.center = x;
  prof.radii = radii;
  auto masses = detail::ball_masses(v, x, radii);
  prof.ratios.resize(radii.size());
  for (std::size_t k = 0; k < radii.size(); ++k)
    prof.ratios[k] = masses[k] / (kPi * radii[k] * radii[k]);
  prof.limit_estimate = detail::extrapolate_limit(radii, prof.ratios);

  // warning-grade resolution check at the nearest vertex
  int nearest = 0;
  double best = std::numeric_limits<double>::max();
  for (int i = 0; i < v.num_vertices(); ++i) {
    double d = (v.vertices.row(i).transpose() - x).squaredNorm();
    if (d < best) {
      best = d;
      nearest = i;
    }
  }
  prof.radius_warning = radii.front() < 2.0 * local_edge_length(v, nearest);

  if (field && tangents) {
    Vec e = detail::remainder_integrand(v, *field, *tangents, x);
    prof.remainder.resize(radii.size());
    for (std::size_t k = 0; k < radii.size(); ++k) {
      KahanSum s;
      for (int i = 0; i < v.num_vertices(); ++i) {
        double d = (v.vertices.row(i).transpose() - x).norm();
        if (d <= radii[k] && e(i) > 0) s.add(e(i) * field->vertex_area(i));
      }
      prof.remainder[k] = s.value();
    }
  }
  return prof;
}

// Theta(mu,p) = (1/16pi) ∫|H|^2 dmu - (1/pi) ∫ |H/4 + (x-p)perp/|x-p|^2|^2 dmu,
// evaluated at a mesh vertex; cross-validates the profile extrapolation.
inline double density_at_point_via_energy(const DiscreteVarifold& v, int p_vertex,
                                          const CurvatureField& field,
                                          const std::vector<Mat>& tangents) {
  Vec p = v.vertices.row(p_vertex);
  Vec e = detail::remainder_integrand(v, field, tangents, p);
  KahanSum h2, rem;
  for (int i = 0; i < v.num_vertices(); ++i) {
    if (!field.valid[i]) continue;
    h2.add(Vec(field.mean_curvature.row(i)).squaredNorm() * field.vertex_area(i));
    if (i != p_vertex) rem.add(e(i) * field.vertex_area(i));
  }
  return h2.value() / (16.0 * kPi) - rem.value() / kPi;
}

inline double density_at_point_via_energy(const DiscreteVarifold& v, int p_vertex) {
  CurvatureField field = mean_curvature(v);
  auto tangents = vertex_tangent_bases(v);
  return density_at_point_via_energy(v, p_vertex, field, tangents);
}

// Candidate centers for the max-density scan: every vertex up to a cap, then
// a deterministic stride subsample that always keeps junction vertices.
inline std::vector<int> density_scan_vertices(const DiscreteVarifold& v, int cap = 4096) {
  std::vector<int> out;
  int nv = v.num_vertices();
  if (nv <= cap) {
    out.resize(nv);
    for (int i = 0; i < nv; ++i) out[i] = i;
    return out;
  }
  int stride = (nv + cap - 1) / cap;
  for (int i = 0; i < nv; i += stride) out.push_back(i);
  for (int i = 0; i < nv; ++i)
    if (v.tags[i] == VertexTag::Junction && i % stride != 0) out.push_back(i);
  std::sort(out.begin(), out.end());
  return out;
}

inline MonotonicityReport li_yau_check(const DiscreteVarifold& v) {
  // closed meshes only, up to truncation rims of negligible measure (the
  // inverted-prism surfaces omit a small cap near the pole image)
  if (v.has_boundary()) {
    KahanSum bd;
    for (int i = 0; i < v.num_vertices(); ++i)
      if (v.tags[i] == VertexTag::Boundary) bd.add(v.vertex_area(i));
    if (bd.value() > 0.01 * v.total_measure)
      throw Error(ErrorKind::InvalidSpec, "li_yau_check requires a closed mesh");
  }
  MonotonicityReport rep;
  CurvatureField field = mean_curvature(v);
  rep.willmore = willmore_energy(v, field).willmore;

  double diam = diameter(v).value;
  rep.max_density_estimate = -1.0;
  // truncation rims contaminate nearby profiles at every admissible radius
  // (the hole eats ball mass and the linear extrapolation amplifies it), so
  // centers within the rim's influence radius are not density candidates
  std::vector<int> boundary;
  for (int i = 0; i < v.num_vertices(); ++i)
    if (v.tags[i] == VertexTag::Boundary) boundary.push_back(i);
  auto near_rim = [&](int i, double reach) {
    Vec x = v.vertices.row(i);
    for (int b : boundary)
      if ((Vec(v.vertices.row(b)) - x).norm() < reach) return true;
    return false;
  };
  for (int i : density_scan_vertices(v)) {
    if (!boundary.empty() && near_rim(i, 12.0 * local_edge_length(v, i))) continue;
    // radii track the local edge scale and hug the resolution floor: on graded
    // meshes (inverted prisms) the surface has features a few local edges away
    // from junction points near the pole image, and the linear extrapolation
    // amplifies any profile curvature the radii let in
    double h = local_edge_length(v, i);
    double rmin = 2.0 * h;
    double rmax = std::min(0.5 * diam, 8.2 * h);
    if (rmax <= rmin) rmax = 2.0 * rmin;
    std::vector<double> radii(8);
    for (int k = 0; k < 8; ++k) radii[k] = rmin * std::pow(rmax / rmin, k / 7.0);
    auto masses = detail::ball_masses(v, v.vertices.row(i), radii);
    std::vector<double> ratios(radii.size());
    for (std::size_t k = 0; k < radii.size(); ++k)
      ratios[k] = masses[k] / (kPi * radii[k] * radii[k]);
    double est = detail::extrapolate_limit(radii, ratios);
    if (est > rep.max_density_estimate) {
      rep.max_density_estimate = est;
      rep.argmax_vertex = i;
    }
  }
  rep.li_yau_slack = rep.willmore - 4.0 * kPi * rep.max_density_estimate;
  if (rep.li_yau_slack < -0.05 * rep.willmore)
    throw Error(ErrorKind::LiYauViolation,
                "W - 4 pi Theta_max = " + std::to_string(rep.li_yau_slack) +
                    " is below -5% of W; mesh or curvature field is inconsistent");

  double mu = v.total_measure;
  rep.diameter_check.diam = diam;
  rep.diameter_check.lower_ok = diam >= (1.0 / 7.0) * std::sqrt(mu / (4.0 * kPi));
  rep.diameter_check.upper_constant = diam / std::sqrt(mu);
  return rep;
}

// Diameter bounds under the 32-pi hypothesis. The gate carries a 1% guard band since
// the discrete ∫|H|^2 of a theta=2 sphere lands just under 32 pi.
inline DiameterCheck diameter_bounds_check(const DiscreteVarifold& v) {
  CurvatureField field = mean_curvature(v);
  KahanSum h2;
  for (int i = 0; i < v.num_vertices(); ++i)
    if (field.valid[i]) h2.add(Vec(field.mean_curvature.row(i)).squaredNorm() * field.vertex_area(i));
  if (h2.value() >= 32.0 * kPi * (1.0 - 1e-2))
    throw Error(ErrorKind::HypothesisViolated,
                "∫|H|^2 dmu = " + std::to_string(h2.value()) + " reaches the 32 pi threshold");
  DiameterCheck chk;
  chk.diam = diameter(v).value;
  chk.lower_ok = chk.diam >= (1.0 / 7.0) * std::sqrt(v.total_measure / (4.0 * kPi));
  chk.upper_constant = chk.diam / std::sqrt(v.total_measure);
  return chk;
}

// Discrete shadow of the monotone quantity: r -> Theta(r) + (1/16pi)∫_{B_r}|H|^2
// + (1/2 pi r^2)∫_{B_r} <H, x-p>, nondecreasing in the continuum.
inline std::vector<double> monotone_quantity(const DiscreteVarifold& v,
                                             const CurvatureField& field, const Vec& p,
                                             const std::vector<double>& radii) {
  auto masses = detail::ball_masses(v, p, radii);
  std::vector<double> out(radii.size());
  for (std::size_t k = 0; k < radii.size(); ++k) {
    double r = radii[k];
    KahanSum h2, cross;
    for (int i = 0; i < v.num_vertices(); ++i) {
      if (!field.valid[i]) continue;
      Vec d = Vec(v.vertices.row(i)) - p;
      if (d.norm() > r) continue;
      double a = field.vertex_area(i);
      h2.add(Vec(field.mean_curvature.row(i)).squaredNorm() * a);
      cross.add(Vec(field.mean_curvature.row(i)).dot(d) * a);
    }
    out[k] = masses[k] / (kPi * r * r) + h2.value() / (16.0 * kPi) +
             cross.value() / (2.0 * kPi * r * r);
  }
  return out;
}

}  // namespace varilab
