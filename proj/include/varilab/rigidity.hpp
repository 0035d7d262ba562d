#pragma once

#include <Eigen/Dense>
#include <deque>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "varilab/curvature.hpp"
#include "varilab/moebius.hpp"
#include "varilab/varifold.hpp"

// The constructive comparison-sphere pipeline: translate a diameter endpoint
// to the origin, invert, fit an orthogonal plane to the inverted mesh, read
// off the sphere through the pole, and measure how far the correspondence is
// from the identity.

namespace varilab {

struct PlaneFit {
  Mat P;               // n x 2, P^T P = I
  Vec offset;          // weighted centroid of the inverted mesh
  Vec foot;            // closest point of the plane to the origin, foot ⟂ P(R^2)
  double residual_sup = 0.0;  // sup dist(x, plane) / (1 + |x - offset|^2)
};

struct ComparisonSphere {
  Vec center;
  double radius = 0.0;
};

struct Correspondence {
  Mat sphere_points;    // q per surviving image vertex (original frame)
  Mat surface_points;   // matching source positions p
  Mat unit_q;           // (q - c)/r
  Mat unit_p;           // (p - c)/r
  std::vector<int> source_vertex;
  double coverage = 0.0;
};

struct RigidityReport {
  double delta = 0.0;
  double sup_deviation = 0.0;
  std::pair<double, double> conformal_log_range{0.0, 0.0};
  double laplace_defect = 0.0;   // ∫ |ΔΦ + 2Φ|^2 over the unit-sphere frame
  double w22_deviation = 0.0;    // L2 of value + gradient + Laplacian of Φ - id
  double coverage = 0.0;
  ComparisonSphere sphere;       // original frame
  std::map<std::string, double> empirical_constants;
  Correspondence correspondence;
};

struct InversionFrame {
  DiscreteVarifold mesh;  // translated so the pole sits at the origin
  int pole_vertex = 0;    // at the origin; the inversion point
  int far_vertex = 0;     // realizes the diameter from the pole
  double diam = 0.0;
};

// Diameter endpoints with lexicographic tie-break; the mesh is translated so
// one endpoint is at the origin and the other realizes d(0, p0) = diam.
inline InversionFrame choose_inversion_point(const DiscreteVarifold& v) {
  DiameterResult d = diameter(v);
  InversionFrame frame;
  frame.far_vertex = d.i;
  frame.pole_vertex = d.j;
  frame.diam = d.value;
  frame.mesh = translated(v, -Vec(v.vertices.row(frame.pole_vertex)));
  return frame;
}

namespace rigidity_detail {

// Per-face tangent frames aligned by parallel transport along a BFS tree
// from the largest face, then averaged with theta * area weights.
inline Mat transported_frame_average(const DiscreteVarifold& m) {
  const int nf = m.num_faces();
  std::map<std::pair<int, int>, std::vector<int>> edge_faces;
  for (int f = 0; f < nf; ++f)
    for (int e = 0; e < 3; ++e) {
      int a = m.faces(f, e), b = m.faces(f, (e + 1) % 3);
      edge_faces[{std::min(a, b), std::max(a, b)}].push_back(f);
    }
  std::vector<std::vector<int>> nbr(nf);
  for (auto& [e, fs] : edge_faces)
    for (std::size_t i = 0; i < fs.size(); ++i)
      for (std::size_t j = 0; j < fs.size(); ++j)
        if (i != j) nbr[fs[i]].push_back(fs[j]);

  int seed = 0;
  for (int f = 1; f < nf; ++f)
    if (m.face_area(f) > m.face_area(seed)) seed = f;

  std::vector<Mat> aligned(nf);
  std::vector<char> seen(nf, 0);
  auto base = [&](int f) {
    return face_tangent_basis(m.vertices.row(m.faces(f, 0)), m.vertices.row(m.faces(f, 1)),
                              m.vertices.row(m.faces(f, 2)));
  };
  std::deque<int> queue{seed};
  aligned[seed] = base(seed);
  seen[seed] = 1;
  Mat A = Mat::Zero(m.ambient_dim, 2);
  double wtot = 0.0;
  while (!queue.empty()) {
    int f = queue.front();
    queue.pop_front();
    double w = m.multiplicity(f) * m.face_area(f);
    A += w * aligned[f];
    wtot += w;
    for (int g : nbr[f]) {
      if (seen[g]) continue;
      seen[g] = 1;
      Mat B = base(g);
      Eigen::Matrix2d M = B.transpose() * aligned[f];
      aligned[g] = B * procrustes_rotation(M);
      queue.push_back(g);
    }
  }
  // disconnected components fall back to their own unaligned frames
  for (int f = 0; f < nf; ++f) {
    if (seen[f]) continue;
    double w = m.multiplicity(f) * m.face_area(f);
    A += w * base(f);
    wtot += w;
  }
  return A / wtot;
}

}  // namespace rigidity_detail

// The plane is anchored at `anchor` when given (the image of the far diameter
// endpoint, so the comparison sphere passes through both the pole and that
// point); otherwise at the 1/(1+|x|^2)^2-weighted centroid, which mirrors the
// pullback of the spherical measure and stays finite on the unbounded image.
inline PlaneFit fit_plane(const DiscreteVarifold& inverted,
                          const std::optional<Vec>& anchor = std::nullopt) {
  if (inverted.num_faces() == 0) throw Error(ErrorKind::DegenerateFit, "empty inverted mesh");
  PlaneFit fit;
  Mat A = rigidity_detail::transported_frame_average(inverted);
  fit.P = polar_orthonormal(A);

  if (anchor) {
    fit.offset = *anchor;
  } else {
    Vec num = Vec::Zero(inverted.ambient_dim);
    KahanSum den;
    std::vector<KahanSum> nacc(inverted.ambient_dim);
    for (int i = 0; i < inverted.num_vertices(); ++i) {
      Vec x = inverted.vertices.row(i);
      double w = inverted.vertex_area(i) / std::pow(1.0 + x.squaredNorm(), 2);
      for (int d = 0; d < inverted.ambient_dim; ++d) nacc[d].add(w * x(d));
      den.add(w);
    }
    for (int d = 0; d < inverted.ambient_dim; ++d) num(d) = nacc[d].value();
    fit.offset = num / den.value();
  }
  fit.foot = fit.offset - fit.P * (fit.P.transpose() * fit.offset);

  double sup = 0.0;
  for (int i = 0; i < inverted.num_vertices(); ++i) {
    Vec x = inverted.vertices.row(i);
    double dist = perpendicular_part(fit.P, x - fit.offset).norm();
    sup = std::max(sup, dist / (1.0 + (x - fit.offset).squaredNorm()));
  }
  fit.residual_sup = sup;
  return fit;
}

inline PlaneFit fit_plane(const InversionResult& inverted) { return fit_plane(inverted.image); }

// S_r = image of the fitted plane under the inversion about the origin:
// a sphere through the pole with center v'/(2|v'|^2) and radius 1/(2|v'|).
inline ComparisonSphere comparison_sphere(const PlaneFit& fit) {
  double nv = fit.foot.norm();
  if (nv <= 1e-10)
    throw Error(ErrorKind::PlaneThroughPole, "fitted plane passes through the inversion pole");
  ComparisonSphere s;
  s.center = fit.foot / (2.0 * nv * nv);
  s.radius = 1.0 / (2.0 * nv);
  return s;
}

// Realizes the correspondence vertexwise: the inverted image of each source
// vertex is projected orthogonally onto the plane and carried back through
// the inversion onto S_r. The surjectivity argument becomes two gates: the
// source must stay inside a fixed tubular neighborhood of the sphere, and the
// pulled-back triangulation must cover it.
inline Correspondence build_correspondence(const DiscreteVarifold& source,
                                           const InversionResult& inv, const PlaneFit& fit,
                                           const ComparisonSphere& sphere) {
  const int ni = inv.image.num_vertices();
  const int n = source.ambient_dim;
  Correspondence corr;
  corr.sphere_points.resize(ni, n);
  corr.surface_points.resize(ni, n);
  corr.unit_q.resize(ni, n);
  corr.unit_p.resize(ni, n);
  corr.source_vertex = inv.source_vertex;
  for (int i = 0; i < ni; ++i) {
    Vec x = inv.image.vertices.row(i);
    Vec y = fit.foot + fit.P * (fit.P.transpose() * x);
    Vec q = y / y.squaredNorm();
    Vec p = source.vertices.row(inv.source_vertex[i]);
    corr.sphere_points.row(i) = q.transpose();
    corr.surface_points.row(i) = p.transpose();
    corr.unit_q.row(i) = ((q - sphere.center) / sphere.radius).transpose();
    corr.unit_p.row(i) = ((p - sphere.center) / sphere.radius).transpose();
  }

  double max_tube = 0.0;
  for (int i = 0; i < ni; ++i)
    max_tube = std::max(max_tube, std::abs(Vec(corr.unit_p.row(i)).norm() - 1.0));
  if (max_tube > 0.5)
    throw Error(ErrorKind::CoverageGap,
                "surface leaves the tubular neighborhood of the comparison sphere (max "
                "normalized distance " + std::to_string(max_tube) + ")");

  // signed solid-angle coverage in the 3-space spanned by the plane and foot
  Mat E(n, 3);
  E.col(0) = fit.P.col(0);
  E.col(1) = fit.P.col(1);
  E.col(2) = fit.foot / fit.foot.norm();
  KahanSum omega;
  for (int f = 0; f < inv.image.num_faces(); ++f) {
    Eigen::Vector3d a = E.transpose() * Vec(corr.unit_q.row(inv.image.faces(f, 0)));
    Eigen::Vector3d b = E.transpose() * Vec(corr.unit_q.row(inv.image.faces(f, 1)));
    Eigen::Vector3d c = E.transpose() * Vec(corr.unit_q.row(inv.image.faces(f, 2)));
    omega.add(signed_solid_angle(a, b, c));
  }
  corr.coverage = std::abs(omega.value()) / (4.0 * kPi);
  if (corr.coverage < 0.95)
    throw Error(ErrorKind::CoverageGap,
                "sphere coverage " + std::to_string(corr.coverage) + " below 95%");
  return corr;
}

inline RigidityReport rigidity_metrics(const DiscreteVarifold& source, const InversionResult& inv,
                                       const ComparisonSphere& sphere, Correspondence corr,
                                       double delta) {
  RigidityReport rep;
  rep.delta = delta;
  rep.sphere = sphere;
  rep.coverage = corr.coverage;

  const int ni = inv.image.num_vertices();
  Mat e = corr.unit_p - corr.unit_q;
  for (int i = 0; i < ni; ++i)
    rep.sup_deviation = std::max(rep.sup_deviation, Vec(e.row(i)).norm());

  // sphere-side triangulation with pullback connectivity; degenerate images
  // are dropped rather than rejected
  std::vector<int> fkeep;
  for (int f = 0; f < inv.image.num_faces(); ++f) {
    Vec a = corr.unit_q.row(inv.image.faces(f, 0)), b = corr.unit_q.row(inv.image.faces(f, 1)),
        c = corr.unit_q.row(inv.image.faces(f, 2));
    if (triangle_area(a, b, c) > 1e-13) fkeep.push_back(f);
  }
  Eigen::MatrixXi Fq(static_cast<int>(fkeep.size()), 3);
  Eigen::VectorXi th(static_cast<int>(fkeep.size()));
  for (std::size_t k = 0; k < fkeep.size(); ++k) {
    Fq.row(static_cast<int>(k)) = inv.image.faces.row(fkeep[k]);
    th(static_cast<int>(k)) = inv.image.multiplicity(fkeep[k]);
  }
  DiscreteVarifold qmesh = build(corr.unit_q, Fq, th, source.ambient_dim);

  std::vector<bool> mvalid(ni, false);
  for (int i = 0; i < ni; ++i)
    mvalid[i] = qmesh.tags[i] == VertexTag::Interior && qmesh.vertex_area(i) > 0 &&
                !qmesh.vertex_faces[i].empty();

  Mat lap_phi = cotan_laplacian_apply(qmesh, corr.unit_p);
  Mat lap_e = cotan_laplacian_apply(qmesh, e);
  KahanSum defect, l2, h1, l2lap;
  for (int i = 0; i < ni; ++i) {
    if (!mvalid[i]) continue;
    double a = qmesh.vertex_area(i);
    defect.add((Vec(lap_phi.row(i)) + 2.0 * Vec(corr.unit_p.row(i))).squaredNorm() * a);
    l2.add(Vec(e.row(i)).squaredNorm() * a);
    l2lap.add(Vec(lap_e.row(i)).squaredNorm() * a);
  }
  // gradient of Phi - id per face by affine differential
  double logmin = std::numeric_limits<double>::infinity();
  double logmax = -std::numeric_limits<double>::infinity();
  for (int f = 0; f < qmesh.num_faces(); ++f) {
    int i0 = qmesh.faces(f, 0), i1 = qmesh.faces(f, 1), i2 = qmesh.faces(f, 2);
    if (!mvalid[i0] || !mvalid[i1] || !mvalid[i2]) continue;
    Vec a = corr.unit_q.row(i0), b = corr.unit_q.row(i1), c = corr.unit_q.row(i2);
    Mat B = face_tangent_basis(a, b, c);
    Eigen::Matrix2d Y;
    Y.col(0) = B.transpose() * (b - a);
    Y.col(1) = B.transpose() * (c - a);
    Mat D(2, e.cols());
    D.row(0) = e.row(i1) - e.row(i0);
    D.row(1) = e.row(i2) - e.row(i0);
    Mat G = Y.transpose().inverse() * D;  // 2 x n gradient in the face frame
    double area = qmesh.face_area(f) * qmesh.multiplicity(f);
    h1.add(G.squaredNorm() * area);
    double ap = triangle_area(Vec(corr.unit_p.row(i0)), Vec(corr.unit_p.row(i1)),
                              Vec(corr.unit_p.row(i2)));
    if (ap > 0) {
      double lc = 0.5 * std::log(ap / qmesh.face_area(f));
      logmin = std::min(logmin, lc);
      logmax = std::max(logmax, lc);
    }
  }
  rep.laplace_defect = defect.value();
  rep.w22_deviation = l2.value() + h1.value() + l2lap.value();
  rep.conformal_log_range = {logmin, logmax};
  rep.correspondence = std::move(corr);

  if (delta > 0) {
    rep.empirical_constants["sup_deviation_over_delta"] = rep.sup_deviation / delta;
    rep.empirical_constants["max_log_conformal_over_delta"] =
        std::max(std::abs(logmin), std::abs(logmax)) / delta;
    rep.empirical_constants["sqrt_laplace_defect_over_delta"] =
        std::sqrt(rep.laplace_defect) / delta;
    rep.empirical_constants["sqrt_w22_over_delta"] = std::sqrt(rep.w22_deviation) / delta;
  }
  return rep;
}

struct RigidityOptions {
  double target_mass = 4.0 * kPi;
  double eta_factor = 2.5;  // excision radius in units of the local edge length
};

// normalize -> translate diameter endpoint to origin -> invert -> fit ->
// sphere -> unit frame metrics. Aborts (PlaneThroughPole, CoverageGap) are
// expected outcomes for out-of-hypothesis inputs.
inline RigidityReport run_rigidity_pipeline(const DiscreteVarifold& v,
                                            const RigidityOptions& opt = {}) {
  DiscreteVarifold vn = normalize_mass(v, opt.target_mass);
  double delta = delta_tolerance(vn);
  InversionFrame frame = choose_inversion_point(vn);
  // excision capped at a fixed fraction of the diameter so coarse meshes on
  // strongly non-spherical inputs reach the hypothesis gates instead of the
  // excision guard
  double eta = std::min(opt.eta_factor * local_edge_length(frame.mesh, frame.pole_vertex),
                        frame.diam / 10.0);
  InversionResult inv = invert(frame.mesh, Vec::Zero(vn.ambient_dim), eta);
  int far_image = inv.image_vertex[frame.far_vertex];
  if (far_image < 0)
    throw Error(ErrorKind::CoverageGap, "far diameter endpoint was excised");
  PlaneFit fit = fit_plane(inv.image, Vec(inv.image.vertices.row(far_image)));
  ComparisonSphere sphere = comparison_sphere(fit);
  Correspondence corr = build_correspondence(frame.mesh, inv, fit, sphere);
  return rigidity_metrics(frame.mesh, inv, sphere, std::move(corr), delta);
}

}  // namespace varilab
