#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "varilab/common.hpp"
#include "varilab/geometry.hpp"

// Integral 2-varifolds as multiplicity-weighted triangle meshes in R^n.

namespace varilab {

enum class VertexTag : std::uint8_t { Interior, Boundary, Junction };

inline const char* tag_name(VertexTag t) {
  switch (t) {
    case VertexTag::Interior: return "interior";
    case VertexTag::Boundary: return "boundary";
    case VertexTag::Junction: return "junction";
  }
  return "interior";
}

struct BallQuery {
  Vec center;
  double radius = 0.0;
};

struct DiscreteVarifold {
  int ambient_dim = 3;
  Mat vertices;               // V x n
  Eigen::MatrixXi faces;      // F x 3
  Eigen::VectorXi multiplicity;  // F, theta_f >= 1
  std::vector<VertexTag> tags;   // V

  // precomputed at build time
  Vec face_area;              // F, unweighted triangle areas
  Vec vertex_area;            // V, multiplicity-weighted, exact partition of mass
  std::vector<std::vector<int>> vertex_faces;
  double total_measure = 0.0;
  double bbox_diag = 0.0;
  double median_edge = 0.0;

  int num_vertices() const { return static_cast<int>(vertices.rows()); }
  int num_faces() const { return static_cast<int>(faces.rows()); }
  bool has_boundary() const {
    for (auto t : tags)
      if (t == VertexTag::Boundary) return true;
    return false;
  }
  bool has_junction() const {
    for (auto t : tags)
      if (t == VertexTag::Junction) return true;
    return false;
  }
  bool closed() const { return !has_boundary(); }
};

namespace detail {

inline std::map<std::pair<int, int>, int> edge_face_counts(const Eigen::MatrixXi& F) {
  std::map<std::pair<int, int>, int> cnt;
  for (int f = 0; f < F.rows(); ++f) {
    for (int e = 0; e < 3; ++e) {
      int a = F(f, e), b = F(f, (e + 1) % 3);
      cnt[{std::min(a, b), std::max(a, b)}]++;
    }
  }
  return cnt;
}

// Meyer mixed-Voronoi corner areas when the face's vertices are all manifold
// interior; plain barycentric thirds otherwise so the partition of the face
// area stays exact in the presence of junction/boundary corners.
inline void accumulate_vertex_areas(DiscreteVarifold& v) {
  int nv = v.num_vertices();
  std::vector<KahanSum> acc(nv);
  for (int f = 0; f < v.num_faces(); ++f) {
    int i = v.faces(f, 0), j = v.faces(f, 1), k = v.faces(f, 2);
    double th = static_cast<double>(v.multiplicity(f));
    double area = v.face_area(f);
    bool tagged = v.tags[i] != VertexTag::Interior || v.tags[j] != VertexTag::Interior ||
                  v.tags[k] != VertexTag::Interior;
    if (tagged) {
      for (int c : {i, j, k}) acc[c].add(th * area / 3.0);
      continue;
    }
    Vec a = v.vertices.row(i), b = v.vertices.row(j), cpt = v.vertices.row(k);
    double cta = cotangent_at(a, b, cpt);
    double ctb = cotangent_at(b, cpt, a);
    double ctc = cotangent_at(cpt, a, b);
    if (cta >= 0 && ctb >= 0 && ctc >= 0) {
      double lab = (b - a).squaredNorm(), lbc = (cpt - b).squaredNorm(),
             lca = (a - cpt).squaredNorm();
      acc[i].add(th * (lab * ctc + lca * ctb) / 8.0);
      acc[j].add(th * (lab * ctc + lbc * cta) / 8.0);
      acc[k].add(th * (lca * ctb + lbc * cta) / 8.0);
    } else {
      int ob = cta < 0 ? 0 : (ctb < 0 ? 1 : 2);
      int ids[3] = {i, j, k};
      for (int c = 0; c < 3; ++c) acc[ids[c]].add(th * area * (c == ob ? 0.5 : 0.25));
    }
  }
  v.vertex_area.resize(nv);
  for (int i = 0; i < nv; ++i) v.vertex_area(i) = acc[i].value();
}

}  // namespace detail

// Validates and precomputes. Tags are assigned from edge topology
// (junction = edge with >2 incident faces, boundary = edge with 1).
inline DiscreteVarifold build(Mat vertices, Eigen::MatrixXi faces, Eigen::VectorXi multiplicity,
                              int ambient_dim = 3) {
  DiscreteVarifold v;
  if (ambient_dim < 3) throw Error(ErrorKind::InvalidSpec, "ambient dimension must be >= 3");
  if (vertices.cols() != ambient_dim)
    throw Error(ErrorKind::InvalidSpec, "vertex matrix width does not match ambient dimension");
  v.ambient_dim = ambient_dim;
  v.vertices = std::move(vertices);
  v.faces = std::move(faces);
  if (multiplicity.size() == 0) multiplicity = Eigen::VectorXi::Ones(v.faces.rows());
  if (multiplicity.size() != v.faces.rows())
    throw Error(ErrorKind::InvalidSpec, "multiplicity length does not match face count");
  v.multiplicity = std::move(multiplicity);

  int nv = v.num_vertices(), nf = v.num_faces();
  for (int f = 0; f < nf; ++f) {
    int a = v.faces(f, 0), b = v.faces(f, 1), c = v.faces(f, 2);
    if (a < 0 || b < 0 || c < 0 || a >= nv || b >= nv || c >= nv)
      throw Error(ErrorKind::InvalidIndex, "face " + std::to_string(f) + " references invalid vertex");
    if (a == b || b == c || a == c)
      throw Error(ErrorKind::InvalidIndex, "face " + std::to_string(f) + " repeats a vertex");
    if (v.multiplicity(f) < 1)
      throw Error(ErrorKind::NonPositiveMultiplicity,
                  "face " + std::to_string(f) + " has multiplicity " + std::to_string(v.multiplicity(f)));
  }

  Vec lo = v.vertices.colwise().minCoeff();
  Vec hi = v.vertices.colwise().maxCoeff();
  v.bbox_diag = (hi - lo).norm();
  double area_tol = 1e-14 * v.bbox_diag * v.bbox_diag;

  v.face_area.resize(nf);
  std::vector<double> edge_lengths;
  edge_lengths.reserve(3 * nf);
  for (int f = 0; f < nf; ++f) {
    Vec a = v.vertices.row(v.faces(f, 0));
    Vec b = v.vertices.row(v.faces(f, 1));
    Vec c = v.vertices.row(v.faces(f, 2));
    v.face_area(f) = triangle_area(a, b, c);
    if (v.face_area(f) < area_tol)
      throw Error(ErrorKind::DegenerateFace,
                  "face " + std::to_string(f) + " area below tolerance");
    edge_lengths.push_back((b - a).norm());
    edge_lengths.push_back((c - b).norm());
    edge_lengths.push_back((a - c).norm());
  }
  std::nth_element(edge_lengths.begin(), edge_lengths.begin() + edge_lengths.size() / 2,
                   edge_lengths.end());
  v.median_edge = edge_lengths[edge_lengths.size() / 2];

  v.tags.assign(nv, VertexTag::Interior);
  for (const auto& [e, c] : detail::edge_face_counts(v.faces)) {
    if (c == 2) continue;
    VertexTag t = c > 2 ? VertexTag::Junction : VertexTag::Boundary;
    for (int idx : {e.first, e.second}) {
      if (t == VertexTag::Junction || v.tags[idx] == VertexTag::Interior) v.tags[idx] = t;
    }
  }

  v.vertex_faces.assign(nv, {});
  for (int f = 0; f < nf; ++f)
    for (int c = 0; c < 3; ++c) v.vertex_faces[v.faces(f, c)].push_back(f);

  detail::accumulate_vertex_areas(v);

  KahanSum mass;
  for (int f = 0; f < nf; ++f) mass.add(v.multiplicity(f) * v.face_area(f));
  v.total_measure = mass.value();
  if (!(v.total_measure > 0.0) || !std::isfinite(v.total_measure))
    throw Error(ErrorKind::DegenerateFace, "total measure not finite and positive");
  return v;
}

inline double total_mass(const DiscreteVarifold& v) { return v.total_measure; }

// mu(B(x,r)) with exact triangle-ball clipping on crossing faces.
inline double ball_mass(const DiscreteVarifold& v, const BallQuery& q) {
  if (!(q.radius > 0)) throw Error(ErrorKind::InvalidSpec, "ball radius must be positive");
  const double r = q.radius, r2 = r * r;
  Vec dist(v.num_vertices());
  for (int i = 0; i < v.num_vertices(); ++i)
    dist(i) = (v.vertices.row(i).transpose() - q.center).norm();
  KahanSum m;
  for (int f = 0; f < v.num_faces(); ++f) {
    double d0 = dist(v.faces(f, 0)), d1 = dist(v.faces(f, 1)), d2 = dist(v.faces(f, 2));
    double dmin = std::min({d0, d1, d2}), dmax = std::max({d0, d1, d2});
    double th = v.multiplicity(f);
    if (dmax <= r) {
      m.add(th * v.face_area(f));
      continue;
    }
    Vec a = v.vertices.row(v.faces(f, 0)), b = v.vertices.row(v.faces(f, 1)),
        c = v.vertices.row(v.faces(f, 2));
    if (dmin >= r) {
      // all vertices outside; the ball may still poke through the interior
      if (point_triangle_sqdist(q.center, a, b, c) >= r2) continue;
    }
    m.add(th * ball_triangle_area(q.center, a, b, c, r));
  }
  return m.value();
}

// Mass inside {y : <y,u> <= off}; exact polygon clipping.
inline double halfspace_mass(const DiscreteVarifold& v, const Vec& u, double off) {
  KahanSum m;
  for (int f = 0; f < v.num_faces(); ++f) {
    Vec a = v.vertices.row(v.faces(f, 0)), b = v.vertices.row(v.faces(f, 1)),
        c = v.vertices.row(v.faces(f, 2));
    m.add(v.multiplicity(f) * halfspace_triangle_area(u, off, a, b, c));
  }
  return m.value();
}

struct DiameterResult {
  double value = 0.0;
  int i = 0, j = 0;  // attaining pair, i < j, lexicographic tie-break
};

// Max vertex-vertex distance via blocked Gram products.
inline DiameterResult diameter(const DiscreteVarifold& v) {
  const Mat& X = v.vertices;
  const int n = v.num_vertices();
  Vec sq = X.rowwise().squaredNorm();
  DiameterResult best;
  best.value = -1.0;
  const int blk = 512;
  for (int i0 = 0; i0 < n; i0 += blk) {
    int ib = std::min(blk, n - i0);
    for (int j0 = i0; j0 < n; j0 += blk) {
      int jb = std::min(blk, n - j0);
      Mat G = X.middleRows(i0, ib) * X.middleRows(j0, jb).transpose();
      for (int i = 0; i < ib; ++i) {
        int gi = i0 + i;
        for (int j = 0; j < jb; ++j) {
          int gj = j0 + j;
          if (gj <= gi) continue;
          double d2 = sq(gi) + sq(gj) - 2.0 * G(i, j);
          double d = std::sqrt(std::max(d2, 0.0));
          if (d > best.value + 1e-15 ||
              (std::abs(d - best.value) <= 1e-15 &&
               std::make_pair(gi, gj) < std::make_pair(best.i, best.j))) {
            best = {d, gi, gj};
          }
        }
      }
    }
  }
  // re-evaluate the winning pair without the Gram shortcut for full precision
  best.value = (X.row(best.i) - X.row(best.j)).norm();
  return best;
}

// Scales about the mass centroid so total mass hits `target` exactly.
inline DiscreteVarifold normalize_mass(const DiscreteVarifold& v, double target) {
  if (!(v.total_measure > 0)) throw Error(ErrorKind::InvalidSpec, "cannot normalize empty varifold");
  Vec centroid = Vec::Zero(v.ambient_dim);
  {
    std::vector<KahanSum> acc(v.ambient_dim);
    for (int f = 0; f < v.num_faces(); ++f) {
      double w = v.multiplicity(f) * v.face_area(f) / 3.0;
      for (int c = 0; c < 3; ++c) {
        auto row = v.vertices.row(v.faces(f, c));
        for (int d = 0; d < v.ambient_dim; ++d) acc[d].add(w * row(d));
      }
    }
    for (int d = 0; d < v.ambient_dim; ++d) centroid(d) = acc[d].value() / v.total_measure;
  }
  double lambda = std::sqrt(target / v.total_measure);
  Mat V2 = v.vertices;
  for (int i = 0; i < v.num_vertices(); ++i)
    V2.row(i) = centroid.transpose() + lambda * (v.vertices.row(i) - centroid.transpose());
  return build(std::move(V2), v.faces, v.multiplicity, v.ambient_dim);
}

inline DiscreteVarifold translated(const DiscreteVarifold& v, const Vec& t) {
  Mat V2 = v.vertices;
  V2.rowwise() += t.transpose();
  return build(std::move(V2), v.faces, v.multiplicity, v.ambient_dim);
}

// Local edge scale around one vertex (median incident edge length).
inline double local_edge_length(const DiscreteVarifold& v, int vertex) {
  std::vector<double> ls;
  for (int f : v.vertex_faces[vertex]) {
    for (int c = 0; c < 3; ++c) {
      int a = v.faces(f, c), b = v.faces(f, (c + 1) % 3);
      if (a == vertex || b == vertex)
        ls.push_back((v.vertices.row(a) - v.vertices.row(b)).norm());
    }
  }
  if (ls.empty()) return v.median_edge;
  std::nth_element(ls.begin(), ls.begin() + ls.size() / 2, ls.end());
  return ls[ls.size() / 2];
}

}  // namespace varilab
