#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>

#include "varilab/common.hpp"

// Grid verification of the conformal Bochner identity
// Lap(e^{2w}) = -2 sum_a det(D^2 f^a) and its Liouville consequence: the
// Poisson solve with logarithmic far-field data reproduces v up to a constant.

namespace varilab {

struct GridImmersion {
  double half_width = 1.0;  // grid covers [-L, L]^2
  double spacing = 0.0;
  int nodes = 0;            // per side
  int dim = 3;
  Eigen::MatrixXd values;   // nodes*nodes x dim, row index i*nodes + j
  bool analytic = false;

  double x(int i) const { return -half_width + i * spacing; }
  double y(int j) const { return -half_width + j * spacing; }
  int id(int i, int j) const { return i * nodes + j; }
};

struct BochnerReport {
  double residual_l1 = 0.0;        // || Lap_h v + 2 sum det(D2_h f) ||_{l1} * h^2
  double conformal_defect = 0.0;   // max |<f1,f2>| + ||f1|^2 - |f2|^2|
  bool conformal_warning = false;  // defect above 5% of max |Df|^2
  double v_infinity_estimate = 0.0;
  double liouville_spread = 0.0;   // max - min of v - v0 over interior nodes
  double max_rhs = 0.0;            // max |2 sum det|
};

inline GridImmersion make_grid_immersion(
    double L, double h, int dim,
    const std::function<void(double, double, double*)>& chart, bool analytic = true) {
  GridImmersion g;
  g.half_width = L;
  g.spacing = h;
  g.nodes = static_cast<int>(std::lround(2.0 * L / h)) + 1;
  if (g.nodes < 5) throw Error(ErrorKind::GridTooSmall, "grid must be at least 5x5");
  g.dim = dim;
  g.analytic = analytic;
  g.values.resize(g.nodes * g.nodes, dim);
  std::vector<double> buf(dim);
  for (int i = 0; i < g.nodes; ++i)
    for (int j = 0; j < g.nodes; ++j) {
      chart(g.x(i), g.y(j), buf.data());
      for (int d = 0; d < dim; ++d) g.values(g.id(i, j), d) = buf[d];
    }
  if (!g.values.allFinite())
    throw Error(ErrorKind::NumericFailure, "chart produced non-finite samples");
  return g;
}

inline GridImmersion identity_chart(double L, double h) {
  return make_grid_immersion(L, h, 3, [](double x, double y, double* out) {
    out[0] = x; out[1] = y; out[2] = 0.0;
  });
}

inline GridImmersion scaled_plane_chart(double L, double h, double c) {
  return make_grid_immersion(L, h, 3, [c](double x, double y, double* out) {
    out[0] = c * x; out[1] = c * y; out[2] = 0.0;
  });
}

// Inverse stereographic projection onto the unit sphere; conformal with
// e^{2w} = 4 / (1 + x^2 + y^2)^2.
inline GridImmersion stereographic_chart(double L, double h) {
  return make_grid_immersion(L, h, 3, [](double x, double y, double* out) {
    double s = 1.0 + x * x + y * y;
    out[0] = 2.0 * x / s;
    out[1] = 2.0 * y / s;
    out[2] = (x * x + y * y - 1.0) / s;
  });
}

namespace bochner_detail {

struct Stencils {
  Eigen::MatrixXd v;       // nodes x nodes, defined on 1..N-2
  Eigen::MatrixXd source;  // 2 * sum det(D2 f), defined on 1..N-2
  double conformal_defect = 0.0;
  double max_df2 = 0.0;
};

inline Stencils stencils(const GridImmersion& g) {
  const int N = g.nodes, dim = g.dim;
  const double h = g.spacing;
  Stencils st;
  st.v = Eigen::MatrixXd::Zero(N, N);
  st.source = Eigen::MatrixXd::Zero(N, N);
  for (int i = 1; i + 1 < N; ++i) {
    for (int j = 1; j + 1 < N; ++j) {
      double vsum = 0.0, dots = 0.0, n1 = 0.0, n2 = 0.0, det = 0.0;
      for (int d = 0; d < dim; ++d) {
        double fp = g.values(g.id(i + 1, j), d), fm = g.values(g.id(i - 1, j), d);
        double gp = g.values(g.id(i, j + 1), d), gm = g.values(g.id(i, j - 1), d);
        double f0 = g.values(g.id(i, j), d);
        double fx = (fp - fm) / (2 * h), fy = (gp - gm) / (2 * h);
        double fxx = (fp - 2 * f0 + fm) / (h * h);
        double fyy = (gp - 2 * f0 + gm) / (h * h);
        double fxy = (g.values(g.id(i + 1, j + 1), d) - g.values(g.id(i + 1, j - 1), d) -
                      g.values(g.id(i - 1, j + 1), d) + g.values(g.id(i - 1, j - 1), d)) /
                     (4 * h * h);
        vsum += 0.5 * (fx * fx + fy * fy);
        dots += fx * fy;
        n1 += fx * fx;
        n2 += fy * fy;
        det += fxx * fyy - fxy * fxy;
      }
      st.v(i, j) = vsum;
      st.source(i, j) = 2.0 * det;
      st.conformal_defect = std::max(st.conformal_defect, std::abs(dots) + std::abs(n1 - n2));
      st.max_df2 = std::max(st.max_df2, n1 + n2);
    }
  }
  return st;
}

}  // namespace bochner_detail

inline BochnerReport bochner_residual(const GridImmersion& g) {
  const int N = g.nodes;
  const double h = g.spacing;
  auto st = bochner_detail::stencils(g);
  BochnerReport rep;
  rep.conformal_defect = st.conformal_defect;
  rep.conformal_warning = st.conformal_defect > 0.05 * st.max_df2;
  rep.max_rhs = st.source.cwiseAbs().maxCoeff();
  KahanSum l1;
  for (int i = 2; i + 2 < N; ++i)
    for (int j = 2; j + 2 < N; ++j) {
      double lap = (st.v(i + 1, j) + st.v(i - 1, j) + st.v(i, j + 1) + st.v(i, j - 1) -
                    4.0 * st.v(i, j)) /
                   (h * h);
      l1.add(std::abs(lap + st.source(i, j)) * h * h);
    }
  rep.residual_l1 = l1.value();
  KahanSum bavg;
  int cnt = 0;
  for (int i = 1; i + 1 < N; ++i)
    for (int j = 1; j + 1 < N; ++j)
      if (i == 1 || j == 1 || i == N - 2 || j == N - 2) {
        bavg.add(st.v(i, j));
        ++cnt;
      }
  rep.v_infinity_estimate = cnt ? bavg.value() / cnt : 0.0;
  return rep;
}

// Solves Lap v0 = -source with Dirichlet data from the far-field monopole
// v0 ~ (∬ source / 2pi) log(1/|z|); conjugate gradients to 1e-10 relative.
inline Eigen::MatrixXd solve_decay_poisson(const Eigen::MatrixXd& source,
                                           const GridImmersion& g) {
  const int N = g.nodes;
  const double h = g.spacing;
  if (!source.allFinite()) throw Error(ErrorKind::NumericFailure, "poisson source not finite");
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(N, N);
  double mass = source.sum() * h * h;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      if (i == 0 || j == 0 || i == N - 1 || j == N - 1) {
        double r = std::hypot(g.x(i), g.y(j));
        u(i, j) = mass / (2.0 * kPi) * std::log(1.0 / r);
      }

  const int M = N - 2;
  auto apply = [&](const Eigen::MatrixXd& x, Eigen::MatrixXd& out) {
    // (-Lap x) * h^2 on the interior, zero Dirichlet outside
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) {
        double c = 4.0 * x(i, j);
        if (i > 0) c -= x(i - 1, j);
        if (i + 1 < M) c -= x(i + 1, j);
        if (j > 0) c -= x(i, j - 1);
        if (j + 1 < M) c -= x(i, j + 1);
        out(i, j) = c;
      }
  };
  Eigen::MatrixXd b(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      double s = source(i + 1, j + 1) * h * h;
      if (i == 0) s += u(0, j + 1);
      if (i == M - 1) s += u(N - 1, j + 1);
      if (j == 0) s += u(i + 1, 0);
      if (j == M - 1) s += u(i + 1, N - 1);
      b(i, j) = s;
    }
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(M, M), r = b, p = b, Ap(M, M);
  double btot = std::sqrt(b.squaredNorm());
  double rs = r.squaredNorm();
  const int maxit = 40 * N + 2000;
  bool done = rs <= 1e-24;
  for (int it = 0; it < maxit && !done; ++it) {
    apply(p, Ap);
    double alpha = rs / p.cwiseProduct(Ap).sum();
    x += alpha * p;
    r -= alpha * Ap;
    double rs2 = r.squaredNorm();
    if (std::sqrt(rs2) <= 1e-10 * std::max(btot, 1e-300)) {
      done = true;
      break;
    }
    p = r + (rs2 / rs) * p;
    rs = rs2;
  }
  if (!done) throw Error(ErrorKind::SolverDiverged, "poisson CG did not reach 1e-10 residual");
  u.block(1, 1, M, M) = x;
  return u;
}

// Full report: stencil residual plus the Liouville comparison of v against
// the decaying Poisson solution of its own right-hand side.
inline BochnerReport bochner_liouville(const GridImmersion& g) {
  BochnerReport rep = bochner_residual(g);
  auto st = bochner_detail::stencils(g);
  Eigen::MatrixXd v0 = solve_decay_poisson(st.source, g);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  const int N = g.nodes;
  for (int i = 1; i + 1 < N; ++i)
    for (int j = 1; j + 1 < N; ++j) {
      double d = st.v(i, j) - v0(i, j);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  rep.liouville_spread = hi - lo;
  return rep;
}

}  // namespace varilab
