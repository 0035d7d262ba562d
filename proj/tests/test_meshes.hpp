#pragma once

// shared mesh builders for the unit tests

#include "varilab/varifold.hpp"
#include "varilab/zoo.hpp"

namespace varilab::testmesh {

inline DiscreteVarifold icosphere(int sub, double r = 1.0) {
  ZooSpec s;
  s.subdivisions = sub;
  s.radius = r;
  return generate(s);
}

inline DiscreteVarifold perturbed(int sub, double eps, int l = 2, int m = 0) {
  ZooSpec s;
  s.kind = ZooKind::PerturbedSphere;
  s.subdivisions = sub;
  s.amplitude = eps;
  s.harmonic_l = l;
  s.harmonic_m = m;
  return generate(s);
}

inline DiscreteVarifold flat_grid(int n, double half = 1.0) {
  Mat V((n + 1) * (n + 1), 3);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j)
      V.row(i * (n + 1) + j) << half * (-1.0 + 2.0 * i / n), half * (-1.0 + 2.0 * j / n), 0.0;
  Eigen::MatrixXi F(2 * n * n, 3);
  int f = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      int a = i * (n + 1) + j, b = (i + 1) * (n + 1) + j, c = (i + 1) * (n + 1) + j + 1,
          d = i * (n + 1) + j + 1;
      F.row(f++) << a, b, c;
      F.row(f++) << a, c, d;
    }
  return build(V, F, {}, 3);
}

// open cylinder of radius r about the z-axis, z in [-h, h]
inline DiscreteVarifold cylinder(int nu, int nz, double r = 1.0, double h = 2.0) {
  Mat V(nu * (nz + 1), 3);
  for (int j = 0; j <= nz; ++j)
    for (int i = 0; i < nu; ++i) {
      double th = 2.0 * kPi * i / nu;
      V.row(j * nu + i) << r * std::cos(th), r * std::sin(th), -h + 2.0 * h * j / nz;
    }
  Eigen::MatrixXi F(2 * nu * nz, 3);
  int f = 0;
  for (int j = 0; j < nz; ++j)
    for (int i = 0; i < nu; ++i) {
      int a = j * nu + i, b = j * nu + (i + 1) % nu;
      int c = (j + 1) * nu + (i + 1) % nu, d = (j + 1) * nu + i;
      F.row(f++) << a, b, c;
      F.row(f++) << a, c, d;
    }
  return build(V, F, {}, 3);
}

inline DiscreteVarifold torus(int nu = 48, int nv = 116) {
  ZooSpec s;
  s.kind = ZooKind::Torus;
  s.torus_nu = nu;
  s.torus_nv = nv;
  return generate(s);
}

}  // namespace varilab::testmesh
