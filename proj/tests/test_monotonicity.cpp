#include <catch2/catch_amalgamated.hpp>

#include "test_meshes.hpp"
#include "varilab/monotonicity.hpp"

using namespace varilab;
using namespace varilab::testmesh;

TEST_CASE("density of a flat plane is 1", "[monotonicity]") {
  DiscreteVarifold g = flat_grid(24, 2.0);
  Vec x(3);
  x << 0, 0, 0;
  std::vector<double> radii{0.3, 0.5, 0.8, 1.2};
  DensityProfile p = density_profile(g, x, radii);
  for (double r : p.ratios) CHECK_THAT(r, Catch::Matchers::WithinRel(1.0, 1e-9));
  CHECK_THAT(p.limit_estimate, Catch::Matchers::WithinRel(1.0, 0.01));
}

TEST_CASE("empty ball far from the surface", "[monotonicity]") {
  DiscreteVarifold s = icosphere(2, 0.25);
  Vec x(3);
  x << 1.0, 0, 0;
  DensityProfile p = density_profile(s, x, {0.3});
  CHECK(p.ratios[0] == 0.0);
}

TEST_CASE("sphere density via profile and via energy identity", "[monotonicity]") {
  DiscreteVarifold s = icosphere(4);
  CurvatureField f = mean_curvature(s);
  auto tangents = vertex_tangent_bases(s);

  auto radii = default_radius_schedule(s, diameter(s).value);
  DensityProfile p = density_profile(s, s.vertices.row(17), radii, &f, &tangents);
  CHECK_THAT(p.limit_estimate, Catch::Matchers::WithinRel(1.0, 0.02));

  // the remainder integrand vanishes identically on the round sphere
  CHECK(p.remainder.back() <= 1e-3);

  double via_energy = density_at_point_via_energy(s, 17, f, tangents);
  CHECK_THAT(via_energy, Catch::Matchers::WithinRel(1.0, 0.03));
  CHECK_THAT(via_energy, Catch::Matchers::WithinAbs(p.limit_estimate, 0.05));

  SECTION("theta = 2 doubles both estimators") {
    DiscreteVarifold s2 =
        build(s.vertices, s.faces, Eigen::VectorXi::Constant(s.num_faces(), 2), 3);
    CurvatureField f2 = mean_curvature(s2);
    auto t2 = vertex_tangent_bases(s2);
    CHECK_THAT(density_at_point_via_energy(s2, 17, f2, t2),
               Catch::Matchers::WithinRel(2.0, 0.05));
    DensityProfile p2 = density_profile(s2, s2.vertices.row(17), radii);
    CHECK_THAT(p2.limit_estimate, Catch::Matchers::WithinRel(2.0, 0.05));
  }
}

TEST_CASE("estimators agree across the zoo", "[monotonicity]") {
  auto check_surface = [](const DiscreteVarifold& v, int vertex) {
    CurvatureField f = mean_curvature(v);
    auto tangents = vertex_tangent_bases(v);
    auto radii = default_radius_schedule(v, diameter(v).value);
    DensityProfile p = density_profile(v, v.vertices.row(vertex), radii);
    double ve = density_at_point_via_energy(v, vertex, f, tangents);
    CHECK_THAT(ve, Catch::Matchers::WithinRel(p.limit_estimate, 0.05));
  };
  check_surface(icosphere(4), 100);
  check_surface(perturbed(4, 0.05), 100);
  check_surface(torus(), 500);
}

TEST_CASE("density at least 1 on the support", "[monotonicity]") {
  // radii must resolve the local curvature scale: kappa * r small, else the
  // quadratic term of the density ratio contaminates the linear extrapolation
  for (const DiscreteVarifold& v : {icosphere(3), torus(128, 310)}) {
    for (int i = 0; i < v.num_vertices(); i += std::max(1, v.num_vertices() / 24)) {
      double h = local_edge_length(v, i);
      std::vector<double> radii;
      for (double m : {3.0, 4.0, 5.0, 6.5, 8.0}) radii.push_back(m * h);
      DensityProfile p = density_profile(v, v.vertices.row(i), radii);
      CHECK(p.limit_estimate >= 1.0 - 0.03);
    }
  }
}

TEST_CASE("junction density of the double bubble is 3/2", "[monotonicity]") {
  ZooSpec s;
  s.kind = ZooKind::DoubleBubble;
  s.half_length = 10;
  s.truncation = 10;
  s.base_edge = 0.08;
  DiscreteVarifold bubble = generate(s);
  int jv = -1;
  double best = 1e300;
  for (int i = 0; i < bubble.num_vertices(); ++i)
    if (bubble.tags[i] == VertexTag::Junction && Vec(bubble.vertices.row(i)).norm() < best) {
      best = Vec(bubble.vertices.row(i)).norm();
      jv = i;
    }
  REQUIRE(jv >= 0);
  double r0 = 3.0 * local_edge_length(bubble, jv);
  std::vector<double> radii;
  for (int k = 0; k < 6; ++k) radii.push_back(r0 * std::pow(1.55, k));
  DensityProfile p = density_profile(bubble, bubble.vertices.row(jv), radii);
  CHECK_THAT(p.limit_estimate, Catch::Matchers::WithinRel(1.5, 0.05));

  // cross-check through the energy identity (H masked on the junction itself)
  CHECK_THAT(density_at_point_via_energy(bubble, jv), Catch::Matchers::WithinRel(1.5, 0.07));

  // radii below twice the local edge are flagged, still computed
  DensityProfile warn =
      density_profile(bubble, bubble.vertices.row(jv), {0.5 * local_edge_length(bubble, jv)});
  CHECK(warn.radius_warning);
  CHECK(warn.ratios[0] > 0);
}

TEST_CASE("li-yau check on spheres and bubble", "[monotonicity]") {
  MonotonicityReport r1 = li_yau_check(icosphere(3));
  CHECK_THAT(r1.max_density_estimate, Catch::Matchers::WithinRel(1.0, 0.05));
  CHECK(r1.li_yau_slack >= -0.03 * r1.willmore);

  ZooSpec m;
  m.kind = ZooKind::MultiplicitySphere;
  m.subdivisions = 3;
  m.multiplicity = 2;
  MonotonicityReport r2 = li_yau_check(generate(m));
  CHECK_THAT(r2.willmore, Catch::Matchers::WithinRel(8 * kPi, 0.01));
  CHECK_THAT(r2.max_density_estimate, Catch::Matchers::WithinRel(2.0, 0.05));
  CHECK(r2.li_yau_slack >= -0.03 * r2.willmore);

  CHECK_THROWS_AS(li_yau_check(flat_grid(4)), Error);  // boundary mesh rejected
}

TEST_CASE("diameter bounds under the 32pi hypothesis", "[monotonicity]") {
  DiameterCheck c = diameter_bounds_check(icosphere(3));
  CHECK(c.lower_ok);
  CHECK(c.upper_constant > 0);
  CHECK(c.upper_constant < 10);

  ZooSpec e;
  e.kind = ZooKind::Ellipsoid;
  e.subdivisions = 3;
  e.semi_axes[2] = 2.0;
  DiameterCheck ce = diameter_bounds_check(generate(e));
  CHECK(ce.lower_ok);

  ZooSpec m;
  m.kind = ZooKind::MultiplicitySphere;
  m.subdivisions = 3;
  m.multiplicity = 2;
  try {
    diameter_bounds_check(generate(m));
    FAIL("theta=2 sphere must raise HypothesisViolated");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::HypothesisViolated);
  }
}

TEST_CASE("monotone quantity is nondecreasing", "[monotonicity]") {
  for (const DiscreteVarifold& v : {icosphere(4), perturbed(4, 0.05)}) {
    CurvatureField f = mean_curvature(v);
    std::vector<double> radii;
    for (int k = 0; k < 10; ++k) radii.push_back(0.15 * std::pow(16.0, k / 9.0));
    auto g = monotone_quantity(v, f, v.vertices.row(33), radii);
    for (std::size_t k = 1; k < g.size(); ++k)
      CHECK(g[k] >= g[k - 1] - 0.01 * std::abs(g[k - 1]));
  }
}
