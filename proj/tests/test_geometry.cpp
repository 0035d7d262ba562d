#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "varilab/geometry.hpp"

using namespace varilab;

namespace {

Vec v3(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

// rejection-sampling oracle for the disk-triangle intersection area
double mc_disk_triangle(const Vec2& a, const Vec2& b, const Vec2& c, double rho, unsigned seed,
                        int n = 400000) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double area = 0.5 * std::abs((b.x() - a.x()) * (c.y() - a.y()) -
                               (b.y() - a.y()) * (c.x() - a.x()));
  int hit = 0;
  for (int i = 0; i < n; ++i) {
    double u = uni(rng), w = uni(rng);
    if (u + w > 1) {
      u = 1 - u;
      w = 1 - w;
    }
    Vec2 p = a + u * (b - a) + w * (c - a);
    if (p.squaredNorm() <= rho * rho) ++hit;
  }
  return area * hit / n;
}

}  // namespace

TEST_CASE("compensated summation survives cancellation", "[geometry]") {
  KahanSum s;
  s.add(1e16);
  s.add(1.0);
  s.add(-1e16);
  CHECK(s.value() == 1.0);
}

TEST_CASE("triangle area and angles", "[geometry]") {
  Vec a = v3(0, 0, 0), b = v3(1, 0, 0), c = v3(0, 1, 0);
  CHECK_THAT(triangle_area(a, b, c), Catch::Matchers::WithinAbs(0.5, 1e-15));
  CHECK_THAT(triangle_angle(a, b, c), Catch::Matchers::WithinAbs(kPi / 2, 1e-14));
  CHECK_THAT(triangle_angle(b, c, a), Catch::Matchers::WithinAbs(kPi / 4, 1e-14));
  // area is dimension-generic
  Vec a4(4), b4(4), c4(4);
  a4 << 0, 0, 0, 0;
  b4 << 1, 0, 0, 0;
  c4 << 0, 0, 0, 2;
  CHECK_THAT(triangle_area(a4, b4, c4), Catch::Matchers::WithinAbs(1.0, 1e-15));
}

TEST_CASE("disk-triangle intersection area", "[geometry]") {
  SECTION("disk inside triangle") {
    Vec2 a(-5, -5), b(5, -5), c(0, 8);
    CHECK_THAT(disk_triangle_area(a, b, c, 1.0), Catch::Matchers::WithinRel(kPi, 1e-12));
  }
  SECTION("triangle inside disk") {
    Vec2 a(0, 0), b(1, 0), c(0, 1);
    CHECK_THAT(disk_triangle_area(a, b, c, 10.0), Catch::Matchers::WithinRel(0.5, 1e-12));
  }
  SECTION("half disk") {
    Vec2 a(-50, 0), b(50, 0), c(0, 50);
    CHECK_THAT(disk_triangle_area(a, b, c, 1.0), Catch::Matchers::WithinRel(kPi / 2, 1e-10));
  }
  SECTION("clockwise orientation gives the same area") {
    Vec2 a(0, 0), b(1, 0), c(0, 1);
    CHECK_THAT(disk_triangle_area(a, c, b, 0.7),
               Catch::Matchers::WithinRel(disk_triangle_area(a, b, c, 0.7), 1e-12));
  }
  SECTION("disjoint") {
    Vec2 a(10, 10), b(11, 10), c(10, 11);
    CHECK(disk_triangle_area(a, b, c, 1.0) == 0.0);
  }
  SECTION("matches rejection sampling on random triangles") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    for (int t = 0; t < 5; ++t) {
      Vec2 a(uni(rng), uni(rng)), b(uni(rng), uni(rng)), c(uni(rng), uni(rng));
      double rho = 0.5 + 0.5 * std::abs(uni(rng));
      double exact = disk_triangle_area(a, b, c, rho);
      double mc = mc_disk_triangle(a, b, c, rho, 100 + t);
      double scale = std::max(
          {exact, 1e-3});
      CHECK_THAT(mc, Catch::Matchers::WithinAbs(exact, 0.02 * scale + 2e-3));
    }
  }
}

TEST_CASE("ball-triangle area in ambient space", "[geometry]") {
  Vec a = v3(-5, -5, 1), b = v3(5, -5, 1), c = v3(0, 8, 1);
  // ball of radius 2 centered at origin slices the z=1 plane in a disk of radius sqrt(3)
  Vec x = v3(0, 0, 0);
  CHECK_THAT(ball_triangle_area(x, a, b, c, 2.0), Catch::Matchers::WithinRel(3.0 * kPi, 1e-10));
  CHECK(ball_triangle_area(x, a, b, c, 0.5) == 0.0);  // plane outside ball
}

TEST_CASE("half-space clipping", "[geometry]") {
  Vec a = v3(0, 0, 0), b = v3(2, 0, 0), c = v3(0, 2, 0);
  Vec u = v3(1, 0, 0);
  double full = triangle_area(a, b, c);
  double left = halfspace_triangle_area(u, 1.0, a, b, c);
  double right = halfspace_triangle_area(-u, -1.0, a, b, c);
  CHECK_THAT(left + right, Catch::Matchers::WithinRel(full, 1e-12));
  CHECK_THAT(halfspace_triangle_area(u, 5.0, a, b, c), Catch::Matchers::WithinRel(full, 1e-12));
  CHECK(halfspace_triangle_area(u, -1.0, a, b, c) == 0.0);
}

TEST_CASE("point-triangle distance", "[geometry]") {
  Vec a = v3(0, 0, 0), b = v3(1, 0, 0), c = v3(0, 1, 0);
  CHECK_THAT(point_triangle_sqdist(v3(0.2, 0.2, 3), a, b, c),
             Catch::Matchers::WithinRel(9.0, 1e-12));
  CHECK_THAT(point_triangle_sqdist(v3(2, 0, 0), a, b, c), Catch::Matchers::WithinRel(1.0, 1e-12));
  CHECK_THAT(point_triangle_sqdist(v3(-1, -1, 0), a, b, c),
             Catch::Matchers::WithinRel(2.0, 1e-12));
}

TEST_CASE("polar factor and procrustes", "[geometry]") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  Mat A(5, 2);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 2; ++j) A(i, j) = g(rng);
  Mat P = polar_orthonormal(A);
  CHECK((P.transpose() * P - Mat::Identity(2, 2)).norm() < 1e-12);

  Mat Q = random_rotation(2, 3);
  Eigen::Matrix2d M = Q;
  Eigen::Matrix2d rec = procrustes_rotation(M);
  CHECK((rec - Q).norm() < 1e-12);

  Mat R = random_rotation(4, 9);
  CHECK((R * R.transpose() - Mat::Identity(4, 4)).norm() < 1e-12);
  CHECK_THAT(R.determinant(), Catch::Matchers::WithinAbs(1.0, 1e-12));
  CHECK((random_rotation(4, 9) - R).norm() == 0.0);  // seeded determinism
}

TEST_CASE("solid angle of an octant", "[geometry]") {
  Eigen::Vector3d e1(1, 0, 0), e2(0, 1, 0), e3(0, 0, 1);
  CHECK_THAT(signed_solid_angle(e1, e2, e3), Catch::Matchers::WithinRel(kPi / 2, 1e-12));
  CHECK_THAT(signed_solid_angle(e2, e1, e3), Catch::Matchers::WithinRel(-kPi / 2, 1e-12));
}
