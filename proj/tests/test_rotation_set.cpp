#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "rotent/rotation_set.hpp"

using namespace rotent;

namespace {

Eigen::MatrixXd points(std::initializer_list<std::initializer_list<double>> cols) {
  const int m = static_cast<int>(cols.begin()->size());
  Eigen::MatrixXd P(m, cols.size());
  int j = 0;
  for (auto c : cols) {
    int i = 0;
    for (double x : c) P(i++, j) = x;
    ++j;
  }
  return P;
}

RotationPolytope brute_hull(const LcPotential& phi, int max_period) {
  oracle::Table table;
  for (std::size_t i = 0; i < phi.size(); ++i) table[phi.words()[i]] = phi.values().row(i).transpose();
  auto orbits = oracle::periodic_orbits(phi.sft()->dense(), max_period);
  Eigen::MatrixXd P(phi.m(), orbits.size());
  for (std::size_t i = 0; i < orbits.size(); ++i) P.col(i) = oracle::cyclic_average(table, phi.k(), orbits[i]);
  return convex_hull(P);
}

}  // namespace

TEST_CASE("convex hulls") {
  auto seg = convex_hull(points({{0}, {1}, {0.5}}));
  CHECK(seg.vertices() == points({{0}, {1}}));
  auto sq = convex_hull(points({{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}}));
  CHECK(sq.vertices().cols() == 4);
  CHECK(sq.affine_dim() == 2);
  CHECK_THROWS_AS(convex_hull(Eigen::MatrixXd(2, 0)), Error);

  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::MatrixXd P(2, 103);
  for (int i = 0; i < 100; ++i) {
    Eigen::Vector2d x;
    do x << u(rng), u(rng);
    while (x.norm() > 1);
    P.col(i) = x;
  }
  P.col(100) << -3, -3;
  P.col(101) << 6, -3;
  P.col(102) << -3, 6;
  auto tri = convex_hull(P);
  CHECK(tri.vertices().cols() == 3);
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < 103; ++i) pts.push_back(P.col(i));
  CHECK(oracle::extreme_points(pts).size() == 3);
}

TEST_CASE("property: planar hull vertices are exactly the extreme points") {
  std::mt19937 rng(6);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 30; ++trial) {
    Eigen::MatrixXd P(2, 25);
    std::vector<Eigen::VectorXd> pts;
    for (int i = 0; i < 25; ++i) {
      P.col(i) << gauss(rng), gauss(rng);
      pts.push_back(P.col(i));
    }
    auto hull = convex_hull(P);
    auto ext = oracle::extreme_points(pts);
    CHECK(hull.vertices().cols() == static_cast<Eigen::Index>(ext.size()));
    for (auto& e : ext) CHECK(hull.shape.boundary_distance(e) == doctest::Approx(0).epsilon(1e-12));
    for (int i = 0; i < 25; ++i) CHECK(hull.shape.distance(P.col(i)) <= 1e-12);
  }
}

TEST_CASE("three-dimensional hull of a cube") {
  Eigen::MatrixXd P(3, 9);
  int c = 0;
  for (int i = 0; i < 8; ++i) P.col(c++) << (i & 1), (i >> 1 & 1), (i >> 2 & 1);
  P.col(c) << 0.5, 0.5, 0.5;
  auto cube = convex_hull(P);
  CHECK(cube.vertices().cols() == 8);
  CHECK(cube.shape.boundary_distance(Eigen::Vector3d(0.5, 0.5, 0.5)) == doctest::Approx(0.5));
  CHECK(cube.shape.distance(Eigen::Vector3d(2, 0.5, 0.5)) == doctest::Approx(1));
  CHECK(cube.shape.distance(Eigen::Vector3d(2, 2, 0.5)) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("hausdorff distances") {
  auto a = convex_hull(points({{0}, {1}}));
  auto b = convex_hull(points({{0}, {2}}));
  CHECK(hausdorff_distance(a, a) == 0);
  CHECK(hausdorff_distance(a, b) == doctest::Approx(1));
  auto sq = convex_hull(points({{0, 0}, {1, 0}, {1, 1}, {0, 1}}));
  auto big = convex_hull(points({{-0.1, -0.1}, {1.1, -0.1}, {1.1, 1.1}, {-0.1, 1.1}}));
  CHECK(hausdorff_distance(sq, big) == doctest::Approx(0.1 * std::sqrt(2.0)));
  CHECK_THROWS_AS(hausdorff_distance(a, sq), Error);
}

TEST_CASE("elementary hulls") {
  auto full = share(full_shift(2));
  auto golden = share(golden_mean_shift());
  Eigen::MatrixXd bern(2, 1);
  bern << 0, 1;
  auto h = elementary_hull(LcPotential(full, 1, bern));
  CHECK(h.vertices() == points({{0}, {1}}));
  CHECK(h.hausdorff_error <= 1e-12);
  auto g = elementary_hull(LcPotential(golden, 1, bern));
  CHECK(g.vertices() == points({{0}, {0.5}}));
  auto c = elementary_hull(LcPotential(golden, 3, Eigen::MatrixXd::Constant(5, 1, 2.5)));
  CHECK(c.vertices().cols() == 1);
  CHECK(c.vertices()(0, 0) == doctest::Approx(2.5));
  auto split = share(build_sft(2, (Eigen::MatrixXi(2, 2) << 1, 0, 0, 1).finished(), {1, 2}));
  try {
    elementary_hull(LcPotential(split, 1, bern));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotTransitive);
  }
}

TEST_CASE("property: elementary hull equals the all-periodic hull") {
  std::mt19937 rng(8);
  std::normal_distribution<double> gauss;
  for (auto s : {share(full_shift(2)), share(golden_mean_shift())}) {
    for (int k = 1; k <= 2; ++k) {
      for (int m = 1; m <= 2; ++m) {
        for (int trial = 0; trial < 3; ++trial) {
          auto phi = lc_from_function(s, k, m, [&](const Word&) {
            Eigen::VectorXd v(m);
            for (int i = 0; i < m; ++i) v(i) = gauss(rng);
            return v;
          });
          auto fast = elementary_hull(phi);
          auto slow = brute_hull(phi, 10);
          CHECK(hausdorff_distance(fast, slow) <= 1e-9);
          if (m <= 2) CHECK(hausdorff_distance(support_hull(phi), fast) <= 1e-9);
        }
      }
    }
  }
}

TEST_CASE("property: periodic orbits stay in the elementary hull") {
  std::mt19937 rng(10);
  std::normal_distribution<double> gauss;
  auto s = share(build_sft(3, oracle::random_irreducible(3, 0.5, rng), {1, 2}));
  auto phi = lc_from_function(s, 2, 2, [&](const Word&) { return Eigen::VectorXd(Eigen::Vector2d(gauss(rng), gauss(rng))); });
  auto hull = elementary_hull(phi);
  auto orbits = oracle::periodic_orbits(s->dense(), 12);
  std::shuffle(orbits.begin(), orbits.end(), rng);
  if (orbits.size() > 500) orbits.resize(500);
  for (const Word& w : orbits) CHECK(hull.shape.distance(orbit_average(phi, PeriodicOrbit(*s, w))) <= 1e-9);
}

TEST_CASE("inscribed radius") {
  auto sq = convex_hull(points({{0, 0}, {1, 0}, {1, 1}, {0, 1}}));
  CHECK(inscribed_radius(sq, Eigen::Vector2d(0.5, 0.5)) == doctest::Approx(0.5));
  auto fuzzy = sq;
  fuzzy.hausdorff_error = 0.1;
  CHECK(inscribed_radius(fuzzy, Eigen::Vector2d(0.5, 0.5)) == doctest::Approx(0.4));
  CHECK(inscribed_radius(sq, Eigen::Vector2d(2, 2)) == 0);
  auto flat = convex_hull(points({{0, 0}, {1, 1}}));
  try {
    inscribed_radius(flat, Eigen::Vector2d(0.5, 0.5));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateRotationSet);
  }
}

TEST_CASE("interior radius via periodic orbits") {
  Eigen::MatrixXd bern(2, 1);
  bern << 0, 1;
  auto full = LcPotential(share(full_shift(2)), 1, bern);
  CHECK(interior_radius_via_periodic(full, Eigen::VectorXd::Constant(1, 0.5)).radius >= 0.49);
  try {
    interior_radius_via_periodic(full, Eigen::VectorXd::Constant(1, 1.0), 20);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotCertified);
  }
  auto golden = LcPotential(share(golden_mean_shift()), 1, bern);
  CHECK(interior_radius_via_periodic(golden, Eigen::VectorXd::Constant(1, 0.25)).radius >= 0.24);
}

TEST_CASE("max cycle mean") {
  auto full = share(full_shift(2));
  Eigen::MatrixXd bern(2, 1);
  bern << 0.2, 1;
  auto ep = edge_potential(LcPotential(full, 1, bern));
  auto cm = max_cycle_mean(ep.graph->graph(), ep.offsets, ep.values.col(0));
  CHECK(cm.mean == doctest::Approx(1));
  CHECK(cm.cycle == std::vector<int>{1});
  auto low = max_cycle_mean(ep.graph->graph(), ep.offsets, -ep.values.col(0));
  CHECK(low.mean == doctest::Approx(-0.2));
}

TEST_CASE("rot_approx contract") {
  auto full = share(full_shift(2));
  auto oracle = first_one_oracle(full, 0.5);
  auto coarse = rot_approx(oracle, 0.1);
  auto fine = rot_approx(oracle, 0.025);
  CHECK(coarse.hausdorff_error == doctest::Approx(0.1));
  CHECK(fine.hausdorff_error == doctest::Approx(0.025));
  CHECK(hausdorff_distance(coarse, fine) <= 0.125);
  // The true set is [0, 1/2]: the fixed point 1^inf attains 1/2 and 0^inf attains 0.
  CHECK(fine.vertices()(0, 0) == doctest::Approx(0).epsilon(0.025));
  CHECK(std::abs(fine.vertices()(0, fine.vertices().cols() - 1) - 0.5) <= 0.025);

  Eigen::MatrixXd values(3, 1);
  values << 1, 2, 3;
  auto lc = LcPotential(share(golden_mean_shift()), 2, values);
  auto exact = elementary_hull(lc);
  auto approx = rot_approx(oracle_from_lc(lc), 0.3);
  CHECK(hausdorff_distance(exact, approx) <= 1e-12);
  CHECK(approx.hausdorff_error == doctest::Approx(0.3));
}
