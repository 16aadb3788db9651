#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "rotent/perron.hpp"

using namespace rotent;

TEST_CASE("perron on small matrices") {
  Eigen::Matrix2d ones = Eigen::Matrix2d::Ones();
  auto pd = perron(ones, 1e-12);
  CHECK(pd.lambda_lo <= 2);
  CHECK(pd.lambda_hi >= 2);
  CHECK(pd.width() <= 1e-12);
  CHECK((pd.r - Eigen::Vector2d::Ones()).norm() <= 1e-12);
  CHECK((pd.l - Eigen::Vector2d::Ones()).norm() <= 1e-12);

  const double phi = oracle::golden_ratio();
  Eigen::Matrix2d fib;
  fib << 1, 1, 1, 0;
  auto g = perron(fib, 1e-10);
  CHECK(g.lambda_lo <= phi + 1e-15);
  CHECK(g.lambda_hi >= phi - 1e-15);
  CHECK(g.width() <= 1e-10);
  CHECK(g.r(0) == 1);
  CHECK(g.r(1) == doctest::Approx(1 / phi).epsilon(1e-9));

  Eigen::Matrix2d perm;
  perm << 0, 1, 1, 0;
  auto p = perron(perm, 1e-12);
  CHECK(p.lambda_lo <= 1);
  CHECK(p.lambda_hi >= 1);
}

TEST_CASE("perron rejects bad input") {
  Eigen::Matrix2d diag;
  diag << 2, 0, 0, 1;
  try {
    perron(diag, 1e-10);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotIrreducible);
  }
  Eigen::Matrix2d neg;
  neg << 1, -1, 1, 1;
  CHECK_THROWS_AS(perron(neg, 1e-10), Error);
  CHECK_THROWS_AS(perron(Eigen::Matrix2d::Ones().eval(), 0.0), Error);
}

TEST_CASE("maximin oracle agrees with perron for d <= 3") {
  const double phi = oracle::golden_ratio();
  Eigen::Matrix2d fib;
  fib << 1, 1, 1, 0;
  CHECK(std::abs(perron_maximin_oracle(fib, 10000) - phi) <= 1e-4);
  CHECK(perron_maximin_oracle(Eigen::Matrix2d::Ones().eval(), 4) <= 2 + 1e-12);
  CHECK(perron_maximin_oracle(Eigen::Matrix2d::Ones().eval(), 1000) >= 2 - 1e-6);

  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(0.1, 2);
  for (int trial = 0; trial < 20; ++trial) {
    int d = 2 + trial % 2;
    Eigen::MatrixXi A = oracle::random_irreducible(d, 0.5, rng);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        if (A(i, j)) B(i, j) = u(rng);
      }
    }
    auto pd = perron(B, 1e-12);
    double lo = perron_maximin_oracle(B, d == 2 ? 20000 : 200000);
    CHECK(lo <= pd.lambda_hi + 1e-12);
    CHECK(std::abs(lo - pd.lambda_mid()) <= 1e-3);
  }
}

TEST_CASE("property: enclosure, residual and left/right consistency") {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(0.05, 3);
  for (int trial = 0; trial < 100; ++trial) {
    int d = 1 + trial % 8;
    Eigen::MatrixXi A = oracle::random_irreducible(d, 0.4, rng);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        if (A(i, j)) B(i, j) = u(rng);
      }
    }
    const double tol = 1e-11;
    auto pd = perron(B, tol);
    double rho = oracle::spectral_radius(B);
    CHECK(pd.lambda_lo <= rho * (1 + 1e-14));
    CHECK(pd.lambda_hi >= rho * (1 - 1e-14));
    CHECK(pd.width() <= tol);
    CHECK(pd.r.minCoeff() > 0);
    CHECK(pd.l.minCoeff() > 0);
    CHECK(pd.r(0) == 1);
    CHECK(pd.l(0) == 1);
    double res = (B * pd.r - pd.lambda_mid() * pd.r).cwiseAbs().maxCoeff();
    CHECK(res <= pd.residual);
    CHECK(pd.residual <= 10 * tol * pd.r.cwiseAbs().maxCoeff() * std::max(1.0, B.cwiseAbs().maxCoeff()) * d);
    double lhs = std::abs(pd.l.dot(B * pd.r) - pd.lambda_mid() * pd.l.dot(pd.r));
    CHECK(lhs <= pd.residual * pd.l.lpNorm<1>() + 1e-12);
  }
}

TEST_CASE("relative tolerance scales with the root") {
  Eigen::Matrix2d big;
  big << 1e6, 1e6, 1e6, 0;
  PerronOptions opt;
  opt.relative = true;
  auto pd = perron(big, 1e-12, opt);
  CHECK(pd.width() <= 1e-12 * pd.lambda_hi);
  CHECK(pd.lambda_mid() == doctest::Approx(1e6 * oracle::golden_ratio()).epsilon(1e-12));
}

TEST_CASE("float scalar type") {
  Eigen::Matrix2f fib;
  fib << 1, 1, 1, 0;
  auto pd = perron(fib, 1e-5f);
  CHECK(pd.lambda_lo <= 1.6180340f);
  CHECK(pd.lambda_hi >= 1.6180339f);
}
