#include <cmath>
#include <random>

#include <doctest.h>

#include "bl/convex.hpp"
#include "bl/optimize.hpp"
#include "test_util.hpp"

using namespace bl;

namespace {

BallDecomposition hexagon_ball() {
  RankOneDatum d = blt::hexagon_datum();
  return {d.vectors, d.c};
}

GridFunction square_indicator(double half, int cells) {
  GridFunction g;
  g.dim = 2;
  g.origin = {-half, -half, 0.0};
  double cw = 2.0 * half / cells;
  g.cell = {cw, cw, 0.0};
  g.shape = {cells, cells, 1};
  g.samples.assign(static_cast<std::size_t>(cells) * cells, 1.0);
  return g;
}

}  // namespace

TEST_CASE("ball decomposition validation measures the isotropy defect") {
  BallDecomposition b = hexagon_ball();
  CHECK(validate(b).empty());
  CHECK(ball_residual(b) < 1e-12);

  BallDecomposition off = b;
  off.u.col(1) *= 1.1;
  CHECK(!validate(off).empty());

  BallDecomposition neg = b;
  neg.c[0] = -0.1;
  CHECK(!validate(neg).empty());

  BallDecomposition skew = b;
  skew.c[0] = 1.2;
  CHECK(ball_residual(skew) > 0.1);
  CHECK(!validate(skew).empty());
}

TEST_CASE("random ball decompositions are isotropic with healthy weights") {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    BallDecomposition b = random_ball_decomposition(3, 8, seed);
    CHECK(validate(b).empty());
    CHECK(ball_residual(b) < 1e-10);
    CHECK(b.c.minCoeff() >= 0.05);
    CHECK(b.c.sum() == doctest::Approx(3.0).epsilon(1e-10));
  }
}

TEST_CASE("orthonormal lift extends the scaled directions to a rotation") {
  BallDecomposition b = random_ball_decomposition(2, 6, 9);
  MatrixXd lift = orthonormal_lift(b);
  REQUIRE(lift.rows() == 6);
  REQUIRE(lift.cols() == 6);
  CHECK((lift * lift.transpose() - MatrixXd::Identity(6, 6)).norm() < 1e-12);
  for (int i = 0; i < 6; ++i)
    CHECK((lift.col(i).head(2) - std::sqrt(b.c[i]) * b.u.col(i)).norm() < 1e-12);
}

TEST_CASE("isotropic frames have constant one with equal scalars") {
  for (std::uint64_t seed : {21, 22, 23}) {
    BallDecomposition b = random_ball_decomposition(2, 6, seed);
    RankOneDatum d = ball_datum(b);
    MinorTable table = minor_table(d);
    GaussianOptimum opt = minimize(d, table, d.c);
    REQUIRE(opt.converged);
    CHECK(opt.D == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(achievement_certificate(d, table, opt.lambda).certified);
    for (int i = 1; i < 6; ++i)
      CHECK(opt.lambda[i] == doctest::Approx(opt.lambda[0]).epsilon(1e-4));
  }
}

TEST_CASE("isotropic minor tables carry the frame identities") {
  BallDecomposition b = random_ball_decomposition(3, 7, 33);
  RankOneDatum d = ball_datum(b);
  MinorTable table = minor_table(d);
  CHECK(weighted_gram_det(table, b.c) == doctest::Approx(1.0).epsilon(1e-10));
  VectorXd shift = b.c.array().log();
  VectorXd p = subset_mass(table, VectorXd::Zero(7), &shift);
  CHECK((p - b.c).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("weighted determinants dominate the scalar power mean") {
  BallDecomposition b = random_ball_decomposition(3, 7, 55);
  RankOneDatum d = ball_datum(b);
  MinorTable table = minor_table(d);
  std::mt19937_64 rng(56);
  std::uniform_real_distribution<double> unif(-1.5, 1.5);
  for (int trial = 0; trial < 50; ++trial) {
    VectorXd lambda(7);
    for (int i = 0; i < 7; ++i) lambda[i] = std::exp(unif(rng));
    double lhs = weighted_gram_det(table, (lambda.array() * b.c.array()).matrix());
    double rhs = 1.0;
    for (int i = 0; i < 7; ++i) rhs *= std::pow(lambda[i], b.c[i]);
    CHECK(lhs >= rhs * (1.0 - 1e-10));
  }
  CHECK(weighted_gram_det(table, b.c) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("zonotope volumes match closed forms") {
  Zonotope cube{MatrixXd::Identity(3, 3), VectorXd::Ones(3)};
  CHECK(zonotope_volume(cube) == doctest::Approx(8.0).epsilon(1e-12));

  BallDecomposition hex = hexagon_ball();
  Zonotope zhex{hex.u, VectorXd::Ones(3)};
  CHECK(zonotope_volume(zhex) == doctest::Approx(6.0 * std::sqrt(3.0)).epsilon(1e-12));

  double s = std::sqrt(0.5);
  Zonotope quad{(MatrixXd(2, 4) << 1, s, 0, -s, 0, s, 1, s).finished(), VectorXd::Ones(4)};
  CHECK(zonotope_volume(quad) == doctest::Approx(8.0 + 16.0 * s).epsilon(1e-12));
}

TEST_CASE("serial reference matches the chunked zonotope volume") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_z = [&](int n, int m) {
    MatrixXd u(n, m);
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < n; ++i) u(i, j) = gauss(rng);
      u.col(j).normalize();
    }
    VectorXd alpha(m);
    for (int i = 0; i < m; ++i) alpha[i] = 0.5 + 0.1 * i;
    return Zonotope{u, alpha};
  };
  // 120 subsets fit one reduction block, so the sums are bitwise equal.
  Zonotope small = random_z(3, 10);
  CHECK(zonotope_volume(small) == zonotope_volume_serial(small));
  // 7315 subsets span blocks; accumulation order differs from the linear loop.
  Zonotope large = random_z(4, 22);
  CHECK(zonotope_volume(large) == doctest::Approx(zonotope_volume_serial(large)).epsilon(1e-13));
}

TEST_CASE("hit or miss volume is deterministic and unbiased") {
  BallDecomposition hex = hexagon_ball();
  Zonotope z{hex.u, VectorXd::Ones(3)};
  double exact = 6.0 * std::sqrt(3.0);
  McVolume a = zonotope_volume_mc(z, 200'000, 17);
  McVolume b = zonotope_volume_mc(z, 200'000, 17);
  CHECK(a.value == b.value);
  CHECK(a.hits == b.hits);
  CHECK(a.sigma > 0.0);
  CHECK(std::abs(a.value - exact) <= 4.0 * a.sigma);
  McVolume c = zonotope_volume_mc(z, 200'000, 18);
  CHECK(c.hits != a.hits);
  CHECK(std::abs(c.value - exact) <= 4.0 * c.sigma);
}

TEST_CASE("square generators make every sample a hit") {
  Zonotope box{MatrixXd::Identity(2, 2), (VectorXd(2) << 1.0, 2.0).finished()};
  McVolume mc = zonotope_volume_mc(box, 50'000, 3);
  CHECK(mc.hits == mc.samples);
  CHECK(mc.value == doctest::Approx(8.0).epsilon(1e-12));

  double th = 0.5;
  MatrixXd rot(2, 2);
  rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  Zonotope par{rot, (VectorXd(2) << 1.0, 2.0).finished()};
  McVolume mcr = zonotope_volume_mc(par, 100'000, 4);
  CHECK(std::abs(mcr.value - 8.0) <= 4.0 * mcr.sigma);
}

TEST_CASE("feasibility membership handles corank two generators") {
  double s = std::sqrt(0.5);
  Zonotope z{(MatrixXd(2, 4) << 1, s, 0, -s, 0, s, 1, s).finished(), VectorXd::Ones(4)};
  double exact = 8.0 + 16.0 * s;
  McVolume mc = zonotope_volume_mc(z, 40'000, 11);
  CHECK(std::abs(mc.value - exact) <= 5.0 * mc.sigma);
}

TEST_CASE("zonoid volumes dominate the weight power bound") {
  BallDecomposition hex = hexagon_ball();
  ZonoidReport rep = zonoid_bound_check(hex, VectorXd::Ones(3));
  CHECK(rep.pass);
  CHECK(rep.volume == doctest::Approx(6.0 * std::sqrt(3.0)).epsilon(1e-12));
  CHECK(rep.bound == doctest::Approx(9.0).epsilon(1e-12));

  ZonoidReport at_c = zonoid_bound_check(hex, hex.c);
  CHECK(at_c.pass);
  CHECK(at_c.bound == doctest::Approx(4.0).epsilon(1e-12));

  BallDecomposition square{MatrixXd::Identity(2, 2), VectorXd::Ones(2)};
  ZonoidReport eq = zonoid_bound_check(square, VectorXd::Ones(2));
  CHECK(eq.pass);
  CHECK(eq.volume == doctest::Approx(eq.bound).epsilon(1e-12));
}

TEST_CASE("random zonoids stay above the bound") {
  std::mt19937_64 rng(91);
  std::uniform_real_distribution<double> unif(0.3, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    int n = 2 + trial % 2;
    int m = n + 2 + trial % 3;
    BallDecomposition b = random_ball_decomposition(n, m, 900 + trial);
    VectorXd alpha(m);
    for (int i = 0; i < m; ++i) alpha[i] = unif(rng);
    ZonoidReport rep = zonoid_bound_check(b, alpha);
    CHECK(rep.pass);
    CHECK(rep.volume >= rep.bound * (1.0 - 1e-9));
  }
}

TEST_CASE("interval sup convolution reproduces the zonotope volume") {
  BallDecomposition hex = hexagon_ball();
  FunctionalOptions fo;
  fo.grid = 256;
  IntegralEstimate est = zonotope_volume_functional(hex, VectorXd::Ones(3), fo);
  double exact = 6.0 * std::sqrt(3.0);
  CHECK(std::abs(est.value - exact) <= 3 * est.error + 0.25);
}

TEST_CASE("projection mixtures dominate the volume power mean") {
  std::vector<MatrixXd> q;
  q.push_back((MatrixXd(2, 1) << 1, 0).finished());
  q.push_back((MatrixXd(2, 1) << 0, 1).finished());
  q.push_back(MatrixXd::Identity(2, 2));
  VectorXd c = VectorXd::Constant(3, 0.5);
  std::vector<GridFunction> bodies;
  bodies.push_back(indicator_grid_1d(-1.0, 1.0, 96));
  bodies.push_back(indicator_grid_1d(-2.0, 2.0, 96));
  bodies.push_back(square_indicator(1.0, 64));
  FunctionalOptions fo;
  fo.grid = 224;
  ProjectionReport rep = bm_projection_check(q, c, bodies, fo);
  CHECK(rep.residual < 1e-10);
  CHECK(rep.pass);
  // (1/2)[-1,1] + (1/2)[-2,2] + (1/2)[-1,1]^2 is the box [-1,1] x [-1.5,1.5]
  CHECK(std::abs(rep.lhs - 6.0) <= 3 * rep.error + 0.2);
  CHECK(rep.rhs == doctest::Approx(std::sqrt(32.0)).epsilon(1e-9));
}

TEST_CASE("orthogonal segment mixtures hit the power mean with equality") {
  std::vector<MatrixXd> q;
  q.push_back((MatrixXd(2, 1) << 1, 0).finished());
  q.push_back((MatrixXd(2, 1) << 0, 1).finished());
  VectorXd c = VectorXd::Ones(2);
  std::vector<GridFunction> bodies;
  bodies.push_back(indicator_grid_1d(-0.5, 0.5, 256));
  bodies.push_back(indicator_grid_1d(-1.5, 1.5, 256));
  FunctionalOptions fo;
  fo.grid = 224;
  ProjectionReport rep = bm_projection_check(q, c, bodies, fo);
  CHECK(rep.pass);
  CHECK(std::abs(rep.lhs - rep.rhs) <= 3 * rep.error + 0.1);
  CHECK(rep.rhs == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("projection mixtures reject non isotropic weights") {
  std::vector<MatrixXd> q;
  q.push_back((MatrixXd(2, 1) << 1, 0).finished());
  q.push_back((MatrixXd(2, 1) << 0, 1).finished());
  VectorXd c = (VectorXd(2) << 1.0, 0.5).finished();
  std::vector<GridFunction> bodies(2, indicator_grid_1d(-1.0, 1.0, 64));
  ProjectionReport rep = bm_projection_check(q, c, bodies, {});
  CHECK(!rep.pass);
  CHECK(rep.residual > 0.1);
}
