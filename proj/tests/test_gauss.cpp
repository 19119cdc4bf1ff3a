#include <cmath>
#include <random>

#include <doctest.h>

#include "bl/convex.hpp"
#include "bl/functional.hpp"
#include "bl/optimize.hpp"
#include "bl/quadratic.hpp"
#include "test_util.hpp"

using namespace bl;

namespace {

double mass_power(const MultiDatum& d, const std::vector<GridFunction>& f) {
  double acc = 1.0;
  for (int i = 0; i < d.m(); ++i) acc *= std::pow(f[i].total_mass(), d.blocks[i].c);
  return acc;
}

}  // namespace

TEST_CASE("parallel pair attains constant one at equal scalars") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unif(0.15, 0.85);
  for (int trial = 0; trial < 5; ++trial) {
    double t = unif(rng);
    RankOneDatum d = blt::make_datum(1, {{1.0}, {1.0}}, {t, 1.0 - t});
    MinorTable table = minor_table(d);
    GaussianOptimum opt = minimize(d, table, d.c);
    CHECK(opt.converged);
    CHECK(opt.achieved);
    CHECK(opt.D == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(opt.lambda[0] == doctest::Approx(opt.lambda[1]).epsilon(1e-6));
    CHECK(achievement_certificate(d, table, opt.lambda).certified);
  }
}

TEST_CASE("orthonormal double frame minimizes at equal scalars") {
  for (int n = 2; n <= 3; ++n) {
    RankOneDatum d;
    d.n = n;
    d.vectors.resize(n, 2 * n);
    d.vectors << MatrixXd::Identity(n, n), MatrixXd::Identity(n, n);
    d.c = VectorXd::Constant(2 * n, 0.5);
    MinorTable table = minor_table(d);
    GaussianOptimum opt = minimize(d, table, d.c);
    CHECK(opt.converged);
    CHECK(opt.D == doctest::Approx(1.0).epsilon(1e-9));
    for (int i = 1; i < 2 * n; ++i)
      CHECK(opt.lambda[i] == doctest::Approx(opt.lambda[0]).epsilon(1e-5));
  }
}

TEST_CASE("hexagon frame is extremal at equal scalars with certificate") {
  RankOneDatum d = blt::hexagon_datum();
  MinorTable table = minor_table(d);
  FeasibilityCertificate feas = feasibility(d, table);
  CHECK(feas.status == Feasibility::relative_interior);
  GaussianOptimum opt = minimize(d, table, d.c);
  CHECK(opt.converged);
  CHECK(opt.achieved);
  CHECK(opt.D == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(opt.E == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(opt.F == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(opt.lambda[1] == doctest::Approx(opt.lambda[0]).epsilon(1e-6));
  CHECK(opt.lambda[2] == doctest::Approx(opt.lambda[0]).epsilon(1e-6));
  AchievementCertificate cert = achievement_certificate(d, table, opt.lambda);
  CHECK(cert.certified);
  CHECK(cert.max_error < 1e-8);
}

TEST_CASE("interior fixture matches the refining grid search") {
  RankOneDatum d = blt::interior_datum();
  MinorTable table = minor_table(d);
  GaussianOptimum opt = minimize(d, table, d.c);
  CHECK(opt.converged);
  double oracle = blt::oracle_constant(table, d.c, true);
  CHECK(opt.D == doctest::Approx(oracle).epsilon(1e-6));
  AchievementCertificate cert = achievement_certificate(d, table, opt.lambda);
  REQUIRE(cert.certified);
  REQUIRE(cert.weights.size() == 3);
  CHECK(cert.weights[0] == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(cert.weights[1] == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(cert.weights[2] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("raw and weighted programs differ by the exponent factor") {
  for (int trial = 0; trial < 10; ++trial) {
    int n = 2 + trial % 2;
    int m = n + 2;
    RankOneDatum d = blt::random_rank_one(n, m, 4000 + trial);
    MinorTable table = minor_table(d);
    d.c = blt::interior_exponents(table, 4100 + trial);
    GaussianOptimum weighted = minimize(d, table, d.c);
    GaussianOptimum raw = determinant_infimum(d, table, d.c);
    REQUIRE(weighted.converged);
    REQUIRE(raw.converged);
    double factor = 1.0;
    for (int i = 0; i < m; ++i) factor *= std::pow(d.c[i], d.c[i]);
    CHECK(weighted.D == doctest::Approx(raw.D * factor).epsilon(1e-6));
  }
}

TEST_CASE("random interior data match the grid oracle") {
  for (int trial = 0; trial < 3; ++trial) {
    RankOneDatum d = blt::random_rank_one(2, 4, 5000 + trial);
    MinorTable table = minor_table(d);
    d.c = blt::interior_exponents(table, 5100 + trial);
    GaussianOptimum opt = minimize(d, table, d.c);
    REQUIRE(opt.converged);
    double oracle = blt::oracle_constant(table, d.c, true);
    CHECK(opt.D == doctest::Approx(oracle).epsilon(1e-5));
  }
}

TEST_CASE("reported scalars are stationary for the softmax marginal") {
  RankOneDatum d = blt::interior_datum();
  MinorTable table = minor_table(d);
  GaussianOptimum opt = minimize(d, table, d.c);
  REQUIRE(opt.converged);
  VectorXd shift = d.c.array().log();
  VectorXd x = opt.lambda.array().log();
  VectorXd p = subset_mass(table, x, &shift);
  CHECK((p - d.c).lpNorm<Eigen::Infinity>() < 1e-7);
}

TEST_CASE("softmax marginal is the central difference of the log objective") {
  for (int trial = 0; trial < 5; ++trial) {
    RankOneDatum d = blt::random_rank_one(3, 6, 6000 + trial);
    MinorTable table = minor_table(d);
    std::mt19937_64 rng(6100 + trial);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    VectorXd x(6);
    for (int i = 0; i < 6; ++i) x[i] = unif(rng);
    VectorXd p = subset_mass(table, x);
    double h = 1e-5;
    for (int i = 0; i < 6; ++i) {
      VectorXd xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      double fd = (log_weighted_gram_det(table, xp) - log_weighted_gram_det(table, xm)) / (2 * h);
      CHECK(p[i] == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("log objective is midpoint convex and scale invariant") {
  RankOneDatum d = blt::random_rank_one(3, 6, 77);
  MinorTable table = minor_table(d);
  d.c = blt::interior_exponents(table, 78);
  VectorXd shift = d.c.array().log();
  auto psi = [&](const VectorXd& x) {
    return log_weighted_gram_det(table, x, &shift) - d.c.dot(x);
  };
  std::mt19937_64 rng(79);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    VectorXd x(6), y(6);
    for (int i = 0; i < 6; ++i) {
      x[i] = unif(rng);
      y[i] = unif(rng);
    }
    CHECK(psi(0.5 * (x + y)) <= 0.5 * (psi(x) + psi(y)) + 1e-10);
    CHECK(psi(x + VectorXd::Constant(6, 3.7)) == doctest::Approx(psi(x)).epsilon(1e-9));
  }
}

TEST_CASE("gaussian product ratio at the optimum equals the upper constant") {
  for (const RankOneDatum& base : {blt::hexagon_datum(), blt::interior_datum()}) {
    MinorTable table = minor_table(base);
    GaussianOptimum opt = minimize(base, table, base.c);
    REQUIRE(opt.converged);
    std::vector<MatrixXd> a;
    for (int i = 0; i < base.m(); ++i)
      a.push_back(opt.lambda[i] * MatrixXd::Identity(1, 1));
    CHECK(gaussian_J_value(as_blocks(base), a) == doctest::Approx(opt.F).epsilon(1e-7));
  }
}

TEST_CASE("block optimizer agrees with the rank-one program") {
  std::vector<RankOneDatum> data = {blt::hexagon_datum(), blt::interior_datum()};
  RankOneDatum rnd = blt::random_rank_one(2, 4, 8000);
  MinorTable rnd_table = minor_table(rnd);
  rnd.c = blt::interior_exponents(rnd_table, 8001);
  data.push_back(rnd);
  for (const RankOneDatum& d : data) {
    MinorTable table = minor_table(d);
    GaussianOptimum scalar = minimize(d, table, d.c);
    GaussianOptimum block = minimize_block(as_blocks(d));
    REQUIRE(scalar.converged);
    REQUIRE(block.converged);
    CHECK(block.D == doctest::Approx(scalar.D).epsilon(1e-6));
  }
}

TEST_CASE("paired identity blocks attain constant one") {
  for (int n = 1; n <= 3; ++n) {
    MultiDatum d;
    d.n = n;
    d.blocks.push_back({MatrixXd::Identity(n, n), 0.4});
    d.blocks.push_back({MatrixXd::Identity(n, n), 0.6});
    GaussianOptimum opt = minimize_block(d);
    CHECK(opt.converged);
    CHECK(opt.D == doctest::Approx(1.0).epsilon(1e-7));
    MatrixXd ratio = opt.blocks[0] * opt.blocks[1].inverse();
    CHECK((ratio - ratio(0, 0) * MatrixXd::Identity(n, n)).norm() < 1e-4);
  }
}

TEST_CASE("projection plus identity block attains constant one") {
  MultiDatum d;
  d.n = 2;
  d.blocks.push_back({(MatrixXd(1, 2) << 1, 0).finished(), 0.5});
  d.blocks.push_back({(MatrixXd(1, 2) << 0, 1).finished(), 0.5});
  d.blocks.push_back({MatrixXd::Identity(2, 2), 0.5});
  GaussianOptimum opt = minimize_block(d);
  CHECK(opt.converged);
  CHECK(opt.D == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("boundary exponents yield the limit constant without attainment") {
  RankOneDatum d = blt::boundary_datum();
  MinorTable table = minor_table(d);
  FeasibilityCertificate feas = feasibility(d, table);
  REQUIRE(feas.status == Feasibility::boundary);
  GaussianOptimum opt = minimize(d, table, d.c);
  CHECK(!opt.achieved);
  CHECK(opt.note.find("boundary") != std::string::npos);
  // Restricted to the active face {0,1},{0,2} the infimum is 2^{-1/4}.
  CHECK(opt.D == doctest::Approx(std::pow(2.0, -0.25)).epsilon(1e-6));
}

TEST_CASE("infeasible exponents report a zero constant") {
  double r = 1.0 / std::sqrt(2.0);
  RankOneDatum d = blt::make_datum(2, {{1, 0}, {0, 1}, {r, r}}, {1.5, 0.25, 0.25});
  MinorTable table = minor_table(d);
  GaussianOptimum opt = minimize(d, table, d.c);
  CHECK(opt.converged);
  CHECK(!opt.achieved);
  CHECK(opt.D == 0.0);
  CHECK(opt.E == 0.0);
  CHECK(std::isinf(opt.F));
}

TEST_CASE("uniqueness check compares scalars up to one common factor") {
  GaussianOptimum a, b;
  a.lambda = (VectorXd(3) << 1.0, 2.0, 3.0).finished();
  b.lambda = (VectorXd(3) << 2.0, 4.0, 6.0).finished();
  auto [same, ratio] = uniqueness_check(a, b);
  CHECK(same);
  CHECK(ratio == doctest::Approx(2.0).epsilon(1e-12));
  b.lambda[2] = 7.0;
  CHECK(!uniqueness_check(a, b).first);
}

TEST_CASE("randomized restarts land on the same scalars") {
  RankOneDatum d = blt::interior_datum();
  MinorTable table = minor_table(d);
  GaussianOptimum base = minimize(d, table, d.c);
  for (int k = 1; k <= 3; ++k) {
    MinimizeOptions opts;
    opts.randomize_start = true;
    opts.seed = 90 + k;
    GaussianOptimum run = minimize(d, table, d.c, opts);
    REQUIRE(run.converged);
    auto [same, ratio] = uniqueness_check(base, run, 1e-6);
    CHECK(same);
    CHECK(run.D == doctest::Approx(base.D).epsilon(1e-9));
  }
}

TEST_CASE("coherent translations keep the product ratio extremal") {
  RankOneDatum d = blt::hexagon_datum();
  MultiDatum multi = as_blocks(d);
  MinorTable table = minor_table(d);
  GaussianOptimum opt = minimize(d, table, d.c);
  REQUIRE(opt.converged);
  FunctionalOptions fo;
  fo.grid = 192;

  ExtremizerParams params;
  params.y = (VectorXd(2) << 0.3, -0.2).finished();
  std::vector<GridFunction> h;
  for (const auto& desc : extremizer_family(d, opt, Side::BL, params))
    h.push_back(descriptor_grid(desc, 160));
  IntegralEstimate est = eval_J(multi, h, fo);
  double ratio = est.value / mass_power(multi, h);
  CHECK(std::abs(ratio - opt.F) <= 3 * est.error / mass_power(multi, h) + 1e-4);

  // An incoherent shift of one factor strictly lowers the product integral.
  h[0].origin[0] += 0.8;
  IntegralEstimate off = eval_J(multi, h, fo);
  CHECK(off.value / mass_power(multi, h) < opt.F - 0.05);
}

TEST_CASE("independent translations keep the splitting ratio extremal") {
  RankOneDatum d = blt::hexagon_datum();
  MultiDatum multi = as_blocks(d);
  MinorTable table = minor_table(d);
  GaussianOptimum opt = minimize(d, table, d.c);
  REQUIRE(opt.converged);
  ExtremizerParams params;
  params.t = (VectorXd(3) << 0.5, -0.3, 0.1).finished();
  std::vector<GridFunction> f;
  for (const auto& desc : extremizer_family(d, opt, Side::RBL, params))
    f.push_back(descriptor_grid(desc, 160));
  FunctionalOptions fo;
  fo.grid = 192;
  IntegralEstimate est = eval_I(multi, f, fo);
  double ratio = est.value / mass_power(multi, f);
  CHECK(std::abs(ratio - opt.E) <= 3 * est.error / mass_power(multi, f) + 1e-3);
}

TEST_CASE("rotation rows give a generalized young constant of one") {
  double theta = 0.6;
  MatrixXd v(2, 2);
  v << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  double s2 = std::sin(theta) * std::sin(theta);
  double c2 = std::cos(theta) * std::cos(theta);
  VectorXd p(2);
  p << 2.0 / (2.0 - s2), 2.0 / (2.0 - c2);
  YoungResult res = young_constant(v, 1, 2.0, p);
  CHECK(res.feasibility.status == Feasibility::relative_interior);
  REQUIRE(res.opt.converged);
  CHECK(res.datum.c[0] == doctest::Approx(s2).epsilon(1e-12));
  CHECK(res.datum.c[1] == doctest::Approx(c2).epsilon(1e-12));
  CHECK(res.opt.D == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(res.opt.lambda[0] == doctest::Approx(res.opt.lambda[1]).epsilon(1e-5));
  CHECK(res.certificate.certified);
}

TEST_CASE("isotropic row frames give a certified young constant of one") {
  BallDecomposition b = random_ball_decomposition(2, 5, 31);
  MatrixXd lift = orthonormal_lift(b);
  MatrixXd v(5, 5);
  v.leftCols(3) = lift.bottomRows(3).transpose();
  v.rightCols(2) = lift.topRows(2).transpose();
  VectorXd p(5);
  for (int i = 0; i < 5; ++i) p[i] = 1.0 / (1.0 - b.c[i] / 2.0);
  YoungResult res = young_constant(v, 3, 2.0, p);
  REQUIRE(res.opt.converged);
  CHECK(res.opt.D == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(res.certificate.certified);
  for (int i = 1; i < 5; ++i)
    CHECK(res.opt.lambda[i] == doctest::Approx(res.opt.lambda[0]).epsilon(1e-4));
}

TEST_CASE("young rejects non-orthogonal matrices and wrong scalings") {
  MatrixXd v = MatrixXd::Identity(2, 2);
  v(0, 1) = 0.1;
  VectorXd p = VectorXd::Constant(2, 4.0 / 3.0);
  CHECK_THROWS_AS(young_constant(v, 1, 2.0, p), std::invalid_argument);

  MatrixXd rot(2, 2);
  rot << std::cos(0.3), -std::sin(0.3), std::sin(0.3), std::cos(0.3);
  VectorXd bad = VectorXd::Constant(2, 1.1);
  CHECK_THROWS_AS(young_constant(rot, 1, 2.0, bad), std::invalid_argument);
}
