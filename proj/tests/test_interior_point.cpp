#include "mrn/conic_program.hpp"
#include "mrn/errors.hpp"
#include "mrn/interior_point.hpp"
#include "mrn/spectral_graph.hpp"
#include "test_support.hpp"

#include "doctest.h"

#include <cmath>

using namespace mrn;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

AffineExpr expr(std::vector<std::pair<std::size_t, double>> terms, double c) {
  AffineExpr e;
  e.terms = std::move(terms);
  e.constant = c;
  return e;
}

}  // namespace

TEST_CASE("small LP") {
  // max x + y s.t. x, y >= 0, x + 2y <= 4, 3x + y <= 6  ->  (8/5, 6/5), value 14/5.
  ConicProgram p;
  const auto x = p.add_variable("x");
  const auto y = p.add_variable("y");
  p.set_objective(x, 1.0);
  p.set_objective(y, 1.0);
  p.add_inequality(expr({{x, 1.0}}, 0.0), "x>=0");
  p.add_inequality(expr({{y, 1.0}}, 0.0), "y>=0");
  p.add_inequality(expr({{x, -1.0}, {y, -2.0}}, 4.0), "c1");
  p.add_inequality(expr({{x, -3.0}, {y, -1.0}}, 6.0), "c2");
  const auto s = InteriorPointSolver().solve(p);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.x(0) == doctest::Approx(1.6).epsilon(1e-6));
  CHECK(s.x(1) == doctest::Approx(1.2).epsilon(1e-6));
  CHECK(s.objective == doctest::Approx(2.8).epsilon(1e-7));
}

TEST_CASE("equalities are eliminated") {
  // max x + y + z s.t. x + y + z = 1, x - y = 0, all >= 0, z <= 0.25.
  ConicProgram p;
  const auto x = p.add_variable("x");
  const auto y = p.add_variable("y");
  const auto z = p.add_variable("z");
  p.set_objective(x, 1.0);
  p.set_objective(y, 2.0);
  p.set_objective(z, 1.0);
  p.add_equality(expr({{x, 1.0}, {y, 1.0}, {z, 1.0}}, -1.0), "sum");
  p.add_equality(expr({{x, 1.0}, {y, -1.0}}, 0.0), "tie");
  p.add_inequality(expr({{z, 1.0}}, 0.0), "z>=0");
  p.add_inequality(expr({{z, -1.0}}, 0.25), "z<=");
  const auto s = InteriorPointSolver().solve(p);
  REQUIRE(s.status == SolveStatus::Optimal);
  // Objective = 3x + z with 2x + z = 1: maximized at z = 0, x = y = 1/2.
  CHECK(s.x(0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(s.x(1) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(std::abs(s.x(2)) < 1e-6);
}

TEST_CASE("minimum eigenvalue as an SDP") {
  // max t s.t. M - t I PSD yields lambda_min(M).
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + trial % 5;
    MatrixXd B(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) B(i, j) = g(rng);
    const MatrixXd M = B + B.transpose();
    ConicProgram p;
    const auto t = p.add_variable("t");
    p.set_objective(t, 1.0);
    p.add_psd({M, {{t, -MatrixXd::Identity(n, n)}}, "lmi"});
    const auto s = InteriorPointSolver().solve(p);
    REQUIRE(s.status == SolveStatus::Optimal);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(M);
    CHECK(s.x(0) == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-6));
  }
}

TEST_CASE("algebraic connectivity as an SDP over a shared kernel") {
  // max t s.t. L - t (I - 11'/n) PSD; the ones vector lies in the kernel of
  // every coefficient, so the block is compressed before solving.
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(trial % 6);
    const auto gph = testing::random_graph(rng, n, 0.4, true);
    const MatrixXd L = testing::dense_laplacian(n, testing::edge_vector(gph));
    const auto N = static_cast<Eigen::Index>(n);
    const MatrixXd C = MatrixXd::Identity(N, N) - MatrixXd::Constant(N, N, 1.0 / static_cast<double>(n));
    ConicProgram p;
    const auto t = p.add_variable("t");
    p.set_objective(t, 1.0);
    p.add_psd({L, {{t, -C}}, "conn"});
    const auto s = InteriorPointSolver().solve(p);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.x(0) == doctest::Approx(testing::lambda2_bruteforce(L)).epsilon(1e-6));
  }
}

TEST_CASE("coupled LMI and inequality") {
  // max x s.t. [[1, x], [x, 1]] PSD and x <= 0.5  ->  x = 0.5.
  ConicProgram p;
  const auto x = p.add_variable("x");
  p.set_objective(x, 1.0);
  MatrixXd F0 = MatrixXd::Identity(2, 2);
  MatrixXd F1(2, 2);
  F1 << 0, 1, 1, 0;
  p.add_psd({F0, {{x, F1}}, "disk"});
  p.add_inequality(expr({{x, -1.0}}, 0.5), "cap");
  auto s = InteriorPointSolver().solve(p);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.x(0) == doctest::Approx(0.5).epsilon(1e-6));

  // Without the cap the LMI alone gives x = 1.
  ConicProgram q;
  const auto xq = q.add_variable("x");
  q.set_objective(xq, 1.0);
  q.add_psd({F0, {{xq, F1}}, "disk"});
  s = InteriorPointSolver().solve(q);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.x(0) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("infeasible and unbounded programs are reported") {
  ConicProgram inf;
  const auto x = inf.add_variable("x");
  inf.set_objective(x, 1.0);
  inf.add_inequality(expr({{x, 1.0}}, -2.0), "x>=2");
  inf.add_inequality(expr({{x, -1.0}}, 1.0), "x<=1");
  CHECK(InteriorPointSolver().solve(inf).status == SolveStatus::Infeasible);

  ConicProgram unb;
  const auto y = unb.add_variable("y");
  unb.set_objective(y, 1.0);
  unb.add_inequality(expr({{y, 1.0}}, 0.0), "y>=0");
  CHECK(InteriorPointSolver().solve(unb).status == SolveStatus::Unbounded);
}

TEST_CASE("program validation") {
  ConicProgram p;
  const auto x = p.add_variable("x");
  p.add_inequality(expr({{x + 1, 1.0}}, 0.0), "bad");
  CHECK_THROWS_AS(p.validate(), InvalidSpec);

  ConicProgram q;
  const auto y = q.add_variable("y");
  MatrixXd asym(2, 2);
  asym << 1, 2, 0, 1;
  q.add_psd({MatrixXd::Identity(2, 2), {{y, asym}}, "asym"});
  CHECK_THROWS_AS(q.validate(), InvalidSpec);
  CHECK_THROWS_AS(InteriorPointSolver().solve(q), InvalidSpec);
}

TEST_CASE("solution satisfies every constraint when optimal") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    ConicProgram p;
    const int m = 3;
    for (int k = 0; k < m; ++k) p.add_variable("x" + std::to_string(k));
    for (int k = 0; k < m; ++k) {
      p.set_objective(static_cast<std::size_t>(k), u(rng));
      p.add_inequality(expr({{static_cast<std::size_t>(k), 1.0}}, 1.0), "lo");
      p.add_inequality(expr({{static_cast<std::size_t>(k), -1.0}}, 1.0), "hi");
    }
    MatrixXd F0 = 2.0 * MatrixXd::Identity(3, 3);
    std::vector<std::pair<std::size_t, MatrixXd>> coeffs;
    for (int k = 0; k < m; ++k) {
      MatrixXd B(3, 3);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) B(i, j) = u(rng);
      coeffs.emplace_back(static_cast<std::size_t>(k), B + B.transpose());
    }
    p.add_psd({F0, coeffs, "lmi"});
    const auto s = InteriorPointSolver().solve(p);
    REQUIRE(s.status == SolveStatus::Optimal);
    const auto v = p.violation(s.x);
    CHECK(v.inequality <= 1e-7);
    CHECK(v.psd <= 1e-7);
    // Feasible points sampled at random never beat the reported optimum.
    for (int k = 0; k < 200; ++k) {
      VectorXd z(m);
      for (int i = 0; i < m; ++i) z(i) = u(rng);
      const auto vz = p.violation(z);
      if (vz.psd > 0.0 || vz.inequality > 0.0) continue;
      CHECK(p.objective().dot(z) <= s.objective + 1e-7);
    }
  }
}
