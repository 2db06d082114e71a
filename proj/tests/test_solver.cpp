#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "rotsdp/problems.hpp"
#include "rotsdp/rng.hpp"
#include "rotsdp/solver.hpp"

using namespace rotsdp;

namespace {

StandardFormProblem problem_with_matrix(const DomainSpec& spec, const Eigen::MatrixXd& M) {
  StandardFormProblem p;
  p.spec = spec;
  p.M = M;
  return p;
}

}  // namespace

TEST_CASE("normalization objective solves to 1") {
  for (auto kind : {RotationKind::SO2, RotationKind::SO3, RotationKind::Quat}) {
    auto spec = DomainSpec::make(kind, 1);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(spec.lifted_dim, spec.lifted_dim);
    M(spec.lifted_dim - 1, spec.lifted_dim - 1) = 1.0;
    auto sol = solve_relaxation(problem_with_matrix(spec, M));
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.primal_obj == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sol.dual_obj == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("identity objective over SO2 is forced to 2 by the unit constraint") {
  auto spec = DomainSpec::make(RotationKind::SO2, 1);
  auto sol = solve_relaxation(problem_with_matrix(spec, Eigen::MatrixXd::Identity(3, 3)));
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.primal_obj == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("relaxation lower-bounds sampled rotations on random SO3 problems") {
  auto spec = DomainSpec::make(RotationKind::SO3, 1);
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    auto prob = random_problem(spec, seed);
    auto sol = solve_relaxation(prob);
    REQUIRE(sol.status == SolveStatus::Optimal);
    auto rng = make_rng(seed + 100);
    double best = 1e300;
    for (int t = 0; t < 100000; ++t) {
      Eigen::VectorXd r = embed(random_rotations(spec, rng), spec);
      best = std::min(best, prob.objective(r));
    }
    CHECK(sol.primal_obj <= best + 1e-7);
  }
}

TEST_CASE("weak duality and lower-bound property across specs") {
  for (auto kind : {RotationKind::SO2, RotationKind::SO3, RotationKind::Quat}) {
    for (int n : {1, 2}) {
      auto spec = DomainSpec::make(kind, n);
      for (int k = 0; k < (kind == RotationKind::SO3 && n == 2 ? 5 : 20); ++k) {
        auto prob = random_problem(spec, 1000 * n + k);
        auto sol = solve_relaxation(prob);
        if (sol.status != SolveStatus::Optimal) continue;  // counted elsewhere
        CHECK(sol.dual_obj <= sol.primal_obj + 1e-6 * std::max(1.0, std::abs(sol.primal_obj)));
        auto rng = make_rng(77 + k);
        for (int t = 0; t < 200; ++t) {
          Eigen::VectorXd r = embed(random_rotations(spec, rng), spec);
          CHECK(sol.primal_obj <= prob.objective(r) + 1e-7 * std::max(1.0, std::abs(prob.objective(r))));
        }
      }
    }
  }
}

TEST_CASE("solution invariants on Optimal status") {
  auto spec = DomainSpec::make(RotationKind::SO3, 1);
  const auto& constraints = constraint_matrices(spec);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto prob = random_problem(spec, seed);
    auto sol = solve_relaxation(prob);
    REQUIRE(sol.status == SolveStatus::Optimal);

    CHECK(std::abs(sol.X(9, 9) - 1.0) < 1e-7);
    for (const auto& A : constraints) CHECK(std::abs((A.array() * sol.X.array()).sum()) < 1e-7);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esX(sol.X, Eigen::EigenvaluesOnly);
    CHECK(esX.eigenvalues().minCoeff() > -1e-8);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esS(sol.S, Eigen::EigenvaluesOnly);
    CHECK(esS.eigenvalues().minCoeff() > -1e-7 * std::max(1.0, prob.M.norm()));

    // S reproduces M - sum lambda_i A_i - gamma ee^T
    Eigen::MatrixXd Scheck = prob.M;
    for (size_t i = 0; i < constraints.size(); ++i) Scheck -= sol.lambda[i] * constraints[i];
    Scheck(9, 9) -= sol.gamma;
    CHECK((Scheck - sol.S).norm() < 1e-6 * std::max(1.0, prob.M.norm()));

    const double gap = std::abs(sol.primal_obj - sol.dual_obj);
    CHECK(gap <= 1e-6 * (1.0 + std::abs(sol.primal_obj) + std::abs(sol.dual_obj)));
  }
}

TEST_CASE("sos certificate reconstructs S and evaluates as a sum of squares") {
  auto spec = DomainSpec::make(RotationKind::SO3, 1);
  auto prob = random_problem(spec, 5);
  auto sol = solve_relaxation(prob);
  REQUIRE(sol.status == SolveStatus::Optimal);
  auto factors = sos_certificate(sol, prob);

  Eigen::MatrixXd recon = Eigen::MatrixXd::Zero(10, 10);
  for (const auto& a : factors) recon += a * a.transpose();
  CHECK((recon - sol.S).norm() < 1e-8 * std::max(1.0, sol.S.norm()));

  // r^T M r - gamma* = sum_j (a_j^T r)^2 on the variety (tight instance)
  auto rng = make_rng(6);
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd r = embed(random_rotations(spec, rng), spec);
    double sos = 0.0;
    for (const auto& a : factors) sos += std::pow(a.dot(r), 2);
    CHECK(prob.objective(r) - sol.gamma == doctest::Approx(sos).epsilon(1e-6).scale(1.0));
  }

  // synthetic cases: S = 0 and S = v v^T
  SdpSolution fake;
  fake.status = SolveStatus::Optimal;
  fake.S = Eigen::MatrixXd::Zero(4, 4);
  CHECK(sos_certificate(fake, prob).empty());
  Eigen::VectorXd v(4);
  v << 1, -2, 0.5, 3;
  fake.S = v * v.transpose();
  auto fs = sos_certificate(fake, prob);
  REQUIRE(fs.size() == 1);
  CHECK(std::min((fs[0] - v).norm(), (fs[0] + v).norm()) < 1e-10);

  fake.S = -Eigen::MatrixXd::Identity(4, 4);
  CHECK_THROWS_AS(sos_certificate(fake, prob), CertificateInvalid);
}

TEST_CASE("preprocess removes duplicated constraints without changing the optimum") {
  auto spec = DomainSpec::make(RotationKind::SO3, 1);
  const auto& cs = constraint_matrices(spec);

  auto red = preprocess(cs);
  CHECK(red.A.size() == cs.size());  // already independent
  CHECK(red.kept.size() == cs.size());

  std::vector<Eigen::MatrixXd> dup = cs;
  dup.push_back(cs[3]);
  dup.push_back(2.0 * cs[7] - cs[2]);
  auto red2 = preprocess(dup);
  CHECK(red2.A.size() == cs.size());

  // every dropped matrix lies in the span of the kept ones
  {
    Eigen::MatrixXd kept(red2.A.size(), 100);
    for (size_t i = 0; i < red2.A.size(); ++i)
      kept.row(i) = Eigen::Map<const Eigen::VectorXd>(red2.A[i].data(), 100);
    Eigen::MatrixXd kt = kept.transpose();
    for (size_t i = 0; i < dup.size(); ++i) {
      Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(dup[i].data(), 100);
      Eigen::VectorXd resid = v - kt * kt.colPivHouseholderQr().solve(v);
      CHECK(resid.norm() < 1e-10 * v.norm());
    }
  }

  // reduced system yields identical optimal values
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto prob = random_problem(spec, 900 + seed);
    Eigen::MatrixXd ee = Eigen::MatrixXd::Zero(10, 10);
    ee(9, 9) = 1.0;
    std::vector<Eigen::MatrixXd> a1 = preprocess(dup).A, a2 = red2.A;
    a1.push_back(ee);
    a2.push_back(ee);
    Eigen::VectorXd b1 = Eigen::VectorXd::Zero(a1.size());
    b1[a1.size() - 1] = 1.0;
    Eigen::VectorXd b2 = Eigen::VectorXd::Zero(a2.size());
    b2[a2.size() - 1] = 1.0;
    auto s1 = solve_sdp(prob.M, a1, b1);
    auto s2 = solve_relaxation(prob);
    REQUIRE(s1.status == SolveStatus::Optimal);
    REQUIRE(s2.status == SolveStatus::Optimal);
    CHECK(s1.primal_obj == doctest::Approx(s2.primal_obj).epsilon(1e-8).scale(1.0));
  }
}
