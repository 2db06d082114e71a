#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "rotsdp/domains.hpp"
#include "rotsdp/rng.hpp"

using namespace rotsdp;

namespace {

std::vector<DomainSpec> all_specs(int max_n) {
  std::vector<DomainSpec> specs;
  for (auto kind : {RotationKind::SO2, RotationKind::SO3, RotationKind::Quat})
    for (int n = 1; n <= max_n; ++n) specs.push_back(DomainSpec::make(kind, n));
  return specs;
}

}  // namespace

TEST_CASE("domain metadata reproduces the degree/codimension table") {
  auto so3_1 = DomainSpec::make(RotationKind::SO3, 1);
  CHECK(so3_1.ambient_dim == 9);
  CHECK(so3_1.lifted_dim == 10);
  CHECK(so3_1.variety_dim == 3);
  CHECK(so3_1.codim == 6);
  CHECK(so3_1.degree == 8);
  CHECK(so3_1.minimality == Minimality::AlmostMinimal);

  CHECK(DomainSpec::make(RotationKind::SO2, 1).minimality == Minimality::Minimal);
  CHECK(DomainSpec::make(RotationKind::Quat, 1).minimality == Minimality::Minimal);
  CHECK(DomainSpec::make(RotationKind::SO2, 2).minimality == Minimality::AlmostMinimal);
  CHECK(DomainSpec::make(RotationKind::Quat, 2).minimality == Minimality::AlmostMinimal);
  CHECK(DomainSpec::make(RotationKind::SO3, 2).minimality == Minimality::NotMinimal);
  for (auto kind : {RotationKind::SO2, RotationKind::SO3, RotationKind::Quat})
    CHECK(DomainSpec::make(kind, 3).minimality == Minimality::NotMinimal);

  CHECK(DomainSpec::make(RotationKind::SO2, 2).ambient_dim == 4);
  CHECK(DomainSpec::make(RotationKind::Quat, 3).ambient_dim == 12);
  CHECK(DomainSpec::make(RotationKind::SO3, 2).degree == 64);
}

TEST_CASE("constraint counts and the SO2 single constraint") {
  auto so2 = DomainSpec::make(RotationKind::SO2, 1);
  const auto& cs2 = constraint_matrices(so2);
  REQUIRE(cs2.size() == 1);
  Eigen::Matrix3d expected;
  expected << 1, 0, 0, 0, 1, 0, 0, 0, -1;
  CHECK((cs2[0] - expected).norm() == doctest::Approx(0.0));

  CHECK(constraint_matrices(DomainSpec::make(RotationKind::SO3, 1)).size() == 20);
  CHECK(constraint_matrices(DomainSpec::make(RotationKind::SO3, 2)).size() == 40);
  CHECK(constraint_matrices(DomainSpec::make(RotationKind::Quat, 3)).size() == 3);
  CHECK(constraint_matrices(DomainSpec::make(RotationKind::SO2, 4)).size() == 4);
}

TEST_CASE("constraints are symmetric, independent, and vanish at feasible points") {
  for (const auto& spec : all_specs(3)) {
    const auto& cs = constraint_matrices(spec);
    CHECK(static_cast<int>(cs.size()) ==
          (spec.kind == RotationKind::SO3 ? 20 * spec.n : spec.n));

    Eigen::MatrixXd stacked(cs.size(), spec.lifted_dim * spec.lifted_dim);
    for (size_t i = 0; i < cs.size(); ++i) {
      CHECK((cs[i] - cs[i].transpose()).norm() == doctest::Approx(0.0));
      stacked.row(i) = Eigen::Map<const Eigen::VectorXd>(cs[i].data(), cs[i].size());
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(stacked.transpose());
    qr.setThreshold(1e-10);
    CHECK(qr.rank() == static_cast<int>(cs.size()));

    auto rng = make_rng(7 + spec.n);
    for (int t = 0; t < 20; ++t) {
      Eigen::VectorXd r = embed(random_rotations(spec, rng), spec);
      for (const auto& A : cs) CHECK(std::abs(r.dot(A * r)) < 1e-12);
    }
  }
}

TEST_CASE("embedding layouts") {
  auto so3 = DomainSpec::make(RotationKind::SO3, 1);
  Eigen::VectorXd r = embed({RotationElement::identity(RotationKind::SO3)}, so3);
  Eigen::VectorXd expected(10);
  expected << 1, 0, 0, 0, 1, 0, 0, 0, 1, 1;
  CHECK((r - expected).norm() == doctest::Approx(0.0));

  auto so2 = DomainSpec::make(RotationKind::SO2, 1);
  Eigen::VectorXd r2 = embed({RotationElement::so2(0.0)}, so2);
  CHECK(r2.size() == 3);
  CHECK((r2 - Eigen::Vector3d(1, 0, 1)).norm() == doctest::Approx(0.0));

  auto qt = DomainSpec::make(RotationKind::Quat, 1);
  Eigen::VectorXd rq = embed({RotationElement::quat(Eigen::Vector4d(1, 0, 0, 0))}, qt);
  CHECK(rq.size() == 5);
  CHECK(rq[0] == 1.0);
  CHECK(rq[4] == 1.0);

  CHECK_THROWS_AS(embed({RotationElement::so2(0.3)}, so3), KindMismatch);
  CHECK_THROWS_AS(embed({}, so2), KindMismatch);
}

TEST_CASE("random rotations: determinism, invariants, and uniform-angle means") {
  for (const auto& spec : all_specs(2)) {
    auto a = random_rotations(spec, 42);
    auto b = random_rotations(spec, 42);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].satisfies_invariants(1e-12));
      CHECK((embed(a, spec) - embed(b, spec)).norm() == doctest::Approx(0.0));
    }
  }

  // law of large numbers for the SO2 sampler against the uniform-angle model
  auto so2 = DomainSpec::make(RotationKind::SO2, 1);
  double mc = 0.0, ms = 0.0;
  const int trials = 10000;
  auto rng = make_rng(3);
  for (int t = 0; t < trials; ++t) {
    auto e = random_rotations(so2, rng);
    mc += std::cos(e[0].angle);
    ms += std::sin(e[0].angle);
  }
  CHECK(std::abs(mc / trials) < 0.05);
  CHECK(std::abs(ms / trials) < 0.05);
}

TEST_CASE("feasibility residual separates feasible from infeasible points") {
  auto so3 = DomainSpec::make(RotationKind::SO3, 1);
  CHECK(feasibility_residual(embed({RotationElement::identity(RotationKind::SO3)}, so3), so3) ==
        doctest::Approx(0.0));
  auto rng = make_rng(11);
  for (int t = 0; t < 50; ++t) {
    auto e = random_rotations(so3, rng);
    CHECK(feasibility_residual(embed(e, so3), so3) < 1e-12);
  }
  CHECK(feasibility_residual(Eigen::VectorXd::Ones(10), so3) > 0.1);
}

TEST_CASE("1000 random feasible embeddings per spec stay within 1e-12") {
  for (const auto& spec : all_specs(3)) {
    auto rng = make_rng(1000 + spec.n);
    for (int t = 0; t < 1000; ++t) {
      Eigen::VectorXd r = embed(random_rotations(spec, rng), spec);
      CHECK(feasibility_residual(r, spec) < 1e-12);
    }
  }
}

TEST_CASE("projection to the variety") {
  auto so3 = DomainSpec::make(RotationKind::SO3, 1);
  auto rng = make_rng(5);

  // idempotence on feasible input
  auto e = random_rotations(so3, rng);
  Eigen::VectorXd r = embed(e, so3);
  auto back = project_to_variety(r.head(9), so3);
  CHECK((back[0].R - e[0].R).norm() < 1e-12);

  // positive scaling invariance of the polar factor
  Eigen::VectorXd twice = 2.0 * embed({RotationElement::identity(RotationKind::SO3)}, so3).head(9);
  auto id = project_to_variety(twice, so3);
  CHECK((id[0].R - Eigen::Matrix3d::Identity()).norm() < 1e-12);

  // nearest-rotation property against a random-sampling oracle
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd blob(9);
    for (int i = 0; i < 9; ++i) blob[i] = gauss(rng);
    Eigen::Matrix3d B = Eigen::Map<Eigen::Matrix3d>(blob.data());
    Eigen::Matrix3d P = project_to_variety(blob, so3)[0].R;
    const double d_proj = (B - P).norm();
    for (int k = 0; k < 100; ++k) {
      Eigen::Matrix3d Rk = random_rotations(so3, rng)[0].R;
      CHECK(d_proj <= (B - Rk).norm() + 1e-12);
    }
  }

  CHECK_THROWS_AS(project_to_variety(Eigen::VectorXd::Zero(9), so3), DegenerateInput);
  auto qt = DomainSpec::make(RotationKind::Quat, 1);
  CHECK_THROWS_AS(project_to_variety(Eigen::VectorXd::Zero(4), qt), DegenerateInput);
}

TEST_CASE("quaternion multiplication matrix") {
  CHECK((quaternion_matrix(Eigen::Vector4d(1, 0, 0, 0)) - Eigen::Matrix4d::Identity()).norm() ==
        doctest::Approx(0.0));

  auto rng = make_rng(17);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    Eigen::Vector4d u, v;
    for (int i = 0; i < 4; ++i) u[i] = gauss(rng), v[i] = gauss(rng);
    u.normalize();
    v.normalize();

    CHECK((quaternion_matrix(u).transpose() * quaternion_matrix(u) - Eigen::Matrix4d::Identity())
              .norm() < 1e-12);

    // compose via rotation matrices and convert back: equal up to global sign
    Eigen::Vector4d uv = quaternion_matrix(u) * v;
    Eigen::Vector4d ref = rotation_to_quat(quat_to_rotation(u) * quat_to_rotation(v));
    const double diff = std::min((uv - ref).norm(), (uv + ref).norm());
    CHECK(diff < 1e-12);

    // right-multiplication companion
    CHECK((quaternion_matrix(u) * v - quaternion_right_matrix(v) * u).norm() < 1e-12);
  }

  CHECK_THROWS_AS(quaternion_matrix(Eigen::Vector4d(1, 1, 0, 0)), InvalidQuaternion);
}

TEST_CASE("tangent bases are orthonormal and annihilate constraint gradients") {
  for (const auto& spec : all_specs(2)) {
    auto rng = make_rng(23 + static_cast<int>(spec.kind));
    for (int t = 0; t < 10; ++t) {
      auto e = random_rotations(spec, rng);
      Eigen::MatrixXd T = tangent_basis(e, spec);
      REQUIRE(T.cols() == spec.variety_dim);
      CHECK((T.transpose() * T - Eigen::MatrixXd::Identity(T.cols(), T.cols())).norm() < 1e-10);
      Eigen::VectorXd r = embed(e, spec);
      for (const auto& A : constraint_matrices(spec)) {
        Eigen::VectorXd g = 2.0 * (A * r);
        CHECK((g.transpose() * T).cwiseAbs().maxCoeff() < 1e-10);
      }
      CHECK(T.row(spec.lifted_dim - 1).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    }
  }

  // SO3 identity: directions are vectorized skew-symmetric matrices
  auto so3 = DomainSpec::make(RotationKind::SO3, 1);
  Eigen::MatrixXd T = tangent_basis({RotationElement::identity(RotationKind::SO3)}, so3);
  for (int c = 0; c < 3; ++c) {
    Eigen::Matrix3d W = Eigen::Map<Eigen::Matrix3d>(T.col(c).head(9).data());
    CHECK((W + W.transpose()).norm() < 1e-12);
  }

  // SO2: single direction proportional to (-s, c, 0)
  auto so2 = DomainSpec::make(RotationKind::SO2, 1);
  const double th = 0.7;
  Eigen::MatrixXd T2 = tangent_basis({RotationElement::so2(th)}, so2);
  Eigen::Vector3d dir(-std::sin(th), std::cos(th), 0.0);
  CHECK(std::abs(std::abs(T2.col(0).dot(dir)) - 1.0) < 1e-12);

  // Quat: three directions orthogonal to (q, 0)
  auto qt = DomainSpec::make(RotationKind::Quat, 1);
  auto qe = random_rotations(qt, 99);
  Eigen::MatrixXd Tq = tangent_basis(qe, qt);
  Eigen::VectorXd q_lift = embed(qe, qt);
  q_lift[4] = 0.0;
  CHECK((q_lift.transpose() * Tq).cwiseAbs().maxCoeff() < 1e-12);
}
