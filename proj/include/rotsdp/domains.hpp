#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rotsdp/errors.hpp"

namespace rotsdp {

enum class RotationKind { SO2, SO3, Quat };

std::string to_string(RotationKind kind);
RotationKind rotation_kind_from_string(const std::string& name);

enum class Minimality { Minimal, AlmostMinimal, NotMinimal };
std::string to_string(Minimality m);

// Metadata for n copies of a rotation variety. SO2 uses the reduced (c, s)
// representation, so its ambient dimension is 2 per copy rather than 4.
struct DomainSpec {
  RotationKind kind = RotationKind::SO3;
  int n = 1;
  int ambient_dim = 9;
  int lifted_dim = 10;  // ambient_dim + 1 (homogenization coordinate w)
  int variety_dim = 3;
  int codim = 6;
  std::int64_t degree = 8;
  Minimality minimality = Minimality::AlmostMinimal;

  static DomainSpec make(RotationKind kind, int n);

  int per_copy_dim() const;
  int copy_offset(int copy) const { return copy * per_copy_dim(); }

  bool operator==(const DomainSpec& other) const {
    return kind == other.kind && n == other.n;
  }
};

// A single rotation in one of the three parametrizations. Quaternions are
// stored (w, x, y, z) with unit norm.
struct RotationElement {
  RotationKind kind = RotationKind::SO3;
  double angle = 0.0;
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector4d q = Eigen::Vector4d(1, 0, 0, 0);

  static RotationElement so2(double angle);
  static RotationElement so3(const Eigen::Matrix3d& R);
  static RotationElement quat(const Eigen::Vector4d& q);
  static RotationElement identity(RotationKind kind);

  bool satisfies_invariants(double tol = 1e-12) const;
  Eigen::Matrix2d matrix2() const;  // SO2 only
};

// Quaternion/rotation conversions, (w, x, y, z) convention.
Eigen::Matrix3d quat_to_rotation(const Eigen::Vector4d& q);
Eigen::Vector4d rotation_to_quat(const Eigen::Matrix3d& R);

// Left-multiplication matrix: Q(u) v is the quaternion of the composition of
// the rotations of u and v. Requires a unit quaternion (tolerance 1e-9).
Eigen::Matrix4d quaternion_matrix(const Eigen::Vector4d& u);
// Right-multiplication companion: Q(u) v == quaternion_right_matrix(v) u.
Eigen::Matrix4d quaternion_right_matrix(const Eigen::Vector4d& v);

// The l quadratic constraint matrices of the lifted standard form,
// l = n (SO2), 20n (SO3), n (Quat). Every returned matrix is symmetric with
// constants homogenized against w^2. Results are cached per spec.
const std::vector<Eigen::MatrixXd>& constraint_matrices(const DomainSpec& spec);

// Lifted embedding [coords of all copies; 1]. SO3 copies are stacked
// column-major.
Eigen::VectorXd embed(const std::vector<RotationElement>& elements,
                      const DomainSpec& spec);

// Haar-uniform per copy, deterministic given the seed.
std::vector<RotationElement> random_rotations(const DomainSpec& spec,
                                              std::uint64_t seed);
std::vector<RotationElement> random_rotations(const DomainSpec& spec,
                                              std::mt19937_64& rng);

// Nearest rotations to an ambient-coordinate vector (per copy; polar factor
// with determinant correction for SO(p), normalization for quaternions).
std::vector<RotationElement> project_to_variety(const Eigen::VectorXd& ambient,
                                                const DomainSpec& spec);

// max_i |r^T A_i r| + |r^T e - 1|; zero exactly on the feasible set.
double feasibility_residual(const Eigen::VectorXd& r, const DomainSpec& spec);

// Orthonormal basis (columns) of the tangent space of the lifted variety at
// embed(elements); variety_dim columns, each orthogonal to every constraint
// gradient 2 A_i r and to e.
Eigen::MatrixXd tangent_basis(const std::vector<RotationElement>& elements,
                              const DomainSpec& spec);

}  // namespace rotsdp
