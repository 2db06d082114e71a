#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rotsdp/domains.hpp"

namespace rotsdp {

enum class Provenance {
  Random,
  Registration,
  Resectioning,
  HandEyeSO3,
  HandEyeQuat,
  RotAvgSO,
  RotAvgQuat,
  PointSetAvg,
  Counterexample,
};

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& name);

struct ProblemMeta {
  Provenance provenance = Provenance::Random;
  // Original application cost at a feasible r is
  //   cost_scale * (r^T M r) + cost_offset
  // (builders drop additive constants and positive scales, as the objective
  // derivations do).
  double cost_scale = 1.0;
  double cost_offset = 0.0;
  bool disconnected_graph = false;
  bool degenerate_data = false;
  std::string description;
};

// min r^T M r  s.t.  r^T A_i r = 0,  r^T e = 1  over the rotation variety.
struct StandardFormProblem {
  Eigen::MatrixXd M;
  DomainSpec spec;
  ProblemMeta meta;

  double objective(const Eigen::VectorXd& r) const { return r.dot(M * r); }
  double application_cost(const Eigen::VectorXd& r) const {
    return meta.cost_scale * objective(r) + meta.cost_offset;
  }
};

struct Correspondence {
  enum class Kind { Point, Line, Plane };
  Eigen::Vector3d x = Eigen::Vector3d::Zero();  // model point
  Eigen::Vector3d y = Eigen::Vector3d::Zero();  // target point / point on line or plane
  Kind kind = Kind::Point;
  Eigen::Vector3d v = Eigen::Vector3d::UnitX();  // line direction or plane normal, unit

  static Correspondence point(const Eigen::Vector3d& x, const Eigen::Vector3d& y);
  static Correspondence line(const Eigen::Vector3d& x, const Eigen::Vector3d& y,
                             const Eigen::Vector3d& direction);
  static Correspondence plane(const Eigen::Vector3d& x, const Eigen::Vector3d& y,
                              const Eigen::Vector3d& normal);
};

// Directed relative measurements: edge (i, j, R_ij) models R_i R_ij ~ R_j.
// Repeated edges are allowed (multigraph).
struct RelativeRotationGraph {
  struct Edge {
    int i = 0;
    int j = 0;
    RotationElement measurement;
  };
  int n = 0;
  std::vector<Edge> edges;

  bool connected() const;
};

// Registration over SO3 (3D data) or SO2 (planar data in the xy components of
// the correspondences; plane correspondences are 3D-only). Translation is
// eliminated in closed form.
StandardFormProblem registration_problem(const std::vector<Correspondence>& corrs,
                                         const DomainSpec& spec);

// Point-to-line registration with all lines through the camera center.
// rays: (unit direction, 3D point).
StandardFormProblem resectioning_problem(
    const std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>>& rays);

StandardFormProblem handeye_so3(
    const std::vector<std::pair<Eigen::Matrix3d, Eigen::Matrix3d>>& pairs);

StandardFormProblem handeye_quat(
    const std::vector<std::pair<Eigen::Vector4d, Eigen::Vector4d>>& pairs);

StandardFormProblem rotavg_so(const RelativeRotationGraph& graph, int p);

StandardFormProblem rotavg_quat(const RelativeRotationGraph& graph);

// Point sets as p x m matrices (p = 3 for SO3, p = 2 for SO2); the builder
// centers every set on its centroid before forming the coupling blocks.
StandardFormProblem pointset_avg(const std::vector<Eigen::MatrixXd>& point_sets,
                                 RotationKind kind = RotationKind::SO3);

// Symmetric M with i.i.d. uniform[-1,1] entries on and above the diagonal.
StandardFormProblem random_problem(const DomainSpec& spec, std::uint64_t seed);

// Small dense Kronecker product helper used by the builders.
Eigen::MatrixXd kron(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

// Bilinear coupling of two reduced SO2 copies: for 2x2 rotations
// R(a), R(b) and any 2x2 B, tr(R(a) B R(b)^T) = u_a^T so2_pair_form(B) u_b
// with u = (cos, sin).
Eigen::Matrix2d so2_pair_form(const Eigen::Matrix2d& B);

// R x as a linear map of u = (c, s): R x = so2_coeff(x) u.
Eigen::Matrix2d so2_coeff(const Eigen::Vector2d& x);

}  // namespace rotsdp
