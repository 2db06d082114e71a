#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "rotsdp/problems.hpp"

namespace rotsdp {

struct SdpSettings {
  double gap_tol = 1e-8;   // relative duality gap
  double feas_tol = 1e-9;  // primal/dual feasibility
  int max_iter = 200;
  double step_fraction = 0.98;  // fraction to boundary
};

enum class SolveStatus { Optimal, MaxIter, NumericalFailure };
std::string to_string(SolveStatus s);

// Solution of the generic dense cone program
//   min <C, X>  s.t.  <A_i, X> = b_i,  X >= 0.
struct ConicSolution {
  Eigen::MatrixXd X;
  Eigen::MatrixXd S;
  Eigen::VectorXd y;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  SolveStatus status = SolveStatus::NumericalFailure;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double rel_gap = 0.0;
};

// Infeasible-start primal-dual path following (Mehrotra predictor-corrector,
// symmetrized HKM direction, dense factorizations). Sized for matrix orders
// up to ~64.
ConicSolution solve_sdp(const Eigen::MatrixXd& C, const std::vector<Eigen::MatrixXd>& A,
                        const Eigen::VectorXd& b, const SdpSettings& settings = {});

struct SdpSolution {
  Eigen::MatrixXd X;
  double gamma = 0.0;
  Eigen::VectorXd lambda;  // indexed against constraint_matrices(spec)
  Eigen::MatrixXd S;       // M - sum_i lambda_i A_i - gamma e e^T
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  SolveStatus status = SolveStatus::NumericalFailure;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double rel_gap = 0.0;
};

// Solves the semidefinite relaxation of a standard-form problem and returns
// the primal matrix together with the dual certificate. The objective is
// Frobenius-normalized internally and all outputs are reported on the
// original scale. Never labels an infeasible iterate Optimal.
SdpSolution solve_relaxation(const StandardFormProblem& problem,
                             const SdpSettings& settings = {});

// Rank-1 factor vectors a_j with sum_j a_j a_j^T == S after eigenvalues in
// [-tol, 0] are clamped to zero. Eigenvalues below -tol raise
// CertificateInvalid; requires an Optimal solve.
std::vector<Eigen::VectorXd> sos_certificate(const SdpSolution& solution,
                                             const StandardFormProblem& problem,
                                             double tol = 1e-7);

struct ReducedConstraints {
  std::vector<Eigen::MatrixXd> A;  // linearly independent subset
  std::vector<int> kept;           // indices into the original list
  int original_count = 0;
};

// Drops linearly dependent constraint matrices (rank-revealing, pivot
// threshold 1e-10). Removed constraints get multiplier zero when results are
// mapped back.
ReducedConstraints preprocess(const std::vector<Eigen::MatrixXd>& constraints,
                              double threshold = 1e-10);
ReducedConstraints preprocess(const StandardFormProblem& problem);

}  // namespace rotsdp
