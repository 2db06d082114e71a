#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "rotsdp/solver.hpp"

namespace rotsdp {

struct RankPolicy {
  double floor_rel = 1e-7;   // absolute eigenvalue floor: floor_rel * lambda_max
  double min_margin = 10.0;  // below this ratio a rank decision is low-confidence
};

struct RankDecision {
  int rank = 0;
  Eigen::VectorXd spectrum;  // descending
  double margin = 0.0;       // ratio across the gap that fixed the rank
};

// Rank = eigenvalue count above the cut with the largest relative gap in the
// sorted spectrum, never cutting above the absolute floor. Indefinite input
// beyond -1e-9 raises NotPSD.
RankDecision numerical_rank(const Eigen::MatrixXd& X, const RankPolicy& policy = {});

struct ExtractedSolution {
  std::vector<RotationElement> rotations;
  Eigen::VectorXd r;  // lifted embedding of the rounded rotations
  double feasible_cost = 0.0;
};

// Leading eigenvector, rescaled so the homogenization coordinate is one, then
// projected to the variety. Always returns a feasible upper bound; a leading
// eigenvector with |w| < 1e-8 raises RoundingDegenerate.
ExtractedSolution extract_solution(const Eigen::MatrixXd& X, const StandardFormProblem& problem);

// Re-solves over the optimal face (tr(M X) pinned to the attained optimum)
// minimizing tr(W X) for random PSD W; three probes, minimal-rank result.
// On face-solve failure returns the input with refine_inconclusive set.
SdpSolution refine_to_extreme_point(const StandardFormProblem& problem,
                                    const SdpSolution& solution,
                                    const SdpSettings& settings = {},
                                    std::uint64_t seed = 0);

enum class Verdict { Tight, NonTight, Inconclusive };
std::string to_string(Verdict v);

struct TightnessReport {
  int rank = 0;
  int raw_rank = 0;  // before extreme-point refinement
  Eigen::VectorXd eigen_spectrum;
  double rank_margin = 0.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  double rel_gap = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  std::vector<RotationElement> rounded_solution;
  SolveStatus solve_status = SolveStatus::NumericalFailure;
  bool refine_failed = false;
  int iterations = 0;
};

struct AnalysisSettings {
  SdpSettings solver;
  RankPolicy rank_policy;
  double tight_gap = 1e-6;     // Tight:    rank 1 and rel_gap <= tight_gap
  double nontight_gap = 1e-5;  // NonTight: rank > 1 and rel_gap > nontight_gap
  bool refine = true;
  std::uint64_t seed = 0;
};

// solve -> refine_to_extreme_point -> numerical_rank -> extract_solution.
TightnessReport tightness_report(const StandardFormProblem& problem,
                                 const AnalysisSettings& settings = {});

struct OracleSettings {
  int multistarts = 2000;
  std::uint64_t seed = 0;
};

struct OracleResult {
  double value = 0.0;
  std::vector<RotationElement> argmin;
};

// Brute-force reference minimizer: dense angle grid plus exact coordinate
// descent over SO2; multistart projected descent with Newton polish in
// quaternion coordinates over SO3/Quat (probabilistic for those domains).
// Averaging objectives are gauge-fixed by pinning the first rotation.
// Supported: SO2 n <= 4, SO3/Quat n <= 2 (one more copy when gauge-fixed).
OracleResult oracle_minimize(const StandardFormProblem& problem,
                             const OracleSettings& settings = {});

// d vec(R)/d q at a unit quaternion (column-major 9 x 4), for the homogeneous
// quadratic form of the rotation.
Eigen::Matrix<double, 9, 4> so3_vec_jacobian(const Eigen::Vector4d& q);

}  // namespace rotsdp
