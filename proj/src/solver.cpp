#include "rotsdp/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <limits>

namespace rotsdp {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::MaxIter: return "MaxIter";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
  }
  return "?";
}

namespace {

// Triplet view of a constraint matrix; the rotational constraints are sparse
// and the Schur complement assembly is the solver hot spot.
struct SparseView {
  std::vector<int> r, c;
  std::vector<double> v;

  explicit SparseView(const Eigen::MatrixXd& A) {
    for (int j = 0; j < A.cols(); ++j)
      for (int i = 0; i < A.rows(); ++i)
        if (A(i, j) != 0.0) {
          r.push_back(i);
          c.push_back(j);
          v.push_back(A(i, j));
        }
  }

  double dot(const Eigen::MatrixXd& V) const {
    double s = 0.0;
    for (size_t k = 0; k < v.size(); ++k) s += v[k] * V(r[k], c[k]);
    return s;
  }

  void add_to(Eigen::MatrixXd& out, double w) const {
    for (size_t k = 0; k < v.size(); ++k) out(r[k], c[k]) += w * v[k];
  }

  // X * A * Sinv for symmetric X, Sinv.
  Eigen::MatrixXd sandwich(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Sinv) const {
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(X.rows(), X.cols());
    for (size_t k = 0; k < v.size(); ++k) T += (v[k] * X.col(r[k])) * Sinv.row(c[k]);
    return T;
  }
};

Eigen::VectorXd apply_operator(const std::vector<SparseView>& A, const Eigen::MatrixXd& V) {
  Eigen::VectorXd out(A.size());
  for (size_t i = 0; i < A.size(); ++i) out[i] = A[i].dot(V);
  return out;
}

Eigen::MatrixXd apply_adjoint(const std::vector<SparseView>& A, const Eigen::VectorXd& y,
                              int n) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (size_t i = 0; i < A.size(); ++i) A[i].add_to(out, y[i]);
  return out;
}

// Largest alpha with P + alpha * dP >= 0, given the Cholesky factor of P.
double max_step(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::MatrixXd& dP) {
  const Eigen::MatrixXd L = llt.matrixL();
  Eigen::MatrixXd W = L.triangularView<Eigen::Lower>().solve(dP);
  W = L.triangularView<Eigen::Lower>().solve(W.transpose().eval());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (W + W.transpose()),
                                                    Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin >= -1e-14) return 1e16;
  return -1.0 / lmin;
}

}  // namespace

ConicSolution solve_sdp(const Eigen::MatrixXd& C_in, const std::vector<Eigen::MatrixXd>& A_in,
                        const Eigen::VectorXd& b_in, const SdpSettings& settings) {
  const int n = static_cast<int>(C_in.rows());
  const int m = static_cast<int>(A_in.size());
  if (m == 0 || b_in.size() != m) throw Error("solve_sdp: constraint/right-hand-side mismatch");

  // Scale the objective and each constraint to unit Frobenius norm.
  const double c_scale = std::max(C_in.norm(), 1e-12);
  Eigen::MatrixXd C = C_in / c_scale;
  std::vector<SparseView> A;
  A.reserve(m);
  Eigen::VectorXd b(m), a_scale(m);
  for (int i = 0; i < m; ++i) {
    a_scale[i] = std::max(A_in[i].norm(), 1e-12);
    A.emplace_back(Eigen::MatrixXd(A_in[i] / a_scale[i]));
    b[i] = b_in[i] / a_scale[i];
  }

  Eigen::MatrixXd X = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);

  ConicSolution best;
  double best_score = std::numeric_limits<double>::infinity();
  const double b_norm = 1.0 + b.norm();
  const double c_norm = 1.0 + C.norm();

  auto record = [&](SolveStatus status, int iter, double pres, double dres, double gap) {
    ConicSolution out;
    out.X = X;
    out.S = S * c_scale;
    out.y = y;
    for (int i = 0; i < m; ++i) out.y[i] = y[i] * c_scale / a_scale[i];
    out.primal_obj = (C.array() * X.array()).sum() * c_scale;
    out.dual_obj = b.dot(y) * c_scale;
    out.status = status;
    out.iterations = iter;
    out.primal_residual = pres;
    out.dual_residual = dres;
    out.rel_gap = gap;
    return out;
  };

  SolveStatus final_status = SolveStatus::MaxIter;
  int iter = 0;
  for (iter = 0; iter < settings.max_iter; ++iter) {
    Eigen::VectorXd rp = b - apply_operator(A, X);
    Eigen::MatrixXd Rd = C - apply_adjoint(A, y, n) - S;

    const double pobj = (C.array() * X.array()).sum();
    const double dobj = b.dot(y);
    const double pres = rp.norm() / b_norm;
    const double dres = Rd.norm() / c_norm;
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

    const double score = std::max({pres, dres, gap});
    if (score < best_score) {
      best_score = score;
      best = record(SolveStatus::MaxIter, iter, pres, dres, gap);
    }

    if (pres <= settings.feas_tol && dres <= settings.feas_tol && gap <= settings.gap_tol) {
      final_status = SolveStatus::Optimal;
      best = record(SolveStatus::Optimal, iter, pres, dres, gap);
      break;
    }
    if (!X.allFinite() || !S.allFinite() || !y.allFinite() || X.trace() > 1e12 ||
        y.lpNorm<Eigen::Infinity>() > 1e12) {
      final_status = SolveStatus::NumericalFailure;
      break;
    }

    Eigen::LLT<Eigen::MatrixXd> lltX(X), lltS(S);
    if (lltX.info() != Eigen::Success) {
      X += (1e-12 * std::max(1.0, X.trace() / n)) * Eigen::MatrixXd::Identity(n, n);
      lltX.compute(X);
    }
    if (lltS.info() != Eigen::Success) {
      S += (1e-12 * std::max(1.0, S.trace() / n)) * Eigen::MatrixXd::Identity(n, n);
      lltS.compute(S);
    }
    if (lltX.info() != Eigen::Success || lltS.info() != Eigen::Success) {
      final_status = SolveStatus::NumericalFailure;
      break;
    }

    const double mu = (X.array() * S.array()).sum() / n;
    const double frac = settings.step_fraction;
    Eigen::MatrixXd Sinv = lltS.solve(Eigen::MatrixXd::Identity(n, n));
    Sinv = (0.5 * (Sinv + Sinv.transpose())).eval();

    // Schur complement O_ij = <A_i, X A_j S^{-1}>.
    std::vector<Eigen::MatrixXd> T(m);
    for (int j = 0; j < m; ++j) T[j] = A[j].sandwich(X, Sinv);
    Eigen::MatrixXd O(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) O(i, j) = A[i].dot(T[j]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(O);
    Eigen::FullPivLU<Eigen::MatrixXd> lu_rr;  // fallback for rank-deficient systems
    bool use_rr = false;
    auto solve_schur = [&](const Eigen::VectorXd& rhs) -> Eigen::VectorXd {
      if (!use_rr) {
        Eigen::VectorXd s = lu.solve(rhs);
        s += lu.solve(rhs - O * s);  // one round of iterative refinement
        if ((O * s - rhs).norm() <= 1e-8 * (1.0 + rhs.norm())) return s;
        lu_rr.compute(O);
        lu_rr.setThreshold(1e-12);
        use_rr = true;
      }
      Eigen::VectorXd s = lu_rr.solve(rhs);
      s += lu_rr.solve(rhs - O * s);
      return s;
    };

    const Eigen::MatrixXd XRdSinv = X * (Rd * Sinv);
    const Eigen::VectorXd base_rhs = b + apply_operator(A, XRdSinv);

    // Predictor (affine scaling).
    Eigen::VectorXd dy = solve_schur(base_rhs);
    Eigen::MatrixXd dS = Rd - apply_adjoint(A, dy, n);
    Eigen::MatrixXd dX = -X - X * (dS * Sinv);
    dX = (0.5 * (dX + dX.transpose())).eval();

    double ap = std::min(1.0, frac * max_step(lltX, dX));
    double ad = std::min(1.0, frac * max_step(lltS, dS));
    const double mu_aff =
        ((X + ap * dX).array() * (S + ad * dS).array()).sum() / n;
    double sigma = std::pow(std::max(0.0, std::min(1.0, mu_aff / mu)), 3);

    // Corrector with second-order term dX_aff dS_aff.
    const Eigen::MatrixXd corr = dX * dS;
    Eigen::VectorXd rhs = base_rhs + apply_operator(A, (corr - sigma * mu * Eigen::MatrixXd::Identity(n, n)) * Sinv);
    dy = solve_schur(rhs);
    dS = Rd - apply_adjoint(A, dy, n);
    dX = sigma * mu * Sinv - corr * Sinv - X - X * (dS * Sinv);
    dX = (0.5 * (dX + dX.transpose())).eval();

    ap = std::min(1.0, frac * max_step(lltX, dX));
    ad = std::min(1.0, frac * max_step(lltS, dS));

    // a collapsing step means the iterate lost centrality; take a pure
    // centering step instead
    if (std::min(ap, ad) < 0.05) {
      Eigen::VectorXd c_rhs = base_rhs - mu * apply_operator(A, Sinv);
      dy = solve_schur(c_rhs);
      dS = Rd - apply_adjoint(A, dy, n);
      dX = mu * Sinv - X - X * (dS * Sinv);
      dX = (0.5 * (dX + dX.transpose())).eval();
      ap = std::min(1.0, 0.9 * max_step(lltX, dX));
      ad = std::min(1.0, 0.9 * max_step(lltS, dS));
    }

    X += ap * dX;
    y += ad * dy;
    S += ad * dS;
  }

  if (final_status == SolveStatus::Optimal) return best;
  best.status = final_status;
  best.iterations = iter;
  return best;
}

SdpSolution solve_relaxation(const StandardFormProblem& problem, const SdpSettings& settings) {
  const auto& constraints = constraint_matrices(problem.spec);
  ReducedConstraints red = preprocess(constraints);

  const int d = problem.spec.lifted_dim;
  std::vector<Eigen::MatrixXd> A = red.A;
  Eigen::MatrixXd ee = Eigen::MatrixXd::Zero(d, d);
  ee(d - 1, d - 1) = 1.0;
  A.push_back(ee);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(A.size());
  b[A.size() - 1] = 1.0;

  ConicSolution cs = solve_sdp(problem.M, A, b, settings);

  SdpSolution out;
  out.X = cs.X;
  out.S = cs.S;
  out.gamma = cs.y[cs.y.size() - 1];
  out.lambda = Eigen::VectorXd::Zero(constraints.size());
  for (size_t k = 0; k < red.kept.size(); ++k) out.lambda[red.kept[k]] = cs.y[k];
  out.primal_obj = cs.primal_obj;
  out.dual_obj = cs.dual_obj;
  out.status = cs.status;
  out.iterations = cs.iterations;
  out.primal_residual = cs.primal_residual;
  out.dual_residual = cs.dual_residual;
  out.rel_gap = cs.rel_gap;

  // Verify the solution invariants before reporting Optimal.
  if (out.status == SolveStatus::Optimal) {
    const double tol = std::max(settings.feas_tol * 100.0, 1e-8) *
                       std::max(1.0, problem.M.norm());
    bool ok = std::abs(out.X(d - 1, d - 1) - 1.0) <= 1e-7;
    for (const auto& Ai : constraints)
      ok = ok && std::abs((Ai.array() * out.X.array()).sum()) <= 1e-7;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esX(out.X, Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esS(out.S, Eigen::EigenvaluesOnly);
    ok = ok && esX.eigenvalues().minCoeff() >= -1e-8;
    ok = ok && esS.eigenvalues().minCoeff() >= -tol;
    if (!ok) out.status = SolveStatus::NumericalFailure;
  }
  return out;
}

std::vector<Eigen::VectorXd> sos_certificate(const SdpSolution& solution,
                                             const StandardFormProblem& problem,
                                             double tol) {
  (void)problem;
  if (solution.status != SolveStatus::Optimal)
    throw CertificateInvalid("sos_certificate requires an Optimal solve");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(solution.S);
  const Eigen::VectorXd& vals = es.eigenvalues();
  const double scale = std::max(1.0, vals.cwiseAbs().maxCoeff());
  std::vector<Eigen::VectorXd> out;
  for (int i = vals.size() - 1; i >= 0; --i) {
    if (vals[i] < -tol * scale)
      throw CertificateInvalid("certificate matrix has eigenvalue below -tol");
    if (vals[i] > 1e-12 * scale) out.push_back(std::sqrt(vals[i]) * es.eigenvectors().col(i));
  }
  return out;
}

ReducedConstraints preprocess(const std::vector<Eigen::MatrixXd>& constraints, double threshold) {
  ReducedConstraints out;
  out.original_count = static_cast<int>(constraints.size());
  std::vector<Eigen::VectorXd> basis;
  for (size_t i = 0; i < constraints.size(); ++i) {
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(constraints[i].data(),
                                                          constraints[i].size());
    const double orig = v.norm();
    for (const auto& q : basis) v -= q.dot(v) * q;
    for (const auto& q : basis) v -= q.dot(v) * q;
    if (orig > 0.0 && v.norm() > threshold * orig) {
      basis.push_back(v.normalized());
      out.A.push_back(constraints[i]);
      out.kept.push_back(static_cast<int>(i));
    }
  }
  return out;
}

ReducedConstraints preprocess(const StandardFormProblem& problem) {
  return preprocess(constraint_matrices(problem.spec));
}

}  // namespace rotsdp
