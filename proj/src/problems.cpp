#include "rotsdp/problems.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <queue>

#include "rotsdp/rng.hpp"

namespace rotsdp {

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Random: return "Random";
    case Provenance::Registration: return "Registration";
    case Provenance::Resectioning: return "Resectioning";
    case Provenance::HandEyeSO3: return "HandEyeSO3";
    case Provenance::HandEyeQuat: return "HandEyeQuat";
    case Provenance::RotAvgSO: return "RotAvgSO";
    case Provenance::RotAvgQuat: return "RotAvgQuat";
    case Provenance::PointSetAvg: return "PointSetAvg";
    case Provenance::Counterexample: return "Counterexample";
  }
  return "?";
}

Provenance provenance_from_string(const std::string& name) {
  for (auto p : {Provenance::Random, Provenance::Registration, Provenance::Resectioning,
                 Provenance::HandEyeSO3, Provenance::HandEyeQuat, Provenance::RotAvgSO,
                 Provenance::RotAvgQuat, Provenance::PointSetAvg, Provenance::Counterexample})
    if (to_string(p) == name) return p;
  throw Error("unknown provenance: " + name);
}

Correspondence Correspondence::point(const Eigen::Vector3d& x, const Eigen::Vector3d& y) {
  Correspondence c;
  c.x = x;
  c.y = y;
  c.kind = Kind::Point;
  return c;
}

Correspondence Correspondence::line(const Eigen::Vector3d& x, const Eigen::Vector3d& y,
                                    const Eigen::Vector3d& direction) {
  Correspondence c;
  c.x = x;
  c.y = y;
  c.kind = Kind::Line;
  if (std::abs(direction.norm() - 1.0) > 1e-9)
    throw Error("line correspondence requires a unit direction");
  c.v = direction;
  return c;
}

Correspondence Correspondence::plane(const Eigen::Vector3d& x, const Eigen::Vector3d& y,
                                     const Eigen::Vector3d& normal) {
  Correspondence c;
  c.x = x;
  c.y = y;
  c.kind = Kind::Plane;
  if (std::abs(normal.norm() - 1.0) > 1e-9)
    throw Error("plane correspondence requires a unit normal");
  c.v = normal;
  return c;
}

bool RelativeRotationGraph::connected() const {
  if (n <= 1) return true;
  std::vector<std::vector<int>> adj(n);
  for (const auto& e : edges) {
    adj[e.i].push_back(e.j);
    adj[e.j].push_back(e.i);
  }
  std::vector<bool> seen(n, false);
  std::queue<int> bfs;
  bfs.push(0);
  seen[0] = true;
  int count = 1;
  while (!bfs.empty()) {
    int u = bfs.front();
    bfs.pop();
    for (int w : adj[u])
      if (!seen[w]) {
        seen[w] = true;
        ++count;
        bfs.push(w);
      }
  }
  return count == n;
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::MatrixXd K(A.rows() * B.rows(), A.cols() * B.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

Eigen::Matrix2d so2_pair_form(const Eigen::Matrix2d& B) {
  Eigen::Matrix2d J;
  J << 0, -1, 1, 0;
  Eigen::Matrix2d G;
  G << B.trace(), (B * J.transpose()).trace(), (J * B).trace(), (J * B * J.transpose()).trace();
  return G;
}

Eigen::Matrix2d so2_coeff(const Eigen::Vector2d& x) {
  Eigen::Matrix2d G;
  G << x[0], -x[1], x[1], x[0];
  return G;
}

namespace {

void finalize(StandardFormProblem& p) {
  p.M = ((p.M + p.M.transpose()) * 0.5).eval();
}

void check_rotation_matrix(const Eigen::Matrix3d& R, const char* what) {
  if ((R.transpose() * R - Eigen::Matrix3d::Identity()).norm() > 1e-9 ||
      std::abs(R.determinant() - 1.0) > 1e-9)
    throw Error(std::string(what) + ": not a rotation matrix");
}

void check_unit4(const Eigen::Vector4d& q, const char* what) {
  if (std::abs(q.norm() - 1.0) > 1e-9) throw InvalidQuaternion(std::string(what));
}

}  // namespace

StandardFormProblem registration_problem(const std::vector<Correspondence>& corrs,
                                         const DomainSpec& spec) {
  if (spec.n != 1 || spec.kind == RotationKind::Quat)
    throw Error("registration_problem supports SO3 n=1 and SO2 n=1");
  if (corrs.empty()) throw Error("registration_problem: no correspondences");
  const int p = spec.kind == RotationKind::SO3 ? 3 : 2;
  const int amb = spec.ambient_dim;  // p*p for SO3, 2 for SO2

  // Per-correspondence projector P_i and linear map K_i with
  // P_i R x_i = K_i * (rotation coordinates).
  std::vector<Eigen::MatrixXd> P, K;
  std::vector<Eigen::VectorXd> Y;
  for (const auto& c : corrs) {
    Eigen::MatrixXd Pi;
    switch (c.kind) {
      case Correspondence::Kind::Point:
        Pi = Eigen::MatrixXd::Identity(p, p);
        break;
      case Correspondence::Kind::Line: {
        Eigen::VectorXd v = c.v.head(p);
        if (std::abs(v.norm() - 1.0) > 1e-9)
          throw Error("registration_problem: line direction must be unit length");
        Pi = Eigen::MatrixXd::Identity(p, p) - v * v.transpose();
        break;
      }
      case Correspondence::Kind::Plane: {
        if (p != 3) throw Error("registration_problem: plane correspondences are 3D only");
        Pi = c.v.transpose();
        break;
      }
    }
    Eigen::MatrixXd Ki;
    if (spec.kind == RotationKind::SO3) {
      Ki = kron(c.x.transpose(), Pi);  // P R x = (x^T (x) P) vec(R)
    } else {
      Ki = Pi * so2_coeff(c.x.head<2>());
    }
    P.push_back(Pi);
    K.push_back(Ki);
    Y.push_back(c.y.head(p));
  }

  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(p, p);
  for (const auto& Pi : P) S += Pi.transpose() * Pi;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.eigenvalues().minCoeff() < 1e-10 * std::max(1.0, es.eigenvalues().maxCoeff()))
    throw TranslationUnobservable("registration_problem: sum P_i^T P_i is singular");
  Eigen::MatrixXd Sinv = S.inverse();

  // Closed-form translation t = T * rot_coords + t0.
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(p, amb);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(p);
  for (size_t i = 0; i < P.size(); ++i) {
    G += P[i].transpose() * K[i];
    g += P[i].transpose() * P[i] * Y[i];
  }
  Eigen::MatrixXd T = -Sinv * G;
  Eigen::VectorXd t0 = Sinv * g;

  int rows = 0;
  for (const auto& Pi : P) rows += Pi.rows();
  Eigen::MatrixXd U(rows, spec.lifted_dim);
  int at = 0;
  for (size_t i = 0; i < P.size(); ++i) {
    const int ri = P[i].rows();
    U.block(at, 0, ri, amb) = K[i] + P[i] * T;
    U.block(at, amb, ri, 1) = P[i] * (t0 - Y[i]);
    at += ri;
  }

  StandardFormProblem out;
  out.spec = spec;
  out.M = U.transpose() * U;
  out.meta.provenance = Provenance::Registration;
  finalize(out);
  return out;
}

StandardFormProblem resectioning_problem(
    const std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>>& rays) {
  if (rays.empty()) throw Error("resectioning_problem: no rays");
  std::vector<Correspondence> corrs;
  corrs.reserve(rays.size());
  for (const auto& [dir, point] : rays) {
    if (std::abs(dir.norm() - 1.0) > 1e-9)
      throw Error("resectioning_problem: ray directions must be unit length");
    // Viewing rays all pass through the camera center (origin in the camera
    // frame), so this is point-to-line registration with a common y.
    corrs.push_back(Correspondence::line(point, Eigen::Vector3d::Zero(), dir));
  }
  StandardFormProblem out = registration_problem(corrs, DomainSpec::make(RotationKind::SO3, 1));
  out.meta.provenance = Provenance::Resectioning;
  return out;
}

StandardFormProblem handeye_so3(
    const std::vector<std::pair<Eigen::Matrix3d, Eigen::Matrix3d>>& pairs) {
  if (pairs.empty()) throw Error("handeye_so3: no measurement pairs");
  Eigen::MatrixXd M9 = Eigen::MatrixXd::Zero(9, 9);
  const Eigen::MatrixXd I9 = Eigen::MatrixXd::Identity(9, 9);
  for (const auto& [U, V] : pairs) {
    check_rotation_matrix(U, "handeye_so3 U");
    check_rotation_matrix(V, "handeye_so3 V");
    M9 += 2.0 * I9 - kron(V, U) - kron(V.transpose(), U.transpose());
  }
  StandardFormProblem out;
  out.spec = DomainSpec::make(RotationKind::SO3, 1);
  out.M = Eigen::MatrixXd::Zero(10, 10);
  out.M.topLeftCorner(9, 9) = M9;
  out.meta.provenance = Provenance::HandEyeSO3;
  finalize(out);
  return out;
}

StandardFormProblem handeye_quat(
    const std::vector<std::pair<Eigen::Vector4d, Eigen::Vector4d>>& pairs) {
  if (pairs.empty()) throw Error("handeye_quat: no measurement pairs");
  for (const auto& [u, v] : pairs) {
    check_unit4(u, "handeye_quat: non-unit u");
    check_unit4(v, "handeye_quat: non-unit v");
  }
  auto block = [](const Eigen::Vector4d& u, const Eigen::Vector4d& v) {
    // || Q(u) q - Q(q) v ||^2 = || (Q(u) - W(v)) q ||^2
    Eigen::Matrix4d D = quaternion_matrix(u) - quaternion_right_matrix(v);
    return Eigen::Matrix4d(D.transpose() * D);
  };

  // Raw build, algebraic least-squares initializer, then per-pair sign choice.
  Eigen::Matrix4d M4 = Eigen::Matrix4d::Zero();
  for (const auto& [u, v] : pairs) M4 += block(u, v);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(M4);
  Eigen::Vector4d q0 = es.eigenvectors().col(0);
  q0.normalize();

  int flips = 0;
  Eigen::Matrix4d M4s = Eigen::Matrix4d::Zero();
  for (const auto& [u, v] : pairs) {
    const double cost_pos = q0.dot(block(u, v) * q0);
    const double cost_neg = q0.dot(block(u, Eigen::Vector4d(-v)) * q0);
    if (cost_neg < cost_pos) {
      M4s += block(u, Eigen::Vector4d(-v));
      ++flips;
    } else {
      M4s += block(u, v);
    }
  }

  StandardFormProblem out;
  out.spec = DomainSpec::make(RotationKind::Quat, 1);
  out.M = Eigen::MatrixXd::Zero(5, 5);
  out.M.topLeftCorner(4, 4) = M4s;
  out.meta.provenance = Provenance::HandEyeQuat;
  if (flips > 0) out.meta.description = std::to_string(flips) + " sign flips";
  finalize(out);
  return out;
}

StandardFormProblem rotavg_so(const RelativeRotationGraph& graph, int p) {
  if (p != 2 && p != 3) throw Error("rotavg_so: p must be 2 or 3");
  const RotationKind kind = p == 2 ? RotationKind::SO2 : RotationKind::SO3;
  if (graph.n < 2) throw Error("rotavg_so: need at least two nodes");
  if (graph.edges.empty()) throw Error("rotavg_so: no edges");
  for (const auto& e : graph.edges) {
    if (e.i < 0 || e.i >= graph.n || e.j < 0 || e.j >= graph.n || e.i == e.j)
      throw Error("rotavg_so: edge indices out of range");
    if (e.measurement.kind != kind) throw KindMismatch("rotavg_so: measurement kind mismatch");
    if (!e.measurement.satisfies_invariants(1e-9))
      throw Error("rotavg_so: invalid measurement rotation");
  }

  DomainSpec spec = DomainSpec::make(kind, graph.n);
  StandardFormProblem out;
  out.spec = spec;
  out.M = Eigen::MatrixXd::Zero(spec.lifted_dim, spec.lifted_dim);
  const int d = spec.per_copy_dim();
  for (const auto& e : graph.edges) {
    // Each edge contributes -2 <R_i R_ij, R_j> to r^T M r.
    if (p == 3) {
      Eigen::MatrixXd B = -kron(e.measurement.R, Eigen::Matrix3d::Identity());
      out.M.block(e.i * d, e.j * d, d, d) += B;
      out.M.block(e.j * d, e.i * d, d, d) += B.transpose();
    } else {
      Eigen::Matrix2d B = -so2_pair_form(e.measurement.matrix2());
      out.M.block(e.i * d, e.j * d, d, d) += B;
      out.M.block(e.j * d, e.i * d, d, d) += B.transpose();
    }
  }
  out.meta.provenance = Provenance::RotAvgSO;
  // sum_e ||R_i R_ij - R_j||_F^2 = r^T M r + 2 p |E|
  out.meta.cost_offset = 2.0 * p * static_cast<double>(graph.edges.size());
  out.meta.disconnected_graph = !graph.connected();
  finalize(out);
  return out;
}

StandardFormProblem rotavg_quat(const RelativeRotationGraph& graph) {
  if (graph.n < 2) throw Error("rotavg_quat: need at least two nodes");
  if (graph.edges.empty()) throw Error("rotavg_quat: no edges");
  for (const auto& e : graph.edges) {
    if (e.i < 0 || e.i >= graph.n || e.j < 0 || e.j >= graph.n || e.i == e.j)
      throw Error("rotavg_quat: edge indices out of range");
    if (e.measurement.kind != RotationKind::Quat)
      throw KindMismatch("rotavg_quat: measurement kind mismatch");
    check_unit4(e.measurement.q, "rotavg_quat: non-unit measurement");
  }

  // Spanning-tree estimates used only to pick measurement signs (the double
  // cover makes q and -q the same rotation).
  const int n = graph.n;
  std::vector<Eigen::Vector4d> est(n, Eigen::Vector4d(1, 0, 0, 0));
  {
    std::vector<std::vector<std::pair<int, int>>> adj(n);  // (neighbor, edge idx)
    for (size_t k = 0; k < graph.edges.size(); ++k) {
      adj[graph.edges[k].i].push_back({graph.edges[k].j, static_cast<int>(k)});
      adj[graph.edges[k].j].push_back({graph.edges[k].i, static_cast<int>(k)});
    }
    std::vector<bool> seen(n, false);
    for (int root = 0; root < n; ++root) {
      if (seen[root]) continue;
      seen[root] = true;
      std::queue<int> bfs;
      bfs.push(root);
      while (!bfs.empty()) {
        int u = bfs.front();
        bfs.pop();
        for (auto [w, k] : adj[u]) {
          if (seen[w]) continue;
          seen[w] = true;
          const auto& e = graph.edges[k];
          if (e.i == u) {
            est[w] = (quaternion_matrix(est[u]) * e.measurement.q).normalized();
          } else {
            Eigen::Vector4d conj(e.measurement.q[0], -e.measurement.q[1], -e.measurement.q[2],
                                 -e.measurement.q[3]);
            est[w] = (quaternion_matrix(est[u]) * conj).normalized();
          }
          bfs.push(w);
        }
      }
    }
  }

  DomainSpec spec = DomainSpec::make(RotationKind::Quat, n);
  StandardFormProblem out;
  out.spec = spec;
  out.M = Eigen::MatrixXd::Zero(spec.lifted_dim, spec.lifted_dim);
  int flips = 0;
  for (const auto& e : graph.edges) {
    Eigen::Vector4d m = e.measurement.q;
    const double cp = (quaternion_matrix(est[e.i]) * m - est[e.j]).squaredNorm();
    const double cn = (quaternion_matrix(est[e.i]) * (-m) - est[e.j]).squaredNorm();
    if (cn < cp) {
      m = -m;
      ++flips;
    }
    // residual W(m) q_i - q_j
    Eigen::Matrix4d W = quaternion_right_matrix(m);
    out.M.block<4, 4>(4 * e.i, 4 * e.i) += W.transpose() * W;
    out.M.block<4, 4>(4 * e.j, 4 * e.j) += Eigen::Matrix4d::Identity();
    out.M.block<4, 4>(4 * e.i, 4 * e.j) += -W.transpose();
    out.M.block<4, 4>(4 * e.j, 4 * e.i) += -W;
  }
  out.meta.provenance = Provenance::RotAvgQuat;
  out.meta.disconnected_graph = !graph.connected();
  if (flips > 0) out.meta.description = std::to_string(flips) + " sign flips";
  finalize(out);
  return out;
}

StandardFormProblem pointset_avg(const std::vector<Eigen::MatrixXd>& point_sets,
                                 RotationKind kind) {
  if (kind == RotationKind::Quat) throw Error("pointset_avg: quaternion domain not applicable");
  const int p = kind == RotationKind::SO3 ? 3 : 2;
  const int n = static_cast<int>(point_sets.size());
  if (n < 2) throw Error("pointset_avg: need at least two point sets");
  const int m = static_cast<int>(point_sets[0].cols());
  for (const auto& X : point_sets) {
    if (X.rows() != p) throw Error("pointset_avg: point sets must be p x m");
    if (X.cols() != m) throw Error("pointset_avg: point sets must share the column count");
  }

  bool degenerate = m < 3;
  std::vector<Eigen::MatrixXd> centered;
  centered.reserve(n);
  double sq_norms = 0.0;
  for (const auto& X : point_sets) {
    Eigen::MatrixXd C = X.colwise() - X.rowwise().mean();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(C);
    if (svd.singularValues()(p - 1) < 1e-10 * std::max(1.0, svd.singularValues()(0)))
      degenerate = true;
    sq_norms += C.squaredNorm();
    centered.push_back(std::move(C));
  }

  DomainSpec spec = DomainSpec::make(kind, n);
  StandardFormProblem out;
  out.spec = spec;
  out.M = Eigen::MatrixXd::Zero(spec.lifted_dim, spec.lifted_dim);
  const int d = spec.per_copy_dim();
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      if (j == k) continue;
      Eigen::MatrixXd B = -(centered[j] * centered[k].transpose());  // p x p
      if (p == 3) {
        out.M.block(j * d, k * d, d, d) = kron(B, Eigen::Matrix3d::Identity());
      } else {
        out.M.block(j * d, k * d, d, d) = so2_pair_form(B);
      }
    }
  out.meta.provenance = Provenance::PointSetAvg;
  // min over Y, t of the alignment cost = (1 - 1/n) sum ||X_i||^2 + (1/n) r^T M r
  out.meta.cost_scale = 1.0 / n;
  out.meta.cost_offset = (1.0 - 1.0 / n) * sq_norms;
  out.meta.degenerate_data = degenerate;
  finalize(out);
  return out;
}

StandardFormProblem random_problem(const DomainSpec& spec, std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const int d = spec.lifted_dim;
  Eigen::MatrixXd M(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      M(i, j) = unif(rng);
      M(j, i) = M(i, j);
    }
  StandardFormProblem out;
  out.spec = spec;
  out.M = M;
  out.meta.provenance = Provenance::Random;
  return out;
}

}  // namespace rotsdp
