#include "rotsdp/domains.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <map>
#include <mutex>

#include "rotsdp/rng.hpp"

namespace rotsdp {

std::string to_string(RotationKind kind) {
  switch (kind) {
    case RotationKind::SO2: return "SO2";
    case RotationKind::SO3: return "SO3";
    case RotationKind::Quat: return "QUAT";
  }
  return "?";
}

RotationKind rotation_kind_from_string(const std::string& name) {
  if (name == "SO2") return RotationKind::SO2;
  if (name == "SO3") return RotationKind::SO3;
  if (name == "QUAT" || name == "Quat") return RotationKind::Quat;
  throw Error("unknown rotation kind: " + name);
}

std::string to_string(Minimality m) {
  switch (m) {
    case Minimality::Minimal: return "Minimal";
    case Minimality::AlmostMinimal: return "AlmostMinimal";
    case Minimality::NotMinimal: return "NotMinimal";
  }
  return "?";
}

DomainSpec DomainSpec::make(RotationKind kind, int n) {
  if (n < 1) throw Error("DomainSpec: n must be positive");
  int per_dim = 0, per_codim = 0, per_vdim = 0;
  std::int64_t per_deg = 0;
  switch (kind) {
    case RotationKind::SO2:
      per_dim = 2, per_vdim = 1, per_codim = 1, per_deg = 2;
      break;
    case RotationKind::SO3:
      per_dim = 9, per_vdim = 3, per_codim = 6, per_deg = 8;
      break;
    case RotationKind::Quat:
      per_dim = 4, per_vdim = 3, per_codim = 1, per_deg = 2;
      break;
  }
  DomainSpec s;
  s.kind = kind;
  s.n = n;
  s.ambient_dim = per_dim * n;
  s.lifted_dim = s.ambient_dim + 1;
  s.variety_dim = per_vdim * n;
  s.codim = per_codim * n;
  s.degree = 1;
  for (int i = 0; i < n; ++i) {
    if (s.degree > (1LL << 56)) break;  // saturate; classification only needs small n
    s.degree *= per_deg;
  }
  if (s.degree == s.codim + 1)
    s.minimality = Minimality::Minimal;
  else if (s.degree == s.codim + 2)
    s.minimality = Minimality::AlmostMinimal;
  else
    s.minimality = Minimality::NotMinimal;
  return s;
}

int DomainSpec::per_copy_dim() const {
  switch (kind) {
    case RotationKind::SO2: return 2;
    case RotationKind::SO3: return 9;
    case RotationKind::Quat: return 4;
  }
  return 0;
}

RotationElement RotationElement::so2(double angle) {
  RotationElement e;
  e.kind = RotationKind::SO2;
  e.angle = angle;
  return e;
}

RotationElement RotationElement::so3(const Eigen::Matrix3d& R) {
  RotationElement e;
  e.kind = RotationKind::SO3;
  e.R = R;
  return e;
}

RotationElement RotationElement::quat(const Eigen::Vector4d& q) {
  RotationElement e;
  e.kind = RotationKind::Quat;
  e.q = q;
  return e;
}

RotationElement RotationElement::identity(RotationKind kind) {
  switch (kind) {
    case RotationKind::SO2: return so2(0.0);
    case RotationKind::SO3: return so3(Eigen::Matrix3d::Identity());
    case RotationKind::Quat: return quat(Eigen::Vector4d(1, 0, 0, 0));
  }
  throw Error("bad kind");
}

bool RotationElement::satisfies_invariants(double tol) const {
  switch (kind) {
    case RotationKind::SO2: {
      const double c = std::cos(angle), s = std::sin(angle);
      return std::abs(c * c + s * s - 1.0) <= tol;
    }
    case RotationKind::SO3: {
      const double orth = (R.transpose() * R - Eigen::Matrix3d::Identity()).norm();
      return orth <= tol && std::abs(R.determinant() - 1.0) <= tol;
    }
    case RotationKind::Quat:
      return std::abs(q.squaredNorm() - 1.0) <= tol;
  }
  return false;
}

Eigen::Matrix2d RotationElement::matrix2() const {
  if (kind != RotationKind::SO2) throw KindMismatch("matrix2 requires an SO2 element");
  const double c = std::cos(angle), s = std::sin(angle);
  Eigen::Matrix2d m;
  m << c, -s, s, c;
  return m;
}

Eigen::Matrix3d quat_to_rotation(const Eigen::Vector4d& q) {
  const double n2 = q.squaredNorm();
  if (n2 <= 0.0) throw InvalidQuaternion("zero quaternion");
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  Eigen::Matrix3d R;
  R << w * w + x * x - y * y - z * z, 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), w * w - x * x + y * y - z * z, 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), w * w - x * x - y * y + z * z;
  return R / n2;
}

Eigen::Vector4d rotation_to_quat(const Eigen::Matrix3d& R) {
  // Shepperd's method: pick the largest pivot for stability.
  const double tr = R.trace();
  Eigen::Vector4d q;
  if (tr > 0.0) {
    double t = std::sqrt(1.0 + tr);
    q[0] = 0.5 * t;
    t = 0.5 / t;
    q[1] = (R(2, 1) - R(1, 2)) * t;
    q[2] = (R(0, 2) - R(2, 0)) * t;
    q[3] = (R(1, 0) - R(0, 1)) * t;
  } else {
    int i = 0;
    if (R(1, 1) > R(0, 0)) i = 1;
    if (R(2, 2) > R(i, i)) i = 2;
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    double t = std::sqrt(1.0 + R(i, i) - R(j, j) - R(k, k));
    q[i + 1] = 0.5 * t;
    t = 0.5 / t;
    q[0] = (R(k, j) - R(j, k)) * t;
    q[j + 1] = (R(j, i) + R(i, j)) * t;
    q[k + 1] = (R(k, i) + R(i, k)) * t;
  }
  q.normalize();
  if (q[0] < 0.0 || (q[0] == 0.0 && q.sum() < 0.0)) q = -q;
  return q;
}

namespace {

void check_unit_quaternion(const Eigen::Vector4d& u) {
  if (std::abs(u.norm() - 1.0) > 1e-9)
    throw InvalidQuaternion("quaternion norm deviates from 1 by more than 1e-9");
}

}  // namespace

Eigen::Matrix4d quaternion_matrix(const Eigen::Vector4d& u) {
  check_unit_quaternion(u);
  Eigen::Matrix4d Q;
  Q << u[0], -u[1], -u[2], -u[3],
       u[1],  u[0], -u[3],  u[2],
       u[2],  u[3],  u[0], -u[1],
       u[3], -u[2],  u[1],  u[0];
  return Q;
}

Eigen::Matrix4d quaternion_right_matrix(const Eigen::Vector4d& v) {
  check_unit_quaternion(v);
  Eigen::Matrix4d W;
  W << v[0], -v[1], -v[2], -v[3],
       v[1],  v[0],  v[3], -v[2],
       v[2], -v[3],  v[0],  v[1],
       v[3],  v[2], -v[1],  v[0];
  return W;
}

namespace {

// Accumulates one quadratic equation on the lifted coordinates into a
// symmetric matrix: quad terms x_p x_q, linear terms x_p * w, constant * w^2.
class QuadBuilder {
 public:
  QuadBuilder(int lifted_dim) : A_(Eigen::MatrixXd::Zero(lifted_dim, lifted_dim)), w_(lifted_dim - 1) {}

  void quad(int p, int q, double coeff) {
    if (p == q) {
      A_(p, p) += coeff;
    } else {
      A_(p, q) += 0.5 * coeff;
      A_(q, p) += 0.5 * coeff;
    }
  }
  void linear(int p, double coeff) { quad(p, w_, coeff); }
  void constant(double coeff) { A_(w_, w_) += coeff; }

  const Eigen::MatrixXd& matrix() const { return A_; }

 private:
  Eigen::MatrixXd A_;
  int w_;
};

std::vector<Eigen::MatrixXd> so3_candidates(const DomainSpec& spec, int copy) {
  const int d = spec.lifted_dim;
  const int o = spec.copy_offset(copy);
  auto idx = [&](int row, int col) { return o + 3 * col + row; };  // column-major

  std::vector<Eigen::MatrixXd> out;
  // R^T R - I = 0 (columns a, b)
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) {
      QuadBuilder qb(d);
      for (int i = 0; i < 3; ++i) qb.quad(idx(i, a), idx(i, b), 1.0);
      if (a == b) qb.constant(-1.0);
      out.push_back(qb.matrix());
    }
  // R R^T - I = 0 (rows a, b)
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) {
      QuadBuilder qb(d);
      for (int j = 0; j < 3; ++j) qb.quad(idx(a, j), idx(b, j), 1.0);
      if (a == b) qb.constant(-1.0);
      out.push_back(qb.matrix());
    }
  // row_a x row_b = row_c and col_a x col_b = col_c, cyclic
  const int cyc[3][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}};
  for (const auto& abc : cyc) {
    const int a = abc[0], b = abc[1], c = abc[2];
    for (int m = 0; m < 3; ++m) {
      const int m1 = (m + 1) % 3, m2 = (m + 2) % 3;
      {
        QuadBuilder qb(d);
        qb.quad(idx(a, m1), idx(b, m2), 1.0);
        qb.quad(idx(a, m2), idx(b, m1), -1.0);
        qb.linear(idx(c, m), -1.0);
        out.push_back(qb.matrix());
      }
      {
        QuadBuilder qb(d);
        qb.quad(idx(m1, a), idx(m2, b), 1.0);
        qb.quad(idx(m2, a), idx(m1, b), -1.0);
        qb.linear(idx(m, c), -1.0);
        out.push_back(qb.matrix());
      }
    }
  }
  return out;
}

// Greedy rank-revealing selection in candidate order: keep a candidate iff its
// component orthogonal to the span of the kept ones exceeds the pivot
// threshold, relative to its own norm.
std::vector<Eigen::MatrixXd> select_independent(const std::vector<Eigen::MatrixXd>& cands,
                                                double threshold = 1e-10) {
  std::vector<Eigen::MatrixXd> kept;
  std::vector<Eigen::VectorXd> basis;
  for (const auto& A : cands) {
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(A.data(), A.size());
    const double orig = v.norm();
    for (const auto& b : basis) v -= b.dot(v) * b;
    // re-orthogonalize once for numerical safety
    for (const auto& b : basis) v -= b.dot(v) * b;
    if (v.norm() > threshold * orig) {
      basis.push_back(v.normalized());
      kept.push_back(A);
    }
  }
  return kept;
}

std::vector<Eigen::MatrixXd> build_constraints(const DomainSpec& spec) {
  const int d = spec.lifted_dim;
  std::vector<Eigen::MatrixXd> out;
  for (int c = 0; c < spec.n; ++c) {
    switch (spec.kind) {
      case RotationKind::SO2: {
        QuadBuilder qb(d);
        const int o = spec.copy_offset(c);
        qb.quad(o, o, 1.0);
        qb.quad(o + 1, o + 1, 1.0);
        qb.constant(-1.0);
        out.push_back(qb.matrix());
        break;
      }
      case RotationKind::Quat: {
        QuadBuilder qb(d);
        const int o = spec.copy_offset(c);
        for (int i = 0; i < 4; ++i) qb.quad(o + i, o + i, 1.0);
        qb.constant(-1.0);
        out.push_back(qb.matrix());
        break;
      }
      case RotationKind::SO3: {
        auto sel = select_independent(so3_candidates(spec, c));
        out.insert(out.end(), sel.begin(), sel.end());
        break;
      }
    }
  }
  return out;
}

}  // namespace

const std::vector<Eigen::MatrixXd>& constraint_matrices(const DomainSpec& spec) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::vector<Eigen::MatrixXd>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto key = std::make_pair(static_cast<int>(spec.kind), spec.n);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, build_constraints(spec)).first;
  return it->second;
}

Eigen::VectorXd embed(const std::vector<RotationElement>& elements, const DomainSpec& spec) {
  if (static_cast<int>(elements.size()) != spec.n)
    throw KindMismatch("embed: expected " + std::to_string(spec.n) + " elements");
  Eigen::VectorXd r = Eigen::VectorXd::Zero(spec.lifted_dim);
  for (int i = 0; i < spec.n; ++i) {
    const auto& e = elements[i];
    if (e.kind != spec.kind) throw KindMismatch("embed: element kind mismatch");
    const int o = spec.copy_offset(i);
    switch (spec.kind) {
      case RotationKind::SO2:
        r[o] = std::cos(e.angle);
        r[o + 1] = std::sin(e.angle);
        break;
      case RotationKind::SO3:
        for (int col = 0; col < 3; ++col)
          for (int row = 0; row < 3; ++row) r[o + 3 * col + row] = e.R(row, col);
        break;
      case RotationKind::Quat:
        r.segment<4>(o) = e.q;
        break;
    }
  }
  r[spec.lifted_dim - 1] = 1.0;
  return r;
}

std::vector<RotationElement> random_rotations(const DomainSpec& spec, std::uint64_t seed) {
  auto rng = make_rng(seed);
  return random_rotations(spec, rng);
}

std::vector<RotationElement> random_rotations(const DomainSpec& spec, std::mt19937_64& rng) {
  std::vector<RotationElement> out;
  out.reserve(spec.n);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uang(0.0, 2.0 * M_PI);
  for (int i = 0; i < spec.n; ++i) {
    switch (spec.kind) {
      case RotationKind::SO2:
        out.push_back(RotationElement::so2(uang(rng)));
        break;
      case RotationKind::SO3: {
        Eigen::Vector4d q;
        do {
          for (int k = 0; k < 4; ++k) q[k] = gauss(rng);
        } while (q.norm() < 1e-6);
        q.normalize();
        out.push_back(RotationElement::so3(quat_to_rotation(q)));
        break;
      }
      case RotationKind::Quat: {
        Eigen::Vector4d q;
        do {
          for (int k = 0; k < 4; ++k) q[k] = gauss(rng);
        } while (q.norm() < 1e-6);
        q.normalize();
        out.push_back(RotationElement::quat(q));
        break;
      }
    }
  }
  return out;
}

std::vector<RotationElement> project_to_variety(const Eigen::VectorXd& ambient,
                                                const DomainSpec& spec) {
  if (ambient.size() != spec.ambient_dim)
    throw KindMismatch("project_to_variety: expected ambient_dim coordinates");
  std::vector<RotationElement> out;
  out.reserve(spec.n);
  for (int i = 0; i < spec.n; ++i) {
    const int o = spec.copy_offset(i);
    switch (spec.kind) {
      case RotationKind::SO2: {
        const double c = ambient[o], s = ambient[o + 1];
        const double norm = std::hypot(c, s);
        if (norm < 1e-12) throw DegenerateInput("project_to_variety: zero SO2 block");
        out.push_back(RotationElement::so2(std::atan2(s, c)));
        break;
      }
      case RotationKind::SO3: {
        Eigen::Matrix3d B;
        for (int col = 0; col < 3; ++col)
          for (int row = 0; row < 3; ++row) B(row, col) = ambient[o + 3 * col + row];
        if (B.norm() < 1e-12) throw DegenerateInput("project_to_variety: zero SO3 block");
        Eigen::JacobiSVD<Eigen::Matrix3d> svd(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
        Eigen::Matrix3d UVt = svd.matrixU() * svd.matrixV().transpose();
        Eigen::Vector3d diag(1.0, 1.0, UVt.determinant() < 0 ? -1.0 : 1.0);
        out.push_back(RotationElement::so3(svd.matrixU() * diag.asDiagonal() *
                                           svd.matrixV().transpose()));
        break;
      }
      case RotationKind::Quat: {
        Eigen::Vector4d q = ambient.segment<4>(o);
        if (q.norm() < 1e-12) throw DegenerateInput("project_to_variety: zero quaternion block");
        out.push_back(RotationElement::quat(q.normalized()));
        break;
      }
    }
  }
  return out;
}

double feasibility_residual(const Eigen::VectorXd& r, const DomainSpec& spec) {
  if (r.size() != spec.lifted_dim)
    throw KindMismatch("feasibility_residual: expected lifted_dim coordinates");
  double worst = 0.0;
  for (const auto& A : constraint_matrices(spec))
    worst = std::max(worst, std::abs(r.dot(A * r)));
  return worst + std::abs(r[spec.lifted_dim - 1] - 1.0);
}

Eigen::MatrixXd tangent_basis(const std::vector<RotationElement>& elements,
                              const DomainSpec& spec) {
  if (static_cast<int>(elements.size()) != spec.n)
    throw KindMismatch("tangent_basis: expected n elements");
  for (const auto& e : elements)
    if (e.kind != spec.kind) throw KindMismatch("tangent_basis: element kind mismatch");
  for (const auto& e : elements)
    if (!e.satisfies_invariants(1e-9)) throw SingularPoint("tangent_basis: infeasible element");

  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(spec.lifted_dim, spec.variety_dim);
  int col = 0;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < spec.n; ++i) {
    const int o = spec.copy_offset(i);
    switch (spec.kind) {
      case RotationKind::SO2: {
        const double c = std::cos(elements[i].angle), s = std::sin(elements[i].angle);
        T(o, col) = -s;
        T(o + 1, col) = c;
        ++col;
        break;
      }
      case RotationKind::SO3: {
        static const Eigen::Matrix3d E[3] = {
            (Eigen::Matrix3d() << 0, 0, 0, 0, 0, -1, 0, 1, 0).finished(),
            (Eigen::Matrix3d() << 0, 0, 1, 0, 0, 0, -1, 0, 0).finished(),
            (Eigen::Matrix3d() << 0, -1, 0, 1, 0, 0, 0, 0, 0).finished()};
        for (int k = 0; k < 3; ++k) {
          Eigen::Matrix3d D = E[k] * elements[i].R;
          for (int cc = 0; cc < 3; ++cc)
            for (int rr = 0; rr < 3; ++rr) T(o + 3 * cc + rr, col) = D(rr, cc) * inv_sqrt2;
          ++col;
        }
        break;
      }
      case RotationKind::Quat: {
        // Orthonormal completion of q inside the copy's 4 coordinates.
        Eigen::Matrix4d A = Eigen::Matrix4d::Identity();
        A.col(0) = elements[i].q;
        Eigen::HouseholderQR<Eigen::Matrix4d> qr(A);
        Eigen::Matrix4d Q = qr.householderQ();
        for (int k = 1; k < 4; ++k) {
          T.block<4, 1>(o, col) = Q.col(k);
          ++col;
        }
        break;
      }
    }
  }

  // Rank check against the constraint gradients and the homogenization form.
  const Eigen::VectorXd r = embed(elements, spec);
  for (const auto& A : constraint_matrices(spec)) {
    Eigen::VectorXd g = 2.0 * (A * r);
    if ((g.transpose() * T).cwiseAbs().maxCoeff() > 1e-10)
      throw SingularPoint("tangent_basis: basis not orthogonal to constraint gradients");
  }
  return T;
}

}  // namespace rotsdp
