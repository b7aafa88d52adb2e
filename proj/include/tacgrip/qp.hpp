// Dense strictly convex QP with inequality constraints, solved by the
// Goldfarb-Idnani dual active-set method.
//
//   minimize    1/2 x'Hx + f'x
//   subject to  C x + d >= 0        (one row of C per constraint)
//
// The dual method starts at the unconstrained minimizer, so it needs no
// feasible starting point and detects primal infeasibility on its own.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace tacgrip::qp {

enum class Status { kOptimal, kInfeasible, kNotConvex, kIterationLimit };

struct Result {
  Eigen::VectorXd x;
  Eigen::VectorXd multipliers;  // one per constraint, zero when inactive
  std::vector<int> active;
  double objective = 0.0;
  Status status = Status::kOptimal;
  int iterations = 0;
};

namespace detail {

// Givens-based update of (J, R) when the constraint with d = J' n_p enters.
inline bool add_constraint(Eigen::MatrixXd& R, Eigen::MatrixXd& J, Eigen::VectorXd& d, int& iq,
                           double r_norm) {
  const int n = static_cast<int>(J.rows());
  for (int j = n - 1; j >= iq + 1; --j) {
    double cc = d(j - 1);
    double ss = d(j);
    const double h = std::hypot(cc, ss);
    if (h == 0.0) continue;
    d(j) = 0.0;
    ss /= h;
    cc /= h;
    if (cc < 0.0) {
      cc = -cc;
      ss = -ss;
      d(j - 1) = -h;
    } else {
      d(j - 1) = h;
    }
    const double xny = ss / (1.0 + cc);
    for (int k = 0; k < n; ++k) {
      const double t1 = J(k, j - 1);
      const double t2 = J(k, j);
      J(k, j - 1) = t1 * cc + t2 * ss;
      J(k, j) = xny * (t1 + J(k, j - 1)) - t2;
    }
  }
  ++iq;
  for (int i = 0; i < iq; ++i) R(i, iq - 1) = d(i);
  return std::abs(d(iq - 1)) > std::numeric_limits<double>::epsilon() * r_norm;
}

inline void delete_constraint(Eigen::MatrixXd& R, Eigen::MatrixXd& J, std::vector<int>& A,
                              Eigen::VectorXd& u, int& iq, int l) {
  const int n = static_cast<int>(J.rows());
  int qq = -1;
  for (int i = 0; i < iq; ++i) {
    if (A[i] == l) {
      qq = i;
      break;
    }
  }
  if (qq < 0) return;
  for (int i = qq; i < iq - 1; ++i) {
    A[i] = A[i + 1];
    u(i) = u(i + 1);
    R.col(i) = R.col(i + 1);
  }
  // Keep the pending multiplier (slot iq) adjacent to the shrunken set.
  A[iq - 1] = A[iq];
  u(iq - 1) = u(iq);
  A[iq] = -1;
  u(iq) = 0.0;
  for (int j = 0; j < iq; ++j) R(j, iq - 1) = 0.0;
  --iq;
  for (int j = qq; j < iq; ++j) {
    double cc = R(j, j);
    double ss = R(j + 1, j);
    const double h = std::hypot(cc, ss);
    if (h == 0.0) continue;
    cc /= h;
    ss /= h;
    R(j + 1, j) = 0.0;
    if (cc < 0.0) {
      R(j, j) = -h;
      cc = -cc;
      ss = -ss;
    } else {
      R(j, j) = h;
    }
    const double xny = ss / (1.0 + cc);
    for (int k = j + 1; k < iq; ++k) {
      const double t1 = R(j, k);
      const double t2 = R(j + 1, k);
      R(j, k) = t1 * cc + t2 * ss;
      R(j + 1, k) = xny * (t1 + R(j, k)) - t2;
    }
    for (int k = 0; k < n; ++k) {
      const double t1 = J(k, j);
      const double t2 = J(k, j + 1);
      J(k, j) = t1 * cc + t2 * ss;
      J(k, j + 1) = xny * (J(k, j) + t1) - t2;
    }
  }
}

}  // namespace detail

/// `feas_tol` is the slack below zero still accepted as satisfied.
inline Result solve(const Eigen::MatrixXd& H, const Eigen::VectorXd& f, const Eigen::MatrixXd& C,
                    const Eigen::VectorXd& d, double feas_tol = 1e-12, int max_iter = 1000) {
  const int n = static_cast<int>(H.rows());
  const int m = static_cast<int>(C.rows());
  constexpr double inf = std::numeric_limits<double>::infinity();

  Result res;
  res.multipliers = Eigen::VectorXd::Zero(m);

  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success) {
    res.status = Status::kNotConvex;
    res.x = Eigen::VectorXd::Zero(n);
    return res;
  }
  // J = L^{-T}; R holds the triangular factor of the active normals.
  Eigen::MatrixXd J = llt.matrixU().solve(Eigen::MatrixXd::Identity(n, n));
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
  double r_norm = 1.0;

  Eigen::VectorXd x = -llt.solve(f);
  double obj = 0.5 * f.dot(x);

  std::vector<int> A(static_cast<std::size_t>(n) + 1, -1);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n + 1);
  std::vector<bool> active(static_cast<std::size_t>(m), false);
  std::vector<bool> excluded(static_cast<std::size_t>(m), false);
  int iq = 0;

  Eigen::VectorXd s(m), z(n), r(n), dvec(n);
  std::vector<int> A_old;
  Eigen::VectorXd u_old, x_old;
  int iq_old = 0;

  // Refactor (J, R) from scratch for the constraints currently listed in A.
  auto rebuild = [&]() {
    J = llt.matrixU().solve(Eigen::MatrixXd::Identity(n, n));
    R.setZero();
    r_norm = 1.0;
    const int target = iq;
    iq = 0;
    for (int i = 0; i < target; ++i) {
      dvec = J.transpose() * C.row(A[i]).transpose();
      detail::add_constraint(R, J, dvec, iq, r_norm);
      r_norm = std::max(r_norm, std::abs(R(iq - 1, iq - 1)));
    }
  };

  auto finish = [&](Status status) {
    res.x = x;
    res.objective = obj;
    res.status = status;
    res.active.assign(A.begin(), A.begin() + iq);
    for (int i = 0; i < iq; ++i) res.multipliers(A[i]) = u(i);
    return res;
  };

  while (true) {
    if (++res.iterations > max_iter) return finish(Status::kIterationLimit);
    // Step 1: pick the most violated constraint.
    s = C * x + d;
    std::fill(excluded.begin(), excluded.end(), false);
    A_old.assign(A.begin(), A.end());
    u_old = u;
    x_old = x;
    iq_old = iq;

    int ip = -1;
  choose:
    {
      double worst = -feas_tol;
      ip = -1;
      for (int i = 0; i < m; ++i) {
        if (!active[i] && !excluded[i] && s(i) < worst) {
          worst = s(i);
          ip = i;
        }
      }
    }
    if (ip < 0) return finish(Status::kOptimal);

    const Eigen::VectorXd np = C.row(ip).transpose();
    u(iq) = 0.0;
    A[iq] = ip;

    while (true) {
      // Step 2a: primal and dual step directions.
      dvec = J.transpose() * np;
      z = J.rightCols(n - iq) * dvec.tail(n - iq);
      if (iq > 0) {
        r.head(iq) = R.topLeftCorner(iq, iq).triangularView<Eigen::Upper>().solve(dvec.head(iq));
      }
      // Step 2b: step lengths.
      double t1 = inf;
      int l = -1;
      for (int k = 0; k < iq; ++k) {
        if (r(k) > 0.0 && u(k) / r(k) < t1) {
          t1 = u(k) / r(k);
          l = A[k];
        }
      }
      const double zn = z.dot(np);
      const double t2 = (z.squaredNorm() > std::numeric_limits<double>::epsilon()) ? -s(ip) / zn : inf;
      const double t = std::min(t1, t2);
      if (t >= inf) return finish(Status::kInfeasible);

      if (t2 >= inf) {
        // Dual-only step.
        for (int k = 0; k < iq; ++k) u(k) -= t * r(k);
        u(iq) += t;
        active[l] = false;
        detail::delete_constraint(R, J, A, u, iq, l);
        continue;
      }

      x += t * z;
      obj += t * zn * (0.5 * t + u(iq));
      for (int k = 0; k < iq; ++k) u(k) -= t * r(k);
      u(iq) += t;

      if (t == t2) {
        if (!detail::add_constraint(R, J, dvec, iq, r_norm)) {
          // Linearly dependent normal: roll back and try another constraint.
          excluded[ip] = true;
          std::fill(active.begin(), active.end(), false);
          A = A_old;
          u = u_old;
          x = x_old;
          iq = iq_old;
          obj = 0.5 * x.dot(H * x) + f.dot(x);
          for (int i = 0; i < iq; ++i) active[A[i]] = true;
          rebuild();
          s = C * x + d;
          goto choose;
        }
        active[ip] = true;
        r_norm = std::max(r_norm, std::abs(R(iq - 1, iq - 1)));
        break;
      }
      // Partial step: drop the blocking constraint and retry the same ip.
      active[l] = false;
      detail::delete_constraint(R, J, A, u, iq, l);
      s(ip) = np.dot(x) + d(ip);
    }
  }
}

/// Scaled KKT residual: max of stationarity, primal violation, dual
/// infeasibility and complementarity, each relative to the problem data.
inline double kkt_residual(const Eigen::MatrixXd& H, const Eigen::VectorXd& f,
                           const Eigen::MatrixXd& C, const Eigen::VectorXd& d,
                           const Eigen::VectorXd& x, const Eigen::VectorXd& lambda) {
  const double fscale = 1.0 + f.lpNorm<Eigen::Infinity>() + (H * x).lpNorm<Eigen::Infinity>();
  const Eigen::VectorXd grad = H * x + f - C.transpose() * lambda;
  double res = grad.lpNorm<Eigen::Infinity>() / fscale;
  const Eigen::VectorXd s = C * x + d;
  for (int i = 0; i < s.size(); ++i) {
    const double row_scale = 1.0 + C.row(i).lpNorm<Eigen::Infinity>() * x.lpNorm<Eigen::Infinity>() +
                             std::abs(d(i));
    res = std::max(res, std::max(0.0, -s(i)) / row_scale);
    res = std::max(res, std::max(0.0, -lambda(i)) / fscale);
    res = std::max(res, std::abs(lambda(i) * s(i)) / (fscale * row_scale));
  }
  return res;
}

}  // namespace tacgrip::qp
