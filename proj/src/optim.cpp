#include "cfrobust/optim.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace cfrobust {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-11;
constexpr double kReducedCostTol = 1e-9;

// Rows rescaled to unit normal so feas_tol means the same thing across
// problem scales. Zero rows are resolved up front: vacuous when b >= 0,
// a proof of infeasibility otherwise.
struct NormalizedRows {
  Matrix A;       // m x d
  Vector b;       // m
  Vector scale;   // original ||a_i||, for reporting multipliers
  std::vector<int> origin;  // row -> index in the input constraint list
  bool trivially_infeasible = false;
};

NormalizedRows normalize_rows(const std::vector<LinearIneq>& ineqs, int dim) {
  NormalizedRows out;
  std::vector<int> keep;
  for (int i = 0; i < static_cast<int>(ineqs.size()); ++i) {
    const auto& li = ineqs[i];
    if (li.a.size() != dim) throw std::invalid_argument("solver: constraint dimension mismatch");
    if (!li.a.allFinite() || !std::isfinite(li.b))
      throw std::invalid_argument("solver: non-finite constraint");
    double n = li.a.norm();
    if (n < 1e-300) {
      if (li.b < 0.0) out.trivially_infeasible = true;
      continue;  // 0^T x <= b with b >= 0 is vacuous
    }
    keep.push_back(i);
  }
  const int m = static_cast<int>(keep.size());
  out.A.resize(m, dim);
  out.b.resize(m);
  out.scale.resize(m);
  out.origin = keep;
  for (int r = 0; r < m; ++r) {
    const auto& li = ineqs[keep[r]];
    double n = li.a.norm();
    out.A.row(r) = li.a.transpose() / n;
    out.b(r) = li.b / n;
    out.scale(r) = n;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dense two-phase tableau simplex, Bland's rule. min c^T z, M z = rhs, z >= 0.
// ---------------------------------------------------------------------------

struct SimplexResult {
  Vector z;
  double objective = 0.0;
  bool feasible = false;
  bool hit_iteration_limit = false;
  int iterations = 0;
  std::vector<int> basis;  // basic variable per row (indices into z; >= n means artificial)
  Matrix tableau;          // final (m+1) x (n_total+1); cost row last, rhs column last
  int n_vars = 0;
};

int pick_entering(const Matrix& T, int n_cols_allowed) {
  const int cost = static_cast<int>(T.rows()) - 1;
  for (int j = 0; j < n_cols_allowed; ++j)
    if (T(cost, j) < -kReducedCostTol) return j;
  return -1;
}

// Ratio test with Bland tie-breaking (smallest basic variable index).
int pick_leaving(const Matrix& T, const std::vector<int>& basis, int enter) {
  const int m = static_cast<int>(T.rows()) - 1;
  const int rhs = static_cast<int>(T.cols()) - 1;
  int row = -1;
  double best = kInf;
  for (int i = 0; i < m; ++i) {
    double coef = T(i, enter);
    if (coef <= kPivotTol) continue;
    double ratio = T(i, rhs) / coef;
    if (ratio < best - 1e-12 || (ratio < best + 1e-12 && (row < 0 || basis[i] < basis[row]))) {
      best = ratio;
      row = i;
    }
  }
  return row;
}

void pivot(Matrix& T, std::vector<int>& basis, int row, int col) {
  T.row(row) /= T(row, col);
  for (int i = 0; i < T.rows(); ++i) {
    if (i == row) continue;
    double f = T(i, col);
    if (f != 0.0) T.row(i) -= f * T.row(row);
  }
  basis[row] = col;
}

SimplexResult simplex(const Matrix& M, const Vector& rhs_in, const Vector& c, int max_iter) {
  const int m = static_cast<int>(M.rows());
  const int n = static_cast<int>(M.cols());
  SimplexResult res;
  res.n_vars = n;
  if (m == 0) {
    res.z = Vector::Zero(n);
    res.feasible = true;
    return res;
  }

  // Phase 1: artificial columns n..n+m-1, rhs made nonnegative.
  Matrix T(m + 1, n + m + 1);
  T.setZero();
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) {
    double sgn = rhs_in(i) < 0.0 ? -1.0 : 1.0;
    T.block(i, 0, 1, n) = sgn * M.row(i);
    T(i, n + m) = sgn * rhs_in(i);
    T(i, n + i) = 1.0;
    basis[i] = n + i;
  }
  // Reduced costs for min(sum of artificials): cost row = -(sum of rows).
  for (int i = 0; i < m; ++i) T.row(m) -= T.row(i);
  T.block(m, n, 1, m).setZero();

  int iters = 0;
  while (true) {
    if (++iters > max_iter) {
      res.hit_iteration_limit = true;
      res.iterations = iters;
      return res;
    }
    int enter = pick_entering(T, n);  // artificials may leave, never re-enter
    if (enter < 0) break;
    int leave = pick_leaving(T, basis, enter);
    if (leave < 0) break;  // phase-1 objective bounded; defensive
    pivot(T, basis, leave, enter);
  }
  double art_sum = -T(m, n + m);
  if (art_sum > 1e-7) {
    res.iterations = iters;
    res.feasible = false;
    return res;
  }
  // Drive any artificial still basic at zero level out of the basis.
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) continue;
    int col = -1;
    for (int j = 0; j < n; ++j)
      if (std::abs(T(i, j)) > kPivotTol) {
        col = j;
        break;
      }
    if (col >= 0) pivot(T, basis, i, col);
    // else: redundant row, stays inert
  }

  // Phase 2 cost row.
  T.row(m).setZero();
  T.block(m, 0, 1, n) = c.transpose();
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n && std::abs(c(basis[i])) > 0.0) T.row(m) -= c(basis[i]) * T.row(i);
  }
  while (true) {
    if (++iters > max_iter) {
      res.hit_iteration_limit = true;
      break;
    }
    int enter = pick_entering(T, n);
    if (enter < 0) break;
    int leave = pick_leaving(T, basis, enter);
    if (leave < 0) break;  // unbounded; our objectives are bounded below, defensive
    pivot(T, basis, leave, enter);
  }

  res.z = Vector::Zero(n);
  for (int i = 0; i < m; ++i)
    if (basis[i] < n) res.z(basis[i]) = T(i, n + m);
  res.objective = c.dot(res.z);
  res.feasible = true;
  res.iterations = iters;
  res.basis = std::move(basis);
  res.tableau = std::move(T);
  return res;
}

double quad_value(const QuadIneq& q, const Vector& x) {
  Vector r = x - q.mu;
  return r.dot(q.P * r);
}

}  // namespace

SolveOutcome project_box(const Vector& x0, const Vector& lower, const Vector& upper) {
  if (lower.size() != x0.size() || upper.size() != x0.size())
    throw std::invalid_argument("project_box: dimension mismatch");
  SolveOutcome out;
  out.multipliers = Vector::Zero(0);
  for (int i = 0; i < x0.size(); ++i) {
    if (lower(i) > upper(i)) {
      out.status = SolveStatus::infeasible;
      return out;
    }
  }
  out.point = x0.cwiseMax(lower).cwiseMin(upper);
  out.objective = (out.point - x0).squaredNorm();
  out.status = SolveStatus::optimal;
  out.kkt_residual = 0.0;
  return out;
}

namespace detail {

double min_max_violation(const ConstraintSet& cs, int dim, const SolverConfig& cfg) {
  auto rows = normalize_rows(cs.linear, dim);
  if (rows.trivially_infeasible) return kInf;
  const int m = static_cast<int>(rows.A.rows());
  if (m == 0) return 0.0;
  // min t  s.t.  A(x+ - x-) - t 1 + s = b,  all vars >= 0
  const int n = 2 * dim + 1 + m;
  Matrix M(m, n);
  M.setZero();
  M.block(0, 0, m, dim) = rows.A;
  M.block(0, dim, m, dim) = -rows.A;
  M.col(2 * dim).setConstant(-1.0);
  M.block(0, 2 * dim + 1, m, m) = Matrix::Identity(m, m);
  Vector c = Vector::Zero(n);
  c(2 * dim) = 1.0;
  auto lp = simplex(M, rows.b, c, cfg.max_iter);
  if (!lp.feasible || lp.hit_iteration_limit) return kInf;
  return lp.objective;
}

SolveOutcome project_polytope(const Vector& x0, const std::vector<LinearIneq>& ineqs,
                              const SolverConfig& cfg) {
  const int d = static_cast<int>(x0.size());
  auto rows = normalize_rows(ineqs, d);
  SolveOutcome out;
  out.multipliers = Vector::Zero(static_cast<int>(ineqs.size()));
  if (rows.trivially_infeasible) {
    out.status = SolveStatus::infeasible;
    return out;
  }
  const int m = static_cast<int>(rows.A.rows());
  Vector btilde = rows.b - rows.A * x0;

  Vector y = Vector::Zero(d);
  std::vector<int> active;          // indices into normalized rows
  std::vector<double> lambda;       // multipliers of min (1/2)||y||^2 form
  int iters = 0;
  const double ztol = 1e-13;

  auto most_violated = [&](double& viol) {
    int p = -1;
    viol = cfg.feas_tol;
    Vector v = rows.A * y - btilde;
    for (int i = 0; i < m; ++i) {
      if (v(i) > viol) {
        viol = v(i);
        p = i;
      }
    }
    return p;
  };

  while (true) {
    double viol;
    int p = most_violated(viol);
    if (p < 0) break;  // feasible, hence optimal

    double mu_p = 0.0;
    Vector ap = rows.A.row(p).transpose();
    while (true) {
      if (++iters > cfg.max_iter) {
        out.point = x0 + y;
        out.objective = y.squaredNorm();
        out.status = SolveStatus::max_iter;
        out.iterations = iters;
        return out;
      }
      const int q = static_cast<int>(active.size());
      Vector r(q), z;
      if (q > 0) {
        Matrix N(d, q);
        for (int k = 0; k < q; ++k) N.col(k) = rows.A.row(active[k]).transpose();
        r = N.colPivHouseholderQr().solve(ap);
        z = ap - N * r;
      } else {
        z = ap;
      }
      double vp = ap.dot(y) - btilde(p);
      double z2 = z.squaredNorm();
      double t2 = z2 > ztol ? vp / z2 : kInf;
      double t1 = kInf;
      int kdrop = -1;
      for (int k = 0; k < q; ++k) {
        if (r(k) > ztol) {
          double cand = lambda[k] / r(k);
          if (cand < t1) {
            t1 = cand;
            kdrop = k;
          }
        }
      }
      double t = std::min(t1, t2);
      if (!std::isfinite(t)) {
        // dual unbounded: constraint p incompatible with the active set
        out.status = SolveStatus::infeasible;
        out.iterations = iters;
        return out;
      }
      y -= t * z;
      for (int k = 0; k < q; ++k) lambda[k] -= t * r(k);
      mu_p += t;
      if (t2 <= t1) {
        active.push_back(p);
        lambda.push_back(mu_p);
        break;
      }
      active.erase(active.begin() + kdrop);
      lambda.erase(lambda.begin() + kdrop);
    }
  }

  // Recompute the point exactly from the final active set; keeps constraint
  // drift from accumulating over partial steps.
  if (!active.empty()) {
    const int q = static_cast<int>(active.size());
    Matrix Nt(q, d);
    Vector ba(q);
    for (int k = 0; k < q; ++k) {
      Nt.row(k) = rows.A.row(active[k]);
      ba(k) = btilde(active[k]);
    }
    Vector y_exact = Nt.completeOrthogonalDecomposition().solve(ba);
    Vector v = rows.A * y_exact - btilde;
    if (v.maxCoeff() <= cfg.feas_tol) y = y_exact;
  }

  out.point = x0 + y;
  out.objective = y.squaredNorm();
  out.status = SolveStatus::optimal;
  out.iterations = iters;
  // Multipliers in the min ||x-x0||^2 convention, scaled back to original rows.
  for (std::size_t k = 0; k < active.size(); ++k) {
    double lam = std::max(0.0, 2.0 * lambda[k]);
    out.multipliers(rows.origin[active[k]]) = lam / rows.scale(active[k]);
  }
  // KKT residual: stationarity, primal feasibility, complementarity.
  Vector g = 2.0 * y;
  for (int i = 0; i < static_cast<int>(ineqs.size()); ++i)
    if (out.multipliers(i) != 0.0) g += out.multipliers(i) * ineqs[i].a;
  double stat = g.lpNorm<Eigen::Infinity>();
  double primal = std::max(0.0, (rows.A * y - btilde).maxCoeff());
  double comp = 0.0;
  for (int i = 0; i < m; ++i) {
    double s = rows.A.row(i).dot(y) - btilde(i);  // <= 0 at optimum
    comp = std::max(comp, std::abs(out.multipliers(rows.origin[i]) * rows.scale(i) * s));
  }
  out.kkt_residual = std::max({stat, primal, comp});
  return out;
}

}  // namespace detail

SolveOutcome solve_qp(const Vector& x0, const ConstraintSet& cs, const SolverConfig& cfg) {
  if (!cs.quadratic.empty()) throw std::invalid_argument("solve_qp: linear constraints only");
  const int d = static_cast<int>(x0.size());
  if (!x0.allFinite()) throw std::invalid_argument("solve_qp: non-finite start point");

  auto rows = normalize_rows(cs.linear, d);
  SolveOutcome out;
  out.multipliers = Vector::Zero(static_cast<int>(cs.linear.size()));
  if (rows.trivially_infeasible) {
    out.status = SolveStatus::infeasible;
    return out;
  }
  if (rows.A.rows() == 0 || (rows.A * x0 - rows.b).maxCoeff() <= cfg.feas_tol) {
    out.point = x0;
    out.objective = 0.0;
    out.status = SolveStatus::optimal;
    return out;
  }
  if (detail::min_max_violation(cs, d, cfg) > cfg.feas_tol) {
    out.status = SolveStatus::infeasible;
    return out;
  }
  return detail::project_polytope(x0, cs.linear, cfg);
}

SolveOutcome solve_lp_l1(const Vector& x0, const Vector& weights, const ConstraintSet& cs,
                         const SolverConfig& cfg) {
  if (!cs.quadratic.empty()) throw std::invalid_argument("solve_lp_l1: linear constraints only");
  const int d = static_cast<int>(x0.size());
  if (weights.size() != d) throw std::invalid_argument("solve_lp_l1: weight dimension mismatch");
  if ((weights.array() <= 0.0).any())
    throw std::invalid_argument("solve_lp_l1: weights must be strictly positive");

  auto rows = normalize_rows(cs.linear, d);
  SolveOutcome out;
  out.multipliers = Vector::Zero(static_cast<int>(cs.linear.size()));
  if (rows.trivially_infeasible) {
    out.status = SolveStatus::infeasible;
    return out;
  }
  const int m = static_cast<int>(rows.A.rows());
  if (m == 0 || (rows.A * x0 - rows.b).maxCoeff() <= cfg.feas_tol) {
    out.point = x0;
    out.objective = 0.0;
    out.status = SolveStatus::optimal;
    return out;
  }

  // Variables z = [u(d), v(d), s(m)] >= 0 with x = x0 + u - v:
  //   A u - A v + s = b - A x0,   min w^T u + w^T v.
  const int n = 2 * d + m;
  Matrix M(m, n);
  M.setZero();
  M.block(0, 0, m, d) = rows.A;
  M.block(0, d, m, d) = -rows.A;
  M.block(0, 2 * d, m, m) = Matrix::Identity(m, m);
  Vector rhs = rows.b - rows.A * x0;
  Vector c(n);
  c.head(d) = weights;
  c.segment(d, d) = weights;
  c.tail(m).setZero();

  auto lp = simplex(M, rhs, c, cfg.max_iter);
  out.iterations = lp.iterations;
  if (!lp.feasible) {
    out.status = SolveStatus::infeasible;
    return out;
  }
  if (lp.hit_iteration_limit) {
    out.status = SolveStatus::max_iter;
    out.point = x0 + lp.z.head(d) - lp.z.segment(d, d);
    out.objective = lp.objective;
    return out;
  }

  auto extract_x = [&](const Vector& z) { return Vector(x0 + z.head(d) - z.segment(d, d)); };
  Vector x = extract_x(lp.z);
  double obj = lp.objective;
  double best_l2 = (x - x0).squaredNorm();

  // Tie-break: walk to neighboring optimal vertices (zero reduced cost
  // pivots) and keep the smallest-l2 one.
  {
    const int cost_row = m;
    const int rhs_col = static_cast<int>(lp.tableau.cols()) - 1;
    for (int j = 0; j < n; ++j) {
      bool basic = false;
      for (int i = 0; i < m; ++i)
        if (lp.basis[i] == j) basic = true;
      if (basic) continue;
      if (std::abs(lp.tableau(cost_row, j)) > kReducedCostTol) continue;
      int leave = pick_leaving(lp.tableau, lp.basis, j);
      if (leave < 0) continue;
      Matrix T = lp.tableau;
      std::vector<int> basis = lp.basis;
      pivot(T, basis, leave, j);
      Vector z = Vector::Zero(n);
      for (int i = 0; i < m; ++i)
        if (basis[i] < n) z(basis[i]) = T(i, rhs_col);
      if (std::abs(c.dot(z) - obj) > 1e-9 * (1.0 + std::abs(obj))) continue;
      Vector xa = extract_x(z);
      double l2 = (xa - x0).squaredNorm();
      if (l2 < best_l2 - 1e-12) {
        best_l2 = l2;
        x = xa;
      }
    }
  }

  out.point = x;
  out.objective = (weights.array() * (x - x0).array().abs()).sum();
  out.status = SolveStatus::optimal;

  // Inequality multipliers from the slack reduced costs, then the l1
  // subgradient stationarity residual.
  Vector nu = Vector::Zero(m);
  for (int i = 0; i < m; ++i) nu(i) = std::max(0.0, lp.tableau(m, 2 * d + i));
  Vector g = Vector::Zero(d);
  for (int i = 0; i < m; ++i) g += nu(i) * rows.A.row(i).transpose();
  double stat = 0.0;
  for (int j = 0; j < d; ++j) {
    double delta = x(j) - x0(j);
    if (delta > 1e-9)
      stat = std::max(stat, std::abs(weights(j) + g(j)));
    else if (delta < -1e-9)
      stat = std::max(stat, std::abs(g(j) - weights(j)));
    else
      stat = std::max(stat, std::max(0.0, std::abs(g(j)) - weights(j)));
  }
  double primal = std::max(0.0, (rows.A * x - rows.b).maxCoeff());
  double comp = 0.0;
  for (int i = 0; i < m; ++i)
    comp = std::max(comp, std::abs(nu(i) * (rows.A.row(i).dot(x) - rows.b(i))));
  out.kkt_residual = std::max({stat, primal, comp});
  for (int i = 0; i < m; ++i) out.multipliers(rows.origin[i]) = nu(i) / rows.scale(i);
  return out;
}

namespace {

// Inner solve for the quadratic-multiplier path:
//   argmin ||x - x0||^2 + lam * (x-mu)^T P (x-mu)  s.t.  A x <= b
// returned with x-space multipliers of the linear constraints.
SolveOutcome qcqp_inner(const Vector& x0, const QuadIneq& q, double lam,
                        const std::vector<LinearIneq>& linear, const SolverConfig& cfg) {
  const int d = static_cast<int>(x0.size());
  Matrix H = Matrix::Identity(d, d) + lam * q.P;
  Eigen::LLT<Matrix> llt(H);
  if (llt.info() != Eigen::Success) throw std::runtime_error("solve_qcqp: Cholesky failure");
  Vector mean = llt.solve(x0 + lam * (q.P * q.mu));
  if (linear.empty()) {
    SolveOutcome out;
    out.point = mean;
    out.objective = (mean - x0).squaredNorm();
    out.status = SolveStatus::optimal;
    out.multipliers = Vector::Zero(0);
    return out;
  }
  Matrix L = llt.matrixL();
  // u = L^T x turns the objective into a plain projection; constraint
  // normals map to L^{-1} a.
  Vector u0 = L.transpose() * mean;
  std::vector<LinearIneq> tr(linear.size());
  for (std::size_t i = 0; i < linear.size(); ++i) {
    tr[i].a = L.template triangularView<Eigen::Lower>().solve(linear[i].a);
    tr[i].b = linear[i].b;
  }
  SolveOutcome inner = detail::project_polytope(u0, tr, cfg);
  if (inner.status != SolveStatus::optimal) return inner;
  SolveOutcome out;
  out.point = L.transpose().template triangularView<Eigen::Upper>().solve(inner.point);
  out.status = SolveStatus::optimal;
  out.iterations = inner.iterations;
  out.multipliers = inner.multipliers;  // identical in x-space (see derivation in tests)
  out.objective = (out.point - x0).squaredNorm();
  return out;
}

}  // namespace

SolveOutcome solve_qcqp(const Vector& x0, const ConstraintSet& cs, const SolverConfig& cfg) {
  if (cs.quadratic.empty()) return solve_qp(x0, cs, cfg);
  if (cs.quadratic.size() != 1)
    throw std::invalid_argument("solve_qcqp: exactly one quadratic constraint supported");
  const int d = static_cast<int>(x0.size());
  QuadIneq q = cs.quadratic.front();
  if (q.P.rows() != d || q.P.cols() != d || q.mu.size() != d)
    throw std::invalid_argument("solve_qcqp: quadratic dimension mismatch");
  q.P = 0.5 * (q.P + q.P.transpose());
  {
    Eigen::SelfAdjointEigenSolver<Matrix> es(q.P, Eigen::EigenvaluesOnly);
    double lo = es.eigenvalues().minCoeff();
    double hi = es.eigenvalues().maxCoeff();
    if (lo < -1e-8 * std::max(1.0, hi)) throw std::invalid_argument("solve_qcqp: P must be PSD");
  }

  SolveOutcome out;
  out.multipliers = Vector::Zero(static_cast<int>(cs.linear.size()));
  const double qscale = std::max(1.0, std::abs(q.c));
  const double ctol = cfg.feas_tol * qscale;

  if (q.c < -ctol) {
    out.status = SolveStatus::infeasible;  // empty ellipsoid
    return out;
  }

  // lam = 0: plain projection onto the polytope.
  ConstraintSet lin_only{cs.linear, {}};
  SolveOutcome base = solve_qp(x0, lin_only, cfg);
  if (base.status == SolveStatus::infeasible) {
    out.status = SolveStatus::infeasible;
    return out;
  }
  if (base.status == SolveStatus::optimal && quad_value(q, base.point) <= q.c + ctol) {
    base.quad_multiplier = 0.0;
    return base;
  }

  int total_iters = base.iterations;
  auto eval = [&](double lam) {
    SolveOutcome s = qcqp_inner(x0, q, lam, cs.linear, cfg);
    total_iters += s.iterations + 1;
    return s;
  };

  const double lam_max = 1e14;
  double lo = 0.0, hi = 1.0;
  SolveOutcome sol_hi = eval(hi);
  while (sol_hi.status == SolveStatus::optimal && quad_value(q, sol_hi.point) > q.c + ctol) {
    lo = hi;
    hi *= 8.0;
    if (hi > lam_max) break;
    sol_hi = eval(hi);
  }
  if (hi > lam_max || sol_hi.status != SolveStatus::optimal) {
    // Even an arbitrarily tight penalty cannot reach the ellipsoid from the
    // polytope: certify by minimizing the quadratic itself over the polytope.
    Matrix Preg = q.P + 1e-12 * std::max(1.0, q.P.trace() / d) * Matrix::Identity(d, d);
    Eigen::LLT<Matrix> llt(Preg);
    Matrix L = llt.matrixL();
    Vector u0 = L.transpose() * q.mu;
    std::vector<LinearIneq> tr(cs.linear.size());
    for (std::size_t i = 0; i < cs.linear.size(); ++i) {
      tr[i].a = L.template triangularView<Eigen::Lower>().solve(cs.linear[i].a);
      tr[i].b = cs.linear[i].b;
    }
    SolveOutcome qmin = cs.linear.empty()
                            ? SolveOutcome{q.mu, 0.0, SolveStatus::optimal, 0.0, 0, Vector::Zero(0), 0.0}
                            : detail::project_polytope(u0, tr, cfg);
    if (qmin.status == SolveStatus::optimal) {
      Vector xq = cs.linear.empty()
                      ? q.mu
                      : Vector(L.transpose().template triangularView<Eigen::Upper>().solve(qmin.point));
      if (quad_value(q, xq) <= q.c + ctol) {
        out = qmin;
        out.point = xq;
        out.objective = (xq - x0).squaredNorm();
        out.quad_multiplier = lam_max;
        out.kkt_residual = cfg.kkt_tol;  // boundary-degenerate case
        out.iterations = total_iters;
        return out;
      }
    }
    out.status = SolveStatus::infeasible;
    out.iterations = total_iters;
    return out;
  }

  // Bisection on the quadratic multiplier; phi(lam) = quad(x(lam)) - c is
  // non-increasing, phi(lo) > 0 >= phi(hi) - ctol.
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    SolveOutcome sm = eval(mid);
    if (sm.status != SolveStatus::optimal) break;
    double phi = quad_value(q, sm.point) - q.c;
    if (std::abs(phi) <= std::min(ctol, cfg.kkt_tol * qscale / (1.0 + mid))) {
      sol_hi = sm;
      hi = mid;
      break;
    }
    if (phi > 0.0) {
      lo = mid;
    } else {
      hi = mid;
      sol_hi = sm;
    }
  }

  out = sol_hi;
  out.quad_multiplier = hi;
  out.objective = (out.point - x0).squaredNorm();
  out.iterations = total_iters;

  // KKT residual for the full problem.
  Vector g = 2.0 * (out.point - x0) + 2.0 * hi * (q.P * (out.point - q.mu));
  for (int i = 0; i < static_cast<int>(cs.linear.size()); ++i)
    if (out.multipliers(i) != 0.0) g += out.multipliers(i) * cs.linear[i].a;
  double stat = g.lpNorm<Eigen::Infinity>();
  double primal = std::max(0.0, ConstraintSet{cs.linear, {q}}.max_violation(out.point) / qscale);
  double comp = hi > 0.0 ? std::abs(quad_value(q, out.point) - q.c) / qscale : 0.0;
  out.kkt_residual = std::max({stat, primal, comp});
  return out;
}

}  // namespace cfrobust
