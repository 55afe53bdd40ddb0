#ifndef CFROBUST_OPTIM_HPP
#define CFROBUST_OPTIM_HPP

#include "cfrobust/core.hpp"

namespace cfrobust {

enum class SolveStatus { optimal, infeasible, max_iter };

struct SolveOutcome {
  Vector point;
  double objective = 0.0;
  SolveStatus status = SolveStatus::infeasible;
  double kkt_residual = 0.0;
  int iterations = 0;
  // Lagrange multipliers of the linear inequalities (stationarity convention
  // 2(x - x0) + sum_i multipliers[i] * a_i [+ 2*quad_multiplier*P(x-mu)] = 0),
  // zero for inactive rows.
  Vector multipliers;
  double quad_multiplier = 0.0;
};

struct SolverConfig {
  double feas_tol = 1e-8;
  double kkt_tol = 1e-6;
  int max_iter = 10000;
};

/// Exact squared-l2 projection onto the box [lower, upper] (clamp); +-inf
/// bounds allowed. The clamp is also optimal for any weighted-l1 objective.
SolveOutcome project_box(const Vector& x0, const Vector& lower, const Vector& upper);

/// min ||x - x0||^2 over the polytope {x : a_i^T x <= b_i}. Feasibility is
/// certified by a phase-1 LP (minimum of the max constraint violation); the
/// projection itself runs a dual active-set method.
SolveOutcome solve_qp(const Vector& x0, const ConstraintSet& cs, const SolverConfig& cfg = {});

/// min sum_i w_i |x_i - x0_i| over the same polytope, via the slack-variable
/// LP. Alternative optimal vertices reachable from the final one by a single
/// zero-reduced-cost pivot are inspected and the smallest-l2 one is returned.
SolveOutcome solve_lp_l1(const Vector& x0, const Vector& weights, const ConstraintSet& cs,
                         const SolverConfig& cfg = {});

/// min ||x - x0||^2 subject to linear inequalities and a single convex
/// quadratic constraint (x-mu)^T P (x-mu) <= c. Solved by bisection on the
/// quadratic constraint's Lagrange multiplier with projections as inner solves.
SolveOutcome solve_qcqp(const Vector& x0, const ConstraintSet& cs, const SolverConfig& cfg = {});

namespace detail {

/// Phase-1 value: min over x of max_i (a_i^T x - b_i), clipped below at 0.
/// Zero (within tolerance) means the polytope is non-empty.
double min_max_violation(const ConstraintSet& cs, int dim, const SolverConfig& cfg);

/// min ||x - x0||^2 s.t. A x <= b assuming feasibility was already
/// established; dual active-set iteration.
SolveOutcome project_polytope(const Vector& x0, const std::vector<LinearIneq>& ineqs,
                              const SolverConfig& cfg);

}  // namespace detail

}  // namespace cfrobust

#endif
