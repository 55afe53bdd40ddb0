#ifndef CFROBUST_CORE_HPP
#define CFROBUST_CORE_HPP

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace cfrobust {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A feature vector together with its class label (dense ids 0..n_classes-1).
struct LabeledSample {
  Vector features;
  int label = 0;
};

struct Dataset {
  std::vector<LabeledSample> samples;
  std::vector<std::string> feature_names;
  int n_classes = 0;

  int dim() const { return samples.empty() ? 0 : static_cast<int>(samples.front().features.size()); }
  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }

  // Throws if samples disagree on dimension, contain non-finite values or
  // labels outside [0, n_classes).
  void validate() const;

  std::vector<int> indices_of_class(int label) const;
  std::size_t count_of_class(int label) const;
};

/// x -> matrix * x + offset, mapping d-dimensional inputs to k dimensions (k <= d).
struct AffineMap {
  Matrix matrix;  // k x d
  Vector offset;  // k

  Vector operator()(const Vector& x) const;
  int in_dim() const { return static_cast<int>(matrix.cols()); }
  int out_dim() const { return static_cast<int>(matrix.rows()); }

  static AffineMap identity(int d);
};

/// outer(inner(x)) as a single map.
AffineMap compose(const AffineMap& outer, const AffineMap& inner);

/// a^T x <= b
struct LinearIneq {
  Vector a;
  double b = 0.0;
};

/// (x - mu)^T P (x - mu) <= c with P positive semidefinite.
struct QuadIneq {
  Matrix P;
  Vector mu;
  double c = 0.0;
};

/// A convex feasible region: intersection of halfspaces and ellipsoids.
struct ConstraintSet {
  std::vector<LinearIneq> linear;
  std::vector<QuadIneq> quadratic;

  int dim() const;
  bool empty() const { return linear.empty() && quadratic.empty(); }
  double max_violation(const Vector& x) const;
  bool contains(const Vector& x, double tol = 1e-9) const { return max_violation(x) <= tol; }
};

enum class MetricKind { L1, SquaredL2, WeightedL1, Lp };

struct Metric {
  MetricKind kind = MetricKind::SquaredL2;
  Vector weights;  // WeightedL1 only; strictly positive
  double p = 2.0;  // Lp only

  static Metric l1() { return {MetricKind::L1, {}, 1.0}; }
  static Metric squared_l2() { return {MetricKind::SquaredL2, {}, 2.0}; }
  static Metric weighted_l1(Vector w) { return {MetricKind::WeightedL1, std::move(w), 1.0}; }
  static Metric lp(double p) { return {MetricKind::Lp, {}, p}; }
};

double distance(const Vector& a, const Vector& b, const Metric& metric);

/// Pulls constraints defined in the k-dimensional image of `map` back into the
/// d-dimensional source space: a^T(Mx+o) <= b becomes (M^T a)^T x <= b - a^T o,
/// and quadratics get P -> M^T P M with the center solved from M mu~ = mu - o.
ConstraintSet compose_affine(const ConstraintSet& cs, const AffineMap& map);

struct CounterfactualQuery {
  LabeledSample origin;
  int target_label = 0;
  Metric regularization = Metric::squared_l2();
  std::optional<double> log_density_threshold;  // plausible mode when set
};

struct CounterfactualResult {
  Vector point;
  double cost = 0.0;
  int target_label = 0;
  bool feasible = false;
  double kkt_residual = 0.0;
  int branch = -1;     // decision-region branch that won
  int component = -1;  // GMM component that won (plausible mode), -1 otherwise
};

}  // namespace cfrobust

#endif
