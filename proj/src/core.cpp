#include "cfrobust/core.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cfrobust {

void Dataset::validate() const {
  if (samples.empty()) return;
  const auto d = samples.front().features.size();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.features.size() != d) {
      std::ostringstream os;
      os << "dataset: sample " << i << " has dimension " << s.features.size() << ", expected " << d;
      throw std::invalid_argument(os.str());
    }
    if (!s.features.allFinite()) {
      std::ostringstream os;
      os << "dataset: sample " << i << " has non-finite features";
      throw std::invalid_argument(os.str());
    }
    if (s.label < 0 || s.label >= n_classes) {
      std::ostringstream os;
      os << "dataset: sample " << i << " has label " << s.label << " outside [0, " << n_classes << ")";
      throw std::invalid_argument(os.str());
    }
  }
}

std::vector<int> Dataset::indices_of_class(int label) const {
  std::vector<int> idx;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (samples[i].label == label) idx.push_back(static_cast<int>(i));
  return idx;
}

std::size_t Dataset::count_of_class(int label) const {
  std::size_t n = 0;
  for (const auto& s : samples)
    if (s.label == label) ++n;
  return n;
}

Vector AffineMap::operator()(const Vector& x) const {
  if (x.size() != matrix.cols()) throw std::invalid_argument("affine map: dimension mismatch");
  return matrix * x + offset;
}

AffineMap AffineMap::identity(int d) {
  return {Matrix::Identity(d, d), Vector::Zero(d)};
}

AffineMap compose(const AffineMap& outer, const AffineMap& inner) {
  if (outer.in_dim() != inner.out_dim()) throw std::invalid_argument("compose: dimension mismatch");
  return {outer.matrix * inner.matrix, outer.matrix * inner.offset + outer.offset};
}

int ConstraintSet::dim() const {
  if (!linear.empty()) return static_cast<int>(linear.front().a.size());
  if (!quadratic.empty()) return static_cast<int>(quadratic.front().mu.size());
  return 0;
}

double ConstraintSet::max_violation(const Vector& x) const {
  double v = 0.0;
  for (const auto& li : linear) v = std::max(v, li.a.dot(x) - li.b);
  for (const auto& qi : quadratic) {
    Vector r = x - qi.mu;
    v = std::max(v, r.dot(qi.P * r) - qi.c);
  }
  return v;
}

double distance(const Vector& a, const Vector& b, const Metric& metric) {
  if (a.size() != b.size()) throw std::invalid_argument("distance: dimension mismatch");
  if (!a.allFinite() || !b.allFinite()) throw std::invalid_argument("distance: non-finite input");
  switch (metric.kind) {
    case MetricKind::L1:
      return (a - b).lpNorm<1>();
    case MetricKind::SquaredL2:
      return (a - b).squaredNorm();
    case MetricKind::WeightedL1: {
      if (metric.weights.size() != a.size())
        throw std::invalid_argument("distance: weight dimension mismatch");
      if ((metric.weights.array() <= 0.0).any())
        throw std::invalid_argument("distance: weights must be strictly positive");
      return (metric.weights.array() * (a - b).array().abs()).sum();
    }
    case MetricKind::Lp: {
      if (metric.p < 1.0) throw std::invalid_argument("distance: lp order must be >= 1");
      return std::pow((a - b).array().abs().pow(metric.p).sum(), 1.0 / metric.p);
    }
  }
  throw std::logic_error("distance: unknown metric");
}

ConstraintSet compose_affine(const ConstraintSet& cs, const AffineMap& map) {
  const int k = map.out_dim();
  ConstraintSet out;
  out.linear.reserve(cs.linear.size());
  out.quadratic.reserve(cs.quadratic.size());
  for (const auto& li : cs.linear) {
    if (li.a.size() != k) throw std::invalid_argument("compose_affine: linear dimension mismatch");
    out.linear.push_back({map.matrix.transpose() * li.a, li.b - li.a.dot(map.offset)});
  }
  for (const auto& qi : cs.quadratic) {
    if (qi.mu.size() != k || qi.P.rows() != k || qi.P.cols() != k)
      throw std::invalid_argument("compose_affine: quadratic dimension mismatch");
    // (Mx + o - mu)^T P (Mx + o - mu) <= c  ==>  (x - mu~)^T M^T P M (x - mu~) <= c~
    // with M^T P M mu~ = -M^T P t for t = o - mu; always solvable since
    // -M^T P t lies in the range of M^T P M.
    Matrix Pt = map.matrix.transpose() * qi.P * map.matrix;
    Pt = 0.5 * (Pt + Pt.transpose());
    Vector t = map.offset - qi.mu;
    Vector rhs = -(map.matrix.transpose() * (qi.P * t));
    Vector mu_t = Pt.completeOrthogonalDecomposition().solve(rhs);
    double c_t = qi.c - t.dot(qi.P * t) + mu_t.dot(Pt * mu_t);
    out.quadratic.push_back({std::move(Pt), std::move(mu_t), c_t});
  }
  return out;
}

}  // namespace cfrobust
