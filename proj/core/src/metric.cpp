#include "spa/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spa/errors.hpp"

namespace spa {

MetricDescriptor::MetricDescriptor(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw ContractViolation("metric: dimension must be positive");
  bool any_positive = false;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ContractViolation("metric: weights must be finite and nonnegative");
    any_positive = any_positive || w > 0.0;
  }
  if (!any_positive) throw ContractViolation("metric: at least one weight must be positive");
}

MetricDescriptor MetricDescriptor::euclidean(std::size_t dimension) {
  return MetricDescriptor(std::vector<double>(dimension, 1.0));
}

double MetricDescriptor::distance(std::span<const double> x, std::span<const double> y) const {
  if (x.size() != weights_.size() || y.size() != weights_.size())
    throw ContractViolation("metric: state dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    const double d = x[i] - y[i];
    acc += weights_[i] * d * d;
  }
  return std::sqrt(acc);
}

double MetricDescriptor::norm(std::span<const double> x) const {
  return std::sqrt(inner(x, x));
}

double MetricDescriptor::inner(std::span<const double> x, std::span<const double> y) const {
  if (x.size() != weights_.size() || y.size() != weights_.size())
    throw ContractViolation("metric: state dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) acc += weights_[i] * x[i] * y[i];
  return acc;
}

SetCloud::SetCloud(std::vector<State> points, MetricDescriptor metric)
    : points_(std::move(points)), metric_(std::move(metric)) {
  if (points_.empty()) throw ContractViolation("SetCloud: cloud must be nonempty");
  for (const auto& p : points_)
    if (p.size() != metric_.dimension()) throw ContractViolation("SetCloud: point dimension mismatch");
}

SetCloud SetCloud::singleton(State point, MetricDescriptor metric) {
  return SetCloud({std::move(point)}, std::move(metric));
}

SetCloud SetCloud::scalars(const std::vector<double>& values) {
  std::vector<State> pts;
  pts.reserve(values.size());
  for (double v : values) pts.push_back({v});
  return SetCloud(std::move(pts), MetricDescriptor::euclidean(1));
}

double SetCloud::distance_to(std::span<const double> x) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : points_) best = std::min(best, metric_.distance(x, p));
  return best;
}

double SetCloud::diameter() const {
  double d = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i)
    for (std::size_t j = i + 1; j < points_.size(); ++j)
      d = std::max(d, metric_.distance(points_[i], points_[j]));
  return d;
}

double SetCloud::radius() const {
  double r = 0.0;
  for (const auto& p : points_) r = std::max(r, metric_.norm(p));
  return r;
}

SetCloud SetCloud::merged(const SetCloud& other) const {
  if (!(metric_ == other.metric_)) throw ContractViolation("SetCloud: metric mismatch in merge");
  std::vector<State> pts = points_;
  pts.insert(pts.end(), other.points_.begin(), other.points_.end());
  return SetCloud(std::move(pts), metric_);
}

double semidist(const SetCloud& a, const SetCloud& b) {
  if (!(a.metric() == b.metric())) throw ContractViolation("semidist: clouds use different metrics");
  double worst = 0.0;
  for (const auto& p : a.points()) worst = std::max(worst, b.distance_to(p));
  return worst;
}

double hausdorff(const SetCloud& a, const SetCloud& b) {
  return std::max(semidist(a, b), semidist(b, a));
}

bool in_eps_neighborhood(const SetCloud& a, std::span<const double> x, double eps) {
  if (!(eps > 0.0)) throw ContractViolation("in_eps_neighborhood: eps must be positive");
  return a.distance_to(x) < eps;
}

SetCloud prune(const SetCloud& a, double tol) {
  if (!(tol > 0.0)) throw ContractViolation("prune: tol must be positive");
  const auto& pts = a.points();
  const std::size_t n = pts.size();
  std::vector<double> gap(n, std::numeric_limits<double>::infinity());
  std::vector<char> kept(n, 0);

  std::size_t next = 0;
  for (;;) {
    kept[next] = 1;
    for (std::size_t i = 0; i < n; ++i)
      gap[i] = std::min(gap[i], a.metric().distance(pts[i], pts[next]));
    double farthest = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (gap[i] > farthest) {
        farthest = gap[i];
        next = i;
      }
    }
    if (farthest <= tol) break;
  }

  std::vector<State> out;
  for (std::size_t i = 0; i < n; ++i)
    if (kept[i]) out.push_back(pts[i]);
  return SetCloud(std::move(out), a.metric());
}

}  // namespace spa
