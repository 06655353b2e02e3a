#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace spa {

using State = std::vector<double>;

/// Weighted Euclidean metric d(x,y) = sqrt(sum_i w_i (x_i - y_i)^2).
///
/// ODE models use unit weights. The p-Laplacian model stores quadrature
/// weights for interior nodes and point masses for the two boundary nodes so
/// that the induced norm is the discrete L2(Omega) x L2(Gamma) norm.
class MetricDescriptor {
 public:
  MetricDescriptor() = default;
  explicit MetricDescriptor(std::vector<double> weights);

  static MetricDescriptor euclidean(std::size_t dimension);

  std::size_t dimension() const noexcept { return weights_.size(); }
  const std::vector<double>& weights() const noexcept { return weights_; }

  double distance(std::span<const double> x, std::span<const double> y) const;
  double norm(std::span<const double> x) const;
  /// Weighted inner product sum_i w_i x_i y_i.
  double inner(std::span<const double> x, std::span<const double> y) const;

  bool operator==(const MetricDescriptor&) const = default;

 private:
  std::vector<double> weights_;
};

/// Finite nonempty point set standing in for a compact subset of the state
/// space. All points share the descriptor's dimension.
class SetCloud {
 public:
  SetCloud(std::vector<State> points, MetricDescriptor metric);

  static SetCloud singleton(State point, MetricDescriptor metric);
  /// Convenience for scalar clouds with the unit metric.
  static SetCloud scalars(const std::vector<double>& values);

  std::size_t size() const noexcept { return points_.size(); }
  std::size_t dimension() const noexcept { return metric_.dimension(); }
  const std::vector<State>& points() const noexcept { return points_; }
  const State& operator[](std::size_t i) const { return points_[i]; }
  const MetricDescriptor& metric() const noexcept { return metric_; }

  /// d(x, A) = min over the cloud.
  double distance_to(std::span<const double> x) const;
  double diameter() const;
  /// Largest norm of any point.
  double radius() const;

  /// Union of point lists (no deduplication).
  SetCloud merged(const SetCloud& other) const;

 private:
  std::vector<State> points_;
  MetricDescriptor metric_;
};

/// sup_{a in A} inf_{b in B} d(a, b). Asymmetric.
double semidist(const SetCloud& a, const SetCloud& b);
double hausdorff(const SetCloud& a, const SetCloud& b);
/// d(x, A) < eps, strictly.
bool in_eps_neighborhood(const SetCloud& a, std::span<const double> x, double eps);

/// Greedy farthest-point thinning: starts from the first point, repeatedly
/// keeps the point farthest from the kept set (lowest index on ties) until
/// every point lies within tol. Kept points are returned in original order.
SetCloud prune(const SetCloud& a, double tol);

}  // namespace spa
