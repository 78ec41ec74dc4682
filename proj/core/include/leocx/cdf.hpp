#pragma once

#include <cstddef>
#include <vector>

namespace leocx {

// Empirical distribution over a fixed sample set. Quantiles use the
// type-1 inverse CDF: the smallest sample x with F(x) >= q, so the median
// of {1..100} is 50 (lower midpoint, no interpolation).
class EmpiricalCdf {
 public:
  EmpiricalCdf() = default;
  explicit EmpiricalCdf(std::vector<double> samples);  // sorts its copy

  std::size_t count() const { return sorted_.size(); }
  bool empty() const { return sorted_.empty(); }

  // Precondition: not empty (throws std::logic_error otherwise).
  double quantile(double q) const;  // q in [0, 1]
  double median() const { return quantile(0.5); }
  double min() const;
  double max() const;
  double mean() const;

  // Fraction of samples <= x; 0 on an empty set.
  double fraction_at_most(double x) const;
  double fraction_at_least(double x) const;

  const std::vector<double>& sorted_samples() const { return sorted_; }

 private:
  std::vector<double> sorted_;
};

}  // namespace leocx
