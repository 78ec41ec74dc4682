#include "leocx/cdf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace leocx {

EmpiricalCdf::EmpiricalCdf(std::vector<double> samples)
    : sorted_(std::move(samples)) {
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::quantile(double q) const {
  if (sorted_.empty()) {
    throw std::logic_error("EmpiricalCdf::quantile on an empty sample set");
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::invalid_argument("EmpiricalCdf::quantile: q must be in [0, 1]");
  }
  // Smallest sample with F(x) >= q: index ceil(q*n) - 1, clamped to the
  // ends so q = 0 gives the minimum.
  std::size_t n = sorted_.size();
  double k = std::ceil(q * static_cast<double>(n));
  std::size_t idx = k <= 1.0 ? 0 : static_cast<std::size_t>(k) - 1;
  if (idx >= n) idx = n - 1;
  return sorted_[idx];
}

double EmpiricalCdf::min() const {
  if (sorted_.empty()) throw std::logic_error("EmpiricalCdf::min: empty");
  return sorted_.front();
}

double EmpiricalCdf::max() const {
  if (sorted_.empty()) throw std::logic_error("EmpiricalCdf::max: empty");
  return sorted_.back();
}

double EmpiricalCdf::mean() const {
  if (sorted_.empty()) throw std::logic_error("EmpiricalCdf::mean: empty");
  return std::accumulate(sorted_.begin(), sorted_.end(), 0.0) /
         static_cast<double>(sorted_.size());
}

double EmpiricalCdf::fraction_at_most(double x) const {
  if (sorted_.empty()) return 0.0;
  auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) /
         static_cast<double>(sorted_.size());
}

double EmpiricalCdf::fraction_at_least(double x) const {
  if (sorted_.empty()) return 0.0;
  auto it = std::lower_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(sorted_.end() - it) /
         static_cast<double>(sorted_.size());
}

}  // namespace leocx
