#include "glt/metrics.hpp"

#include "glt/error.hpp"

#include <algorithm>
#include <cmath>

namespace glt {

double rmae(std::span<const double> truth, std::span<const double> estimate) {
  if (truth.size() != estimate.size()) {
    throw Error(ErrorKind::InvalidArgument, "vectors differ in length",
                {{"truth", truth.size()}, {"estimate", estimate.size()}});
  }
  double diff = 0.0;
  double norm = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    diff += std::abs(truth[i] - estimate[i]);
    norm += std::abs(truth[i]);
  }
  if (!(norm > 0.0)) throw Error(ErrorKind::InvalidArgument, "truth has zero l1 norm");
  return diff / norm;
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double standard_error(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  const double n = static_cast<double>(values.size());
  return std::sqrt(ss / (n - 1.0) / n);
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorKind::InvalidArgument, "median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace glt
