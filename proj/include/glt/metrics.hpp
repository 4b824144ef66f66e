#pragma once

#include <span>
#include <vector>

namespace glt {

// |y - y_hat|_1 / |y|_1. Throws InvalidArgument on length mismatch or zero-norm truth.
double rmae(std::span<const double> truth, std::span<const double> estimate);

double mean(std::span<const double> values);
// Sample standard deviation over sqrt(count); 0 for fewer than two values.
double standard_error(std::span<const double> values);
double median(std::vector<double> values);

}  // namespace glt
