#pragma once

namespace glt {

double log_beta_function(double a, double b);

// I_x(a, b), evaluated by the continued fraction on whichever tail converges
// fast. Absolute accuracy is around 1e-14 for moderate a, b.
double regularized_incomplete_beta(double a, double b, double x);

double normal_cdf(double z);
// Acklam's rational approximation refined by one Halley step.
double normal_quantile(double p);

}  // namespace glt
