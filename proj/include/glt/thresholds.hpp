#pragma once

#include <string>

namespace glt {

enum class ThresholdFamily { Uniform, Exponential, Beta };

// Threshold distribution of a node: Uniform[0,1], Exponential(1) or
// Beta(alpha, beta). Immutable value type; all evaluations are pure.
//
// Evaluations take x >= 0 (negative arguments throw). Past a finite support
// bound h the cdf is extended by 1 and the density by 0.
class ThresholdSpec {
 public:
  ThresholdSpec() = default;  // uniform

  static ThresholdSpec uniform();
  static ThresholdSpec exponential_unit();
  // Requires alpha > 0, beta > 0 (alpha < 1 is allowed for IM-only use).
  static ThresholdSpec beta(double alpha, double beta);
  // Requires alpha >= 1, beta >= 1 so that the density is log-concave.
  static ThresholdSpec beta_fit_safe(double alpha, double beta);

  ThresholdFamily family() const noexcept { return family_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }

  // h: 1 for uniform and beta, +infinity for exponential.
  double support_bound() const noexcept;
  bool log_concave_density() const noexcept;
  bool concave_cdf() const noexcept;

  double cdf(double x) const;
  // 1 - F(x) through a dedicated path (no cancellation as F -> 1).
  double sf(double x) const;
  double density(double x) const;
  double density_derivative(double x) const;
  double inverse_cdf(double p) const;

  // F(x) - F(y) for x >= y >= 0, evaluated on whichever tail is accurate.
  double cdf_difference(double x, double y) const;
  // Below this value a computed cdf difference is treated as unreliable
  // (0 for the closed-form families, 1e-15 for the generic beta path).
  double min_reliable_difference() const noexcept;

  std::string describe() const;

  friend bool operator==(const ThresholdSpec&, const ThresholdSpec&) = default;

 private:
  ThresholdFamily family_ = ThresholdFamily::Uniform;
  double alpha_ = 1.0;
  double beta_ = 1.0;
  double log_beta_ = 0.0;
};

ThresholdSpec make_uniform();
ThresholdSpec make_exponential_unit();
ThresholdSpec make_beta(double alpha, double beta);

// Analytic decision per family.
bool check_concave_cdf(const ThresholdSpec& spec);

}  // namespace glt
