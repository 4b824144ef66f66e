#include "glt/thresholds.hpp"

#include "glt/error.hpp"
#include "glt/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace glt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_argument(double x) {
  if (!(x >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "threshold distribution evaluated at a negative point",
                {{"x", x}});
  }
}

}  // namespace

ThresholdSpec ThresholdSpec::uniform() { return ThresholdSpec{}; }

ThresholdSpec ThresholdSpec::exponential_unit() {
  ThresholdSpec s;
  s.family_ = ThresholdFamily::Exponential;
  return s;
}

ThresholdSpec ThresholdSpec::beta(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    throw Error(ErrorKind::InvalidArgument, "beta parameters must be positive",
                {{"alpha", alpha}, {"beta", beta}});
  }
  ThresholdSpec s;
  s.family_ = ThresholdFamily::Beta;
  s.alpha_ = alpha;
  s.beta_ = beta;
  s.log_beta_ = log_beta_function(alpha, beta);
  return s;
}

ThresholdSpec ThresholdSpec::beta_fit_safe(double alpha, double beta) {
  if (!(alpha >= 1.0) || !(beta >= 1.0)) {
    throw Error(ErrorKind::InvalidArgument,
                "fitting requires beta parameters >= 1 (log-concave density)",
                {{"alpha", alpha}, {"beta", beta}});
  }
  return ThresholdSpec::beta(alpha, beta);
}

double ThresholdSpec::support_bound() const noexcept {
  return family_ == ThresholdFamily::Exponential ? kInf : 1.0;
}

bool ThresholdSpec::log_concave_density() const noexcept {
  if (family_ != ThresholdFamily::Beta) return true;
  return alpha_ >= 1.0 && beta_ >= 1.0;
}

bool ThresholdSpec::concave_cdf() const noexcept {
  if (family_ != ThresholdFamily::Beta) return true;
  return alpha_ <= 1.0 && beta_ >= 1.0;
}

double ThresholdSpec::cdf(double x) const {
  check_argument(x);
  switch (family_) {
    case ThresholdFamily::Uniform: return std::min(x, 1.0);
    case ThresholdFamily::Exponential: return -std::expm1(-x);
    case ThresholdFamily::Beta:
      if (x >= 1.0) return 1.0;
      return std::clamp(regularized_incomplete_beta(alpha_, beta_, x), 0.0, 1.0);
  }
  return 0.0;
}

double ThresholdSpec::sf(double x) const {
  check_argument(x);
  switch (family_) {
    case ThresholdFamily::Uniform: return x >= 1.0 ? 0.0 : 1.0 - x;
    case ThresholdFamily::Exponential: return std::exp(-x);
    case ThresholdFamily::Beta:
      if (x >= 1.0) return 0.0;
      return std::clamp(regularized_incomplete_beta(beta_, alpha_, 1.0 - x), 0.0, 1.0);
  }
  return 1.0;
}

double ThresholdSpec::density(double x) const {
  check_argument(x);
  switch (family_) {
    case ThresholdFamily::Uniform: return x <= 1.0 ? 1.0 : 0.0;
    case ThresholdFamily::Exponential: return std::exp(-x);
    case ThresholdFamily::Beta: {
      if (x > 1.0) return 0.0;
      const double left = alpha_ == 1.0 ? 1.0 : std::pow(x, alpha_ - 1.0);
      const double right = beta_ == 1.0 ? 1.0 : std::pow(1.0 - x, beta_ - 1.0);
      return left * right * std::exp(-log_beta_);
    }
  }
  return 0.0;
}

double ThresholdSpec::density_derivative(double x) const {
  check_argument(x);
  switch (family_) {
    case ThresholdFamily::Uniform: return 0.0;
    case ThresholdFamily::Exponential: return -std::exp(-x);
    case ThresholdFamily::Beta: {
      if (x > 1.0) return 0.0;
      // d/dx x^(a-1) (1-x)^(b-1) = (a-1) x^(a-2) (1-x)^(b-1) - (b-1) x^(a-1) (1-x)^(b-2);
      // terms with a zero coefficient are dropped so the edges stay finite.
      double value = 0.0;
      if (alpha_ != 1.0) {
        const double right = beta_ == 1.0 ? 1.0 : std::pow(1.0 - x, beta_ - 1.0);
        value += (alpha_ - 1.0) * std::pow(x, alpha_ - 2.0) * right;
      }
      if (beta_ != 1.0) {
        const double left = alpha_ == 1.0 ? 1.0 : std::pow(x, alpha_ - 1.0);
        value -= (beta_ - 1.0) * left * std::pow(1.0 - x, beta_ - 2.0);
      }
      return value * std::exp(-log_beta_);
    }
  }
  return 0.0;
}

double ThresholdSpec::inverse_cdf(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "probability outside [0, 1]", {{"p", p}});
  }
  switch (family_) {
    case ThresholdFamily::Uniform: return p;
    case ThresholdFamily::Exponential: return p == 1.0 ? kInf : -std::log1p(-p);
    case ThresholdFamily::Beta: {
      if (p == 0.0) return 0.0;
      if (p == 1.0) return 1.0;
      // Newton steps safeguarded by a shrinking bracket.
      double lo = 0.0;
      double hi = 1.0;
      double x = 0.5;
      for (int it = 0; it < 200; ++it) {
        const double f = cdf(x) - p;
        if (f == 0.0) return x;
        if (f < 0.0) lo = x; else hi = x;
        const double dens = density(x);
        double next = dens > 0.0 && std::isfinite(dens) ? x - f / dens : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-16 * std::max(1.0, x) || hi - lo <= 1e-17) return next;
        x = next;
      }
      return x;
    }
  }
  return p;
}

double ThresholdSpec::cdf_difference(double x, double y) const {
  check_argument(y);
  switch (family_) {
    case ThresholdFamily::Uniform: return std::min(x, 1.0) - std::min(y, 1.0);
    case ThresholdFamily::Exponential:
      // e^{-y} (1 - e^{-(x-y)})
      return std::exp(-y) * -std::expm1(-(x - y));
    case ThresholdFamily::Beta: {
      const double fy = cdf(y);
      if (fy < 0.5) return cdf(x) - fy;
      return sf(y) - sf(x);
    }
  }
  return 0.0;
}

double ThresholdSpec::min_reliable_difference() const noexcept {
  return family_ == ThresholdFamily::Beta ? 1e-15 : 0.0;
}

std::string ThresholdSpec::describe() const {
  switch (family_) {
    case ThresholdFamily::Uniform: return "uniform";
    case ThresholdFamily::Exponential: return "exponential";
    case ThresholdFamily::Beta: {
      std::ostringstream os;
      os << "beta(" << alpha_ << "," << beta_ << ")";
      return os.str();
    }
  }
  return "unknown";
}

ThresholdSpec make_uniform() { return ThresholdSpec::uniform(); }
ThresholdSpec make_exponential_unit() { return ThresholdSpec::exponential_unit(); }
ThresholdSpec make_beta(double alpha, double beta) { return ThresholdSpec::beta(alpha, beta); }

bool check_concave_cdf(const ThresholdSpec& spec) { return spec.concave_cdf(); }

}  // namespace glt
