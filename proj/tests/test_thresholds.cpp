#include "glt/error.hpp"
#include "glt/special_functions.hpp"
#include "glt/thresholds.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <doctest.h>

#include <cmath>
#include <vector>

using namespace glt;

namespace {

std::vector<ThresholdSpec> all_specs() {
  return {make_uniform(), make_exponential_unit(), make_beta(1, 1), make_beta(2, 2),
          make_beta(1, 3), make_beta(2, 1), make_beta(3, 5), make_beta(0.5, 2), make_beta(1, 10)};
}

double upper(const ThresholdSpec& s) { return std::isfinite(s.support_bound()) ? 1.0 : 10.0; }

}  // namespace

TEST_CASE("closed-form values") {
  CHECK(make_uniform().cdf(0.3) == doctest::Approx(0.3));
  CHECK(make_exponential_unit().cdf(std::log(2.0)) == doctest::Approx(0.5));
  CHECK(make_beta(2, 1).cdf(0.5) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(make_uniform().cdf(1.7) == 1.0);
  CHECK(make_uniform().sf(1.7) == 0.0);
  CHECK(std::isinf(make_exponential_unit().support_bound()));
  CHECK(make_beta(3, 2).support_bound() == 1.0);
  CHECK_THROWS_AS(make_uniform().cdf(-0.1), Error);
}

TEST_CASE("beta(1,1) coincides with the uniform") {
  for (double x = 0.0; x <= 1.0; x += 0.01) {
    CHECK(make_beta(1, 1).cdf(x) == doctest::Approx(make_uniform().cdf(x)).epsilon(1e-14));
  }
}

TEST_CASE("shape flags") {
  CHECK(check_concave_cdf(make_uniform()));
  CHECK(check_concave_cdf(make_exponential_unit()));
  CHECK(check_concave_cdf(make_beta(1, 2)));
  CHECK_FALSE(check_concave_cdf(make_beta(2, 1)));
  CHECK(make_beta(2, 1).log_concave_density());
  CHECK_FALSE(check_concave_cdf(make_beta(2, 2)));
  CHECK_FALSE(make_beta(0.5, 2).log_concave_density());
  CHECK_THROWS_AS(make_beta(0.0, 1.0), Error);
  CHECK_THROWS_AS(ThresholdSpec::beta_fit_safe(0.5, 2.0), Error);
}

TEST_CASE("concavity flag agrees with the sign of the second derivative") {
  // F'' = density'. A concave cdf has density' <= 0 on the whole support.
  for (const auto& s : all_specs()) {
    bool concave = true;
    for (double x = 0.005; x < upper(s); x += 0.005) concave = concave && s.density_derivative(x) <= 1e-12;
    CHECK_MESSAGE(concave == check_concave_cdf(s), s.describe());
  }
}

TEST_CASE("incomplete beta agrees with Boost.Math") {
  for (double a : {0.5, 1.0, 2.0, 3.0, 7.5, 10.0}) {
    for (double b : {0.5, 1.0, 2.0, 5.0, 10.0}) {
      for (double x = 0.0; x <= 1.0; x += 0.01) {
        const double ours = regularized_incomplete_beta(a, b, x);
        CHECK(std::abs(ours - boost::math::ibeta(a, b, x)) < 1e-12);
      }
    }
  }
}

TEST_CASE("normal quantile") {
  const boost::math::normal standard;
  for (double p : {1e-8, 0.001, 0.025, 0.3, 0.5, 0.8, 0.975, 0.999999}) {
    CHECK(std::abs(normal_quantile(p) - boost::math::quantile(standard, p)) < 1e-9);
  }
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054));
}

TEST_CASE("inverse cdf round trip") {
  for (const auto& s : all_specs()) {
    for (double x = 0.01; x < upper(s); x += 0.01) {
      if (s.sf(x) < 1e-6) break;  // cdf no longer resolvable in double precision
      CHECK_MESSAGE(std::abs(s.inverse_cdf(s.cdf(x)) - x) < 1e-10, s.describe() << " x=" << x);
    }
  }
}

TEST_CASE("density and its derivative match finite differences") {
  const double h = 1e-6;
  for (const auto& s : all_specs()) {
    for (double x = 0.02; x < upper(s) - 0.02; x += 0.02) {
      const double fd = (s.cdf(x + h) - s.cdf(x - h)) / (2 * h);
      CHECK_MESSAGE(std::abs(fd - s.density(x)) <= 1e-6 * std::max(1.0, std::abs(s.density(x))),
                    s.describe() << " x=" << x);
      const double fd2 = (s.density(x + h) - s.density(x - h)) / (2 * h);
      CHECK_MESSAGE(std::abs(fd2 - s.density_derivative(x)) <=
                        1e-5 * std::max(1.0, std::abs(s.density_derivative(x))),
                    s.describe() << " x=" << x);
    }
  }
}

TEST_CASE("log-concave densities are midpoint concave") {
  for (const auto& s : all_specs()) {
    if (!s.log_concave_density()) continue;
    const double step = 0.01;
    for (double x = step; x + 2 * step < upper(s); x += step) {
      const double a = std::log(s.density(x));
      const double b = std::log(s.density(x + step));
      const double c = std::log(s.density(x + 2 * step));
      CHECK_MESSAGE(b >= 0.5 * (a + c) - 1e-12, s.describe() << " x=" << x);
    }
  }
}

TEST_CASE("cdf differences and survival stay accurate in the upper tail") {
  const auto s = make_beta(1, 3);
  // 1 - F(x) = (1 - x)^3 for beta(1, 3).
  for (double x : {0.9, 0.99, 0.999}) {
    CHECK(s.sf(x) == doctest::Approx(std::pow(1 - x, 3)).epsilon(1e-10));
    CHECK(s.cdf_difference(x, 0.8) == doctest::Approx(std::pow(0.2, 3) - std::pow(1 - x, 3)).epsilon(1e-10));
  }
  const auto e = make_exponential_unit();
  CHECK(e.cdf_difference(30.0, 29.0) == doctest::Approx(std::exp(-29.0) - std::exp(-30.0)).epsilon(1e-12));
}
