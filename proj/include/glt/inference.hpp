#pragma once

#include "glt/estimation.hpp"
#include "glt/likelihood.hpp"
#include "glt/model.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace glt {

// Sigma_v = [-Hessian of L_v]^{-1} at the estimate. Valid only when the
// negated Hessian is positive definite.
struct CovarianceResult {
  NodeId node = 0;
  Eigen::MatrixXd covariance;
  double min_eigenvalue = 0.0;  // of the negated Hessian
  bool valid = false;
  std::string message;
};

CovarianceResult node_covariance(const NodeData& data, const Eigen::VectorXd& theta,
                                 const ThresholdSpec& spec);
CovarianceResult node_covariance(const NodeData& data, const NodeFitResult& fit);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
};

// Some coordinate sits on theta >= epsilon or the sum sits on gamma; the
// normal approximation is unreliable there.
bool on_boundary(const NodeFitResult& fit, double relative_tolerance = 1e-7);

std::vector<double> standard_errors(const CovarianceResult& covariance);
// b +- z * se, truncated to [0, h_v]. Throws InvalidArgument on an invalid covariance.
std::vector<Interval> weight_intervals(const NodeFitResult& fit, const CovarianceResult& covariance,
                                       double level = 0.95);

struct DifferenceTest {
  double z = 0.0;
  double p_value = 1.0;
};

// H0: b_u = b_w for two parents of the fitted node (two-sided normal test).
DifferenceTest weight_difference_test(const NodeFitResult& fit, const CovarianceResult& covariance,
                                      NodeId u, NodeId w);

struct ProbabilityInterval {
  double estimate = 0.0;
  double standard_error = 0.0;
  Interval interval;
};

// Gradient of g(theta) = [F(theta'a) - F(theta'b)] / [1 - F(theta'b)] where a, b
// indicate the active parents at t-1 and t-2.
Eigen::VectorXd activation_probability_gradient(const ThresholdSpec& spec, const Eigen::VectorXd& theta,
                                                const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Delta-method interval for P(v in D_t | history) under the fitted model,
// clipped to [0, 1]. A history without newly active parents of v gives 0
// with a zero-width interval.
ProbabilityInterval activation_probability_interval(const GltModel& fitted,
                                                    const CovarianceResult& covariance,
                                                    const Trace& history, NodeId v,
                                                    double level = 0.95);

}  // namespace glt
