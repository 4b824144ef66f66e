#include "glt/inference.hpp"

#include "glt/error.hpp"
#include "glt/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace glt {

CovarianceResult node_covariance(const NodeData& data, const Eigen::VectorXd& theta,
                                 const ThresholdSpec& spec) {
  CovarianceResult out;
  out.node = data.node;
  const auto m = static_cast<Eigen::Index>(data.parents.size());
  double value = 0.0;
  Eigen::MatrixXd hessian;
  if (m == 0 || !NodeObjective(data, spec).evaluate(theta, value, nullptr, &hessian)) {
    out.covariance = Eigen::MatrixXd::Zero(m, m);
    out.message = m == 0 ? "node has no parents" : "log-likelihood is not finite at the estimate";
    return out;
  }
  const Eigen::MatrixXd information = -0.5 * (hessian + hessian.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(information);
  out.min_eigenvalue = eig.eigenvalues().minCoeff();
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (!(out.min_eigenvalue > 1e-12 * scale)) {
    out.covariance = Eigen::MatrixXd::Zero(m, m);
    out.message = "observed information is not positive definite";
    return out;
  }
  const Eigen::VectorXd inverse = eig.eigenvalues().cwiseInverse();
  out.covariance = eig.eigenvectors() * inverse.asDiagonal() * eig.eigenvectors().transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  out.valid = true;
  return out;
}

CovarianceResult node_covariance(const NodeData& data, const NodeFitResult& fit) {
  if (fit.status != FitStatus::Converged && fit.status != FitStatus::NotConverged) {
    CovarianceResult out;
    out.node = fit.node;
    out.message = "node was not estimated";
    return out;
  }
  return node_covariance(data, fit.theta(), fit.threshold);
}

bool on_boundary(const NodeFitResult& fit, double relative_tolerance) {
  if (fit.weights.empty()) return false;
  const double slack = relative_tolerance * std::max(1.0, fit.gamma);
  for (double w : fit.weights) {
    if (w <= fit.epsilon + slack) return true;
  }
  return std::accumulate(fit.weights.begin(), fit.weights.end(), 0.0) >= fit.gamma - slack;
}

std::vector<double> standard_errors(const CovarianceResult& covariance) {
  std::vector<double> out(static_cast<std::size_t>(covariance.covariance.rows()));
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out[i] = std::sqrt(std::max(0.0, covariance.covariance(k, k)));
  }
  return out;
}

namespace {

double two_sided_quantile(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "confidence level must lie in (0, 1)", {{"level", level}});
  }
  return normal_quantile(0.5 * (1.0 + level));
}

void require_valid(const CovarianceResult& covariance) {
  if (!covariance.valid) {
    throw Error(ErrorKind::InvalidArgument, "covariance is not valid",
                {{"node", covariance.node}, {"reason", covariance.message}});
  }
}

}  // namespace

std::vector<Interval> weight_intervals(const NodeFitResult& fit, const CovarianceResult& covariance,
                                       double level) {
  require_valid(covariance);
  if (static_cast<std::size_t>(covariance.covariance.rows()) != fit.weights.size()) {
    throw Error(ErrorKind::InvalidArgument, "covariance does not match the fit", {{"node", fit.node}});
  }
  const double z = two_sided_quantile(level);
  const double h = fit.threshold.support_bound();
  const auto se = standard_errors(covariance);
  std::vector<Interval> out;
  for (std::size_t i = 0; i < se.size(); ++i) {
    Interval iv;
    iv.level = level;
    iv.lower = std::max(0.0, fit.weights[i] - z * se[i]);
    iv.upper = std::min(h, fit.weights[i] + z * se[i]);
    out.push_back(iv);
  }
  return out;
}

DifferenceTest weight_difference_test(const NodeFitResult& fit, const CovarianceResult& covariance,
                                      NodeId u, NodeId w) {
  require_valid(covariance);
  const auto index = [&](NodeId p) {
    const auto it = std::find(fit.parents.begin(), fit.parents.end(), p);
    if (it == fit.parents.end()) {
      throw Error(ErrorKind::InvalidArgument, "node is not a parent of the fitted node",
                  {{"node", fit.node}, {"parent", p}});
    }
    return static_cast<Eigen::Index>(it - fit.parents.begin());
  };
  const Eigen::Index i = index(u);
  const Eigen::Index j = index(w);
  const auto& s = covariance.covariance;
  const double variance = s(i, i) + s(j, j) - 2.0 * s(i, j);
  if (!(variance > 0.0)) {
    throw Error(ErrorKind::Numerical, "variance of the weight difference is not positive",
                {{"node", fit.node}, {"variance", variance}});
  }
  DifferenceTest out;
  out.z = (fit.weights[static_cast<std::size_t>(i)] - fit.weights[static_cast<std::size_t>(j)]) /
          std::sqrt(variance);
  out.p_value = std::erfc(std::abs(out.z) / std::numbers::sqrt2);
  return out;
}

Eigen::VectorXd activation_probability_gradient(const ThresholdSpec& spec, const Eigen::VectorXd& theta,
                                                const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double x = theta.dot(a);
  const double y = theta.dot(b);
  const double sy = spec.sf(y);
  if (!(sy > 0.0)) {
    throw Error(ErrorKind::ZeroProbability, "history has zero probability");
  }
  const double fx = spec.density(x);
  const double sx = spec.sf(x);
  Eigen::VectorXd grad = (fx * sy) * a;
  if ((b.array() != 0.0).any()) grad -= (spec.density(y) * sx) * b;
  return grad / (sy * sy);
}

ProbabilityInterval activation_probability_interval(const GltModel& fitted,
                                                    const CovarianceResult& covariance,
                                                    const Trace& history, NodeId v, double level) {
  const double z = two_sided_quantile(level);
  const ActivationHistory h(fitted.graph(), history);
  if (h.activation_time(v) >= 0) {
    throw Error(ErrorKind::InvalidArgument, "node is already active", {{"node", v}});
  }
  const int t = static_cast<int>(h.steps());
  const auto parents = fitted.graph().parent_list(v);
  const auto m = static_cast<Eigen::Index>(parents.size());
  Eigen::VectorXd a = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  bool exposed = false;
  for (Eigen::Index i = 0; i < m; ++i) {
    const NodeId u = parents[static_cast<std::size_t>(i)];
    if (h.active_by(u, t - 1)) a[i] = 1.0;
    if (h.active_by(u, t - 2)) b[i] = 1.0;
    exposed = exposed || h.activation_time(u) == t - 1;
  }
  ProbabilityInterval out;
  out.interval.level = level;
  if (!exposed) return out;
  require_valid(covariance);
  if (covariance.node != v || covariance.covariance.rows() != m) {
    throw Error(ErrorKind::InvalidArgument, "covariance does not belong to this node", {{"node", v}});
  }
  const auto w = fitted.parent_weights(v);
  const Eigen::VectorXd theta = Eigen::Map<const Eigen::VectorXd>(w.data(), m);
  out.estimate = transition_probability(fitted, history, v);
  const Eigen::VectorXd grad = activation_probability_gradient(fitted.threshold(v), theta, a, b);
  out.standard_error = std::sqrt(std::max(0.0, grad.dot(covariance.covariance * grad)));
  out.interval.lower = std::clamp(out.estimate - z * out.standard_error, 0.0, 1.0);
  out.interval.upper = std::clamp(out.estimate + z * out.standard_error, 0.0, 1.0);
  return out;
}

}  // namespace glt
