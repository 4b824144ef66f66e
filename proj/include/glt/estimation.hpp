#pragma once

#include "glt/likelihood.hpp"
#include "glt/model.hpp"
#include "glt/thresholds.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace glt {

struct FitOptions {
  double epsilon = 1e-6;
  // Upper bound on |theta_v|_1. Unset: h_v - epsilon for finite h_v, else 10.
  std::optional<double> gamma;
  double gamma_infinite = 10.0;
  // Bound on the norm of the gradient projected onto the tangent cone.
  double tolerance = 1e-8;
  int max_iterations = 500;
};

double resolve_gamma(const ThresholdSpec& spec, const FitOptions& options);

enum class FitStatus { Converged, NotConverged, NotEstimated, Failed };
const char* to_string(FitStatus status) noexcept;

struct NodeFitResult {
  NodeId node = 0;
  std::vector<NodeId> parents;
  std::vector<double> weights;
  FitStatus status = FitStatus::NotEstimated;
  bool converged = false;
  double log_likelihood = 0.0;
  std::size_t n_obs = 0;
  std::size_t n_traces = 0;
  ThresholdSpec threshold;
  // Filled by grid search: log-likelihood of every grid point, in grid order.
  std::vector<std::pair<ThresholdSpec, double>> grid_log_likelihoods;
  double kkt_residual = 0.0;
  int iterations = 0;
  // Density not log-concave: the maximiser may be local only.
  bool local_only = false;
  double epsilon = 0.0;
  double gamma = 0.0;
  std::string message;

  Eigen::VectorXd theta() const {
    return Eigen::Map<const Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
  }
};

// Euclidean projection onto {theta >= epsilon, sum(theta) <= gamma}; the
// floating-point sum of the result never exceeds gamma.
Eigen::VectorXd project_onto_truncated_set(const Eigen::VectorXd& theta, double epsilon, double gamma);
// Norm of the gradient projected onto the tangent cone of the truncated set
// at theta (zero exactly at a KKT point of the maximisation).
double projected_gradient_norm(const Eigen::VectorXd& theta, const Eigen::VectorXd& gradient,
                               double epsilon, double gamma);

// Throws NoData when the node has no informative rows.
NodeFitResult fit_node(const NodeData& data, const ThresholdSpec& spec, const FitOptions& options = {});

// Maximum over grid points; ties go to the earliest grid point.
NodeFitResult fit_with_threshold_grid(const NodeData& data, std::span<const ThresholdSpec> grid,
                                      const FitOptions& options = {});

// One result per node (indexed by node id). Nodes without data are marked
// NotEstimated; per-node failures are recorded, never thrown.
std::vector<NodeFitResult> fit_all(std::span<const NodeData> data,
                                   std::span<const ThresholdSpec> specs,
                                   const FitOptions& options = {}, unsigned threads = 1);
std::vector<NodeFitResult> fit_all(std::span<const Trace> traces, const Graph& graph,
                                   std::span<const ThresholdSpec> specs,
                                   const FitOptions& options = {}, unsigned threads = 1);
std::vector<NodeFitResult> fit_all_with_grid(std::span<const NodeData> data,
                                             std::span<const ThresholdSpec> grid,
                                             const FitOptions& options = {}, unsigned threads = 1);

// Fit-safe beta specs for every (alpha, beta) pair, alpha-major.
std::vector<ThresholdSpec> beta_grid(std::span<const double> alphas, std::span<const double> betas);

// Model with fitted weights and thresholds; nodes that were not estimated
// get zero weights and `fallback` thresholds.
GltModel assemble_model(const Graph& graph, std::span<const NodeFitResult> fits,
                        const ThresholdSpec& fallback);

// Weighted cascade: 1/|P(v)| on every edge into v.
std::vector<double> baseline_wc(const Graph& graph);
// Ratio (#traces with u active strictly before v) / (#traces with u active),
// normalised to sum to one per child; all-zero rows fall back to 1/|P(v)|.
std::vector<double> baseline_ptp(std::span<const Trace> traces, const Graph& graph);

}  // namespace glt
