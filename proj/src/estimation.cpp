#include "glt/estimation.hpp"

#include "glt/error.hpp"
#include "glt/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>

namespace glt {

namespace {

double sequential_sum(const Eigen::VectorXd& x) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += x[i];
  return s;
}

bool at_lower(double value, double epsilon) { return value <= epsilon * (1.0 + 1e-12); }

bool sum_active(double sum, double gamma) { return sum >= gamma - 1e-12 * std::max(1.0, gamma); }

struct ConeProjection {
  Eigen::VectorXd direction;
  double multiplier = 0.0;  // on the sum constraint
};

// Projection of g onto {d : d_i >= 0 at lower bounds, sum(d) <= 0 if the sum
// constraint is active}: d_i = g_i - mu on free coordinates and
// max(g_i - mu, 0) at lower bounds, with mu >= 0 chosen so that sum(d) <= 0.
ConeProjection project_onto_cone(const Eigen::VectorXd& theta, const Eigen::VectorXd& g,
                                 double epsilon, double gamma) {
  const Eigen::Index m = theta.size();
  const auto direction = [&](double mu) {
    Eigen::VectorXd d(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      d[i] = at_lower(theta[i], epsilon) ? std::max(g[i] - mu, 0.0) : g[i] - mu;
    }
    return d;
  };
  ConeProjection out;
  out.direction = direction(0.0);
  if (!sum_active(sequential_sum(theta), gamma) || out.direction.sum() <= 0.0) return out;
  double lo = 0.0;
  double hi = std::max(0.0, g.maxCoeff());
  for (int it = 0; it < 200 && hi > lo; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (direction(mid).sum() > 0.0) lo = mid; else hi = mid;
  }
  out.multiplier = hi;
  out.direction = direction(hi);
  return out;
}

}  // namespace

double resolve_gamma(const ThresholdSpec& spec, const FitOptions& options) {
  const double h = spec.support_bound();
  double gamma = 0.0;
  if (options.gamma) {
    gamma = *options.gamma;
  } else {
    gamma = std::isfinite(h) ? h - options.epsilon : options.gamma_infinite;
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma) || (std::isfinite(h) && !(gamma < h))) {
    throw Error(ErrorKind::InvalidArgument, "gamma must be positive and below the support bound",
                {{"gamma", gamma}, {"h", h}});
  }
  return gamma;
}

const char* to_string(FitStatus status) noexcept {
  switch (status) {
    case FitStatus::Converged: return "converged";
    case FitStatus::NotConverged: return "not-converged";
    case FitStatus::NotEstimated: return "not-estimated";
    case FitStatus::Failed: return "failed";
  }
  return "unknown";
}

Eigen::VectorXd project_onto_truncated_set(const Eigen::VectorXd& theta, double epsilon,
                                           double gamma) {
  const Eigen::Index m = theta.size();
  const double radius = gamma - static_cast<double>(m) * epsilon;
  if (!(epsilon > 0.0) || !(radius > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "truncated set is empty: need epsilon > 0 and m * epsilon < gamma",
                {{"epsilon", epsilon}, {"gamma", gamma}, {"m", m}});
  }
  Eigen::VectorXd y = theta.array() - epsilon;
  Eigen::VectorXd phi = y.cwiseMax(0.0);
  if (phi.sum() > radius) {
    std::vector<double> u(y.data(), y.data() + m);
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumulative = 0.0;
    double tau = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      cumulative += u[j];
      const double candidate = (cumulative - radius) / static_cast<double>(j + 1);
      if (u[j] - candidate > 0.0) tau = candidate;
    }
    phi = (y.array() - tau).cwiseMax(0.0);
  }
  Eigen::VectorXd out = phi.array() + epsilon;
  for (Eigen::Index i = 0; i < m; ++i) out[i] = std::max(out[i], epsilon);
  // Remove floating-point overshoot of the sum constraint.
  for (int guard = 0; guard < 1000; ++guard) {
    const double s = sequential_sum(out);
    if (s <= gamma) break;
    Eigen::Index k = 0;
    out.maxCoeff(&k);
    const double reduced = std::max(epsilon, out[k] - (s - gamma));
    out[k] = reduced < out[k] ? reduced : std::nextafter(out[k], epsilon);
  }
  return out;
}

double projected_gradient_norm(const Eigen::VectorXd& theta, const Eigen::VectorXd& gradient,
                               double epsilon, double gamma) {
  return project_onto_cone(theta, gradient, epsilon, gamma).direction.norm();
}

namespace {

struct Point {
  Eigen::VectorXd theta;
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

class Solver {
 public:
  Solver(const NodeObjective& objective, double epsilon, double gamma, const FitOptions& options)
      : objective_(objective), epsilon_(epsilon), gamma_(gamma), options_(options) {}

  bool evaluate(Point& p) const {
    return objective_.evaluate(p.theta, p.value, &p.gradient, &p.hessian);
  }

  double residual(const Point& p) const {
    return projected_gradient_norm(p.theta, p.gradient, epsilon_, gamma_);
  }

  // Returns the final point, iteration count and whether the certificate holds.
  Point run(Eigen::VectorXd start, int& iterations, bool& converged) {
    Point current;
    current.theta = project_onto_truncated_set(start, epsilon_, gamma_);
    if (!evaluate(current)) {
      throw Error(ErrorKind::Numerical, "log-likelihood is not finite at the starting point");
    }
    double step_pg = 1.0 / std::max(1.0, current.hessian.cwiseAbs().maxCoeff());
    converged = false;
    iterations = 0;
    for (; iterations < options_.max_iterations; ++iterations) {
      const ConeProjection cone = project_onto_cone(current.theta, current.gradient, epsilon_, gamma_);
      const double r = cone.direction.norm();
      if (r <= options_.tolerance) {
        converged = true;
        break;
      }
      Point next;
      if (newton_step(current, cone, r, next) || gradient_step(current, step_pg, next)) {
        if (next.theta == current.theta) break;
        current = std::move(next);
      } else {
        break;
      }
    }
    converged = residual(current) <= options_.tolerance;
    return current;
  }

 private:
  bool accept_armijo(const Point& from, Point& candidate) const {
    if (!evaluate(candidate)) return false;
    const double predicted = from.gradient.dot(candidate.theta - from.theta);
    return candidate.value >= from.value + 1e-4 * predicted && candidate.value >= from.value;
  }

  bool newton_step(const Point& current, const ConeProjection& cone, double r, Point& next) const {
    const Eigen::Index m = current.theta.size();
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (!at_lower(current.theta[i], epsilon_) || current.gradient[i] - cone.multiplier > 0.0) {
        free.push_back(i);
      }
    }
    if (free.empty()) return false;
    const auto k = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd reduced(k, k);
    Eigen::VectorXd g(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      g[a] = current.gradient[free[a]];
      for (Eigen::Index b = 0; b < k; ++b) reduced(a, b) = -current.hessian(free[a], free[b]);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(reduced);
    const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    const double lowest = eig.eigenvalues().minCoeff();
    if (lowest < 1e-10 * scale) reduced += (std::abs(lowest) + 1e-8 * scale) * Eigen::MatrixXd::Identity(k, k);
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(reduced);
    Eigen::VectorXd d = ldlt.solve(g);
    const bool sum_binding =
        sum_active(sequential_sum(current.theta), gamma_) && cone.multiplier > 0.0;
    if (sum_binding) {
      const Eigen::VectorXd ones = Eigen::VectorXd::Ones(k);
      const Eigen::VectorXd m_ones = ldlt.solve(ones);
      const double nu = ones.dot(d) / ones.dot(m_ones);
      d -= nu * m_ones;
    }
    if (!d.allFinite()) return false;
    Eigen::VectorXd direction = Eigen::VectorXd::Zero(m);
    for (Eigen::Index a = 0; a < k; ++a) direction[free[a]] = d[a];

    double alpha = 1.0;
    for (int attempt = 0; attempt < 40; ++attempt, alpha *= 0.5) {
      next.theta = project_onto_truncated_set(current.theta + alpha * direction, epsilon_, gamma_);
      if (accept_armijo(current, next)) return true;
      // Near the optimum the decrease is below the rounding noise of the
      // objective; accept a full step that halves the certificate.
      if (attempt == 0 && std::isfinite(next.value) &&
          next.value >= current.value - 1e-11 * (1.0 + std::abs(current.value)) &&
          residual(next) < 0.5 * r) {
        return true;
      }
    }
    return false;
  }

  bool gradient_step(const Point& current, double& step, Point& next) const {
    double s = 4.0 * step;
    for (int attempt = 0; attempt < 80; ++attempt, s *= 0.5) {
      next.theta = project_onto_truncated_set(current.theta + s * current.gradient, epsilon_, gamma_);
      if (next.theta == current.theta) return false;
      if (accept_armijo(current, next) && next.value > current.value) {
        step = s;
        return true;
      }
    }
    return false;
  }

  const NodeObjective& objective_;
  double epsilon_;
  double gamma_;
  const FitOptions& options_;
};

}  // namespace

NodeFitResult fit_node(const NodeData& data, const ThresholdSpec& spec, const FitOptions& options) {
  if (!data.has_information()) {
    throw Error(ErrorKind::NoData, "node has no informative traces", {{"node", data.node}});
  }
  if (!(options.tolerance > 0.0) || options.max_iterations < 1) {
    throw Error(ErrorKind::InvalidArgument, "tolerance and iteration limit must be positive");
  }
  const double gamma = resolve_gamma(spec, options);
  const auto m = static_cast<double>(data.parents.size());
  if (!(options.epsilon > 0.0) || !(m * options.epsilon < gamma)) {
    throw Error(ErrorKind::InvalidArgument, "need epsilon > 0 and |P(v)| * epsilon < gamma",
                {{"node", data.node}, {"epsilon", options.epsilon}, {"gamma", gamma}});
  }
  const NodeObjective objective(data, spec);
  Solver solver(objective, options.epsilon, gamma, options);
  const Eigen::VectorXd start =
      Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m),
                                (gamma - m * options.epsilon) / (2.0 * m) + options.epsilon);
  NodeFitResult result;
  result.node = data.node;
  result.parents = data.parents;
  result.n_obs = data.n_obs();
  result.n_traces = data.informative_traces;
  result.threshold = spec;
  result.local_only = !spec.log_concave_density();
  result.epsilon = options.epsilon;
  result.gamma = gamma;
  bool converged = false;
  Point best = solver.run(start, result.iterations, converged);
  result.weights.assign(best.theta.data(), best.theta.data() + best.theta.size());
  result.log_likelihood = best.value;
  result.kkt_residual = solver.residual(best);
  result.converged = converged;
  result.status = converged ? FitStatus::Converged : FitStatus::NotConverged;
  if (!converged) result.message = "optimality tolerance not reached";
  if (result.local_only) {
    result.message += result.message.empty() ? "" : "; ";
    result.message += "threshold density is not log-concave: local optimum only";
  }
  return result;
}

NodeFitResult fit_with_threshold_grid(const NodeData& data, std::span<const ThresholdSpec> grid,
                                      const FitOptions& options) {
  if (grid.empty()) {
    throw Error(ErrorKind::InvalidArgument, "threshold grid is empty");
  }
  std::optional<NodeFitResult> best;
  std::vector<std::pair<ThresholdSpec, double>> scores;
  std::string last_failure;
  for (const ThresholdSpec& spec : grid) {
    try {
      NodeFitResult fit = fit_node(data, spec, options);
      scores.emplace_back(spec, fit.log_likelihood);
      if (!best || fit.log_likelihood > best->log_likelihood) best = std::move(fit);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::NoData) throw;
      scores.emplace_back(spec, -std::numeric_limits<double>::infinity());
      last_failure = e.what();
    }
  }
  if (!best) {
    throw Error(ErrorKind::Numerical, "every grid fit failed",
                {{"node", data.node}, {"last_error", last_failure}});
  }
  best->grid_log_likelihoods = std::move(scores);
  return *best;
}

namespace {

NodeFitResult not_estimated(const NodeData& data, FitStatus status, std::string message) {
  NodeFitResult r;
  r.node = data.node;
  r.parents = data.parents;
  r.n_obs = data.n_obs();
  r.n_traces = data.informative_traces;
  r.status = status;
  r.message = std::move(message);
  return r;
}

template <typename Fit>
std::vector<NodeFitResult> fit_each(std::span<const NodeData> data, unsigned threads, Fit&& fit) {
  std::vector<NodeFitResult> out(data.size());
  parallel_for(data.size(), threads, [&](std::size_t v) {
    if (!data[v].has_information()) {
      out[v] = not_estimated(data[v], FitStatus::NotEstimated, "no informative traces");
      return;
    }
    try {
      out[v] = fit(v);
    } catch (const Error& e) {
      out[v] = not_estimated(data[v], FitStatus::Failed, e.what());
    }
  });
  return out;
}

}  // namespace

std::vector<NodeFitResult> fit_all(std::span<const NodeData> data,
                                   std::span<const ThresholdSpec> specs,
                                   const FitOptions& options, unsigned threads) {
  if (specs.size() != data.size()) {
    throw Error(ErrorKind::InvalidArgument, "one threshold spec per node is required",
                {{"nodes", data.size()}, {"specs", specs.size()}});
  }
  return fit_each(data, threads, [&](std::size_t v) { return fit_node(data[v], specs[v], options); });
}

std::vector<NodeFitResult> fit_all(std::span<const Trace> traces, const Graph& graph,
                                   std::span<const ThresholdSpec> specs,
                                   const FitOptions& options, unsigned threads) {
  const auto data = build_all_node_data(traces, graph, threads);
  return fit_all(data, specs, options, threads);
}

std::vector<NodeFitResult> fit_all_with_grid(std::span<const NodeData> data,
                                             std::span<const ThresholdSpec> grid,
                                             const FitOptions& options, unsigned threads) {
  return fit_each(data, threads,
                  [&](std::size_t v) { return fit_with_threshold_grid(data[v], grid, options); });
}

std::vector<ThresholdSpec> beta_grid(std::span<const double> alphas, std::span<const double> betas) {
  std::vector<ThresholdSpec> out;
  for (double a : alphas) {
    for (double b : betas) out.push_back(ThresholdSpec::beta_fit_safe(a, b));
  }
  return out;
}

GltModel assemble_model(const Graph& graph, std::span<const NodeFitResult> fits,
                        const ThresholdSpec& fallback) {
  if (fits.size() != graph.node_count()) {
    throw Error(ErrorKind::InvalidArgument, "one fit result per node is required");
  }
  std::vector<double> weights(graph.edge_count(), 0.0);
  std::vector<ThresholdSpec> thresholds(graph.node_count(), fallback);
  for (std::size_t v = 0; v < fits.size(); ++v) {
    const NodeFitResult& fit = fits[v];
    if (fit.status != FitStatus::Converged && fit.status != FitStatus::NotConverged) continue;
    const auto node = static_cast<NodeId>(v);
    if (fit.weights.size() != graph.in_degree(node)) {
      throw Error(ErrorKind::InvalidArgument, "fit result does not match the graph", {{"node", node}});
    }
    std::copy(fit.weights.begin(), fit.weights.end(),
              weights.begin() + static_cast<std::ptrdiff_t>(graph.in_offset(node)));
    thresholds[v] = fit.threshold;
  }
  return GltModel(graph, std::move(weights), std::move(thresholds));
}

std::vector<double> baseline_wc(const Graph& graph) {
  std::vector<double> weights(graph.edge_count());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    weights[i] = 1.0 / static_cast<double>(graph.in_degree(graph.edges()[i].child));
  }
  return weights;
}

std::vector<double> baseline_ptp(std::span<const Trace> traces, const Graph& graph) {
  if (traces.empty()) {
    throw Error(ErrorKind::NoData, "PTP baseline requires traces");
  }
  std::vector<double> before(graph.edge_count(), 0.0);
  std::vector<double> active(graph.node_count(), 0.0);
  std::vector<int> time(graph.node_count());
  for (const Trace& trace : traces) {
    validate_trace(graph, trace);
    std::fill(time.begin(), time.end(), -1);
    for (std::size_t t = 0; t < trace.steps.size(); ++t) {
      for (NodeId v : trace.steps[t]) {
        time[static_cast<std::size_t>(v)] = static_cast<int>(t);
        active[static_cast<std::size_t>(v)] += 1.0;
      }
    }
    for (std::size_t i = 0; i < graph.edge_count(); ++i) {
      const Edge& e = graph.edges()[i];
      const int tu = time[static_cast<std::size_t>(e.parent)];
      const int tv = time[static_cast<std::size_t>(e.child)];
      if (tu >= 0 && tv >= 0 && tu < tv) before[i] += 1.0;
    }
  }
  std::vector<double> weights(graph.edge_count(), 0.0);
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    const auto node = static_cast<NodeId>(v);
    const std::size_t offset = graph.in_offset(node);
    const std::size_t m = graph.in_degree(node);
    if (m == 0) continue;
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double denom = active[static_cast<std::size_t>(graph.edges()[offset + j].parent)];
      weights[offset + j] = denom > 0.0 ? before[offset + j] / denom : 0.0;
      total += weights[offset + j];
    }
    for (std::size_t j = 0; j < m; ++j) {
      weights[offset + j] = total > 0.0 ? weights[offset + j] / total : 1.0 / static_cast<double>(m);
    }
  }
  return weights;
}

}  // namespace glt
