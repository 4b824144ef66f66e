#include "glt/likelihood.hpp"

#include "glt/error.hpp"
#include "glt/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

namespace glt {

namespace {

std::vector<int> activation_times(const Graph& graph, const Trace& trace) {
  std::vector<int> time(graph.node_count(), -1);
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    for (NodeId v : trace.steps[t]) time[static_cast<std::size_t>(v)] = static_cast<int>(t);
  }
  return time;
}

// Rows contributed by one trace: one per distinct exposure time up to the
// step before v activates (or up to the end of the trace).
void append_rows(NodeData& data, std::span<const NodeId> parents, const std::vector<int>& time,
                 std::size_t trace_index) {
  const int tv = time[static_cast<std::size_t>(data.node)];
  if (tv == 0) return;
  const std::size_t m = parents.size();
  std::vector<int> parent_time(m, -1);
  std::vector<int> exposures;
  for (std::size_t i = 0; i < m; ++i) {
    const int tp = time[static_cast<std::size_t>(parents[i])];
    if (tp >= 0 && (tv < 0 || tp < tv)) {
      parent_time[i] = tp;
      exposures.push_back(tp);
    }
  }
  if (exposures.empty()) return;
  std::sort(exposures.begin(), exposures.end());
  exposures.erase(std::unique(exposures.begin(), exposures.end()), exposures.end());
  std::vector<std::uint8_t> prev(m, 0);
  for (std::size_t j = 0; j < exposures.size(); ++j) {
    ObservationRow row;
    row.z_prev = prev;
    row.z_curr.assign(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
      row.z_curr[i] = parent_time[i] >= 0 && parent_time[i] <= exposures[j] ? 1 : 0;
    }
    row.trace_index = trace_index;
    if (j + 1 == exposures.size()) {
      row.outcome = tv >= 0 ? RowOutcome::Activated : RowOutcome::NotActivated;
    }
    prev = row.z_curr;
    data.rows.push_back(std::move(row));
  }
  ++data.informative_traces;
}

NodeData empty_node_data(const Graph& graph, NodeId v) {
  if (!graph.is_valid_node(v)) {
    throw Error(ErrorKind::InvalidArgument, "node out of range", {{"node", v}});
  }
  NodeData data;
  data.node = v;
  const auto parents = graph.parent_list(v);
  data.parents.assign(parents.begin(), parents.end());
  return data;
}

}  // namespace

NodeData build_node_data(std::span<const Trace> traces, const Graph& graph, NodeId v) {
  NodeData data = empty_node_data(graph, v);
  for (std::size_t n = 0; n < traces.size(); ++n) {
    validate_trace(graph, traces[n]);
    append_rows(data, data.parents, activation_times(graph, traces[n]), n);
  }
  return data;
}

std::vector<NodeData> build_all_node_data(std::span<const Trace> traces, const Graph& graph,
                                          unsigned threads) {
  std::vector<std::vector<int>> times(traces.size());
  for (std::size_t n = 0; n < traces.size(); ++n) {
    try {
      validate_trace(graph, traces[n]);
    } catch (const Error& e) {
      auto details = e.details();
      details["trace"] = n;
      throw Error(e.kind(), e.what(), details);
    }
    times[n] = activation_times(graph, traces[n]);
  }
  std::vector<NodeData> out(graph.node_count());
  parallel_for(graph.node_count(), threads, [&](std::size_t v) {
    NodeData data = empty_node_data(graph, static_cast<NodeId>(v));
    for (std::size_t n = 0; n < traces.size(); ++n) append_rows(data, data.parents, times[n], n);
    out[v] = std::move(data);
  });
  return out;
}

NodeData build_pseudo_node_data(std::span<const PseudoTrace> pseudo, const Graph& graph, NodeId v) {
  NodeData data = empty_node_data(graph, v);
  const std::size_t m = data.parents.size();
  for (std::size_t n = 0; n < pseudo.size(); ++n) {
    const PseudoTrace& p = pseudo[n];
    if (p.node != v) continue;
    if (p.active_parents.empty()) {
      throw Error(ErrorKind::InvalidArgument, "pseudo-trace with an empty active-parent set",
                  {{"record", n}, {"node", v}});
    }
    ObservationRow row;
    row.z_prev.assign(m, 0);
    row.z_curr.assign(m, 0);
    for (NodeId u : p.active_parents) {
      const auto it = std::lower_bound(data.parents.begin(), data.parents.end(), u);
      if (it == data.parents.end() || *it != u) {
        throw Error(ErrorKind::InvalidArgument, "pseudo-trace names a node that is not a parent",
                    {{"record", n}, {"node", v}, {"parent", u}});
      }
      row.z_curr[static_cast<std::size_t>(it - data.parents.begin())] = 1;
    }
    row.outcome = p.activated ? RowOutcome::Activated : RowOutcome::NotActivated;
    row.trace_index = n;
    data.rows.push_back(std::move(row));
    ++data.informative_traces;
  }
  return data;
}

std::vector<NodeData> build_all_pseudo_node_data(std::span<const PseudoTrace> pseudo,
                                                 const Graph& graph) {
  for (std::size_t n = 0; n < pseudo.size(); ++n) {
    if (!graph.is_valid_node(pseudo[n].node)) {
      throw Error(ErrorKind::InvalidArgument, "pseudo-trace node out of range",
                  {{"record", n}, {"node", pseudo[n].node}});
    }
  }
  std::vector<NodeData> out;
  out.reserve(graph.node_count());
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    out.push_back(build_pseudo_node_data(pseudo, graph, static_cast<NodeId>(v)));
  }
  return out;
}

NodeObjective::NodeObjective(const NodeData& data, ThresholdSpec spec)
    : dimension_(data.parents.size()), spec_(spec) {
  using Key = std::tuple<bool, std::vector<std::uint8_t>, std::vector<std::uint8_t>>;
  std::map<Key, double> counts;
  for (const auto& row : data.rows) {
    if (row.outcome == RowOutcome::Exposed) continue;
    const bool activated = row.outcome == RowOutcome::Activated;
    std::vector<std::uint8_t> prev = activated ? row.z_prev : std::vector<std::uint8_t>(dimension_, 0);
    counts[Key{activated, std::move(prev), row.z_curr}] += 1.0;
  }
  for (const auto& [key, count] : counts) {
    const auto& [activated, prev, curr] = key;
    Pattern p;
    p.activated = activated;
    p.count = count;
    p.prev = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension_));
    p.curr = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension_));
    for (std::size_t i = 0; i < dimension_; ++i) {
      p.prev[static_cast<Eigen::Index>(i)] = prev[i];
      p.curr[static_cast<Eigen::Index>(i)] = curr[i];
    }
    p.prev_zero = std::none_of(prev.begin(), prev.end(), [](std::uint8_t b) { return b != 0; });
    patterns_.push_back(std::move(p));
  }
}

double NodeObjective::value(const Eigen::VectorXd& theta) const {
  double v = 0.0;
  if (!evaluate(theta, v, nullptr, nullptr)) return -std::numeric_limits<double>::infinity();
  return v;
}

bool NodeObjective::evaluate(const Eigen::VectorXd& theta, double& value,
                             Eigen::VectorXd* gradient, Eigen::MatrixXd* hessian) const {
  const auto m = static_cast<Eigen::Index>(dimension_);
  if (theta.size() != m) {
    throw Error(ErrorKind::InvalidArgument, "parameter dimension mismatch",
                {{"expected", dimension_}, {"got", theta.size()}});
  }
  if ((theta.array() < 0.0).any() || !theta.allFinite()) return false;
  if (gradient) gradient->setZero(m);
  if (hessian) hessian->setZero(m, m);
  const double floor = spec_.min_reliable_difference();
  double total = 0.0;
  Eigen::VectorXd g(m);
  for (const Pattern& p : patterns_) {
    const double x = theta.dot(p.curr);
    if (p.activated) {
      const double y = p.prev_zero ? 0.0 : theta.dot(p.prev);
      const double d = spec_.cdf_difference(x, y);
      if (!(d > floor) || !(d > 0.0)) return false;
      total += p.count * std::log(d);
      if (!gradient && !hessian) continue;
      const double fx = spec_.density(x);
      g = (fx / d) * p.curr;
      if (!p.prev_zero) g -= (spec_.density(y) / d) * p.prev;
      if (gradient) *gradient += p.count * g;
      if (hessian) {
        hessian->noalias() += (p.count * spec_.density_derivative(x) / d) * p.curr * p.curr.transpose();
        if (!p.prev_zero) {
          hessian->noalias() -= (p.count * spec_.density_derivative(y) / d) * p.prev * p.prev.transpose();
        }
        hessian->noalias() -= p.count * g * g.transpose();
      }
    } else {
      const double s = spec_.sf(x);
      if (!(s > floor) || !(s > 0.0)) return false;
      total += p.count * std::log(s);
      if (!gradient && !hessian) continue;
      g = (-spec_.density(x) / s) * p.curr;
      if (gradient) *gradient += p.count * g;
      if (hessian) {
        hessian->noalias() -= (p.count * spec_.density_derivative(x) / s) * p.curr * p.curr.transpose();
        hessian->noalias() -= p.count * g * g.transpose();
      }
    }
  }
  if (!std::isfinite(total)) return false;
  value = total;
  return true;
}

namespace {

void require_valid(bool ok, const NodeData& data) {
  if (!ok) {
    throw Error(ErrorKind::ZeroProbability,
                "likelihood factor is not positive at the given parameters",
                {{"node", data.node}});
  }
}

}  // namespace

double node_log_likelihood(const NodeData& data, const Eigen::VectorXd& theta,
                           const ThresholdSpec& spec) {
  double value = 0.0;
  require_valid(NodeObjective(data, spec).evaluate(theta, value, nullptr, nullptr), data);
  return value;
}

Eigen::VectorXd node_gradient(const NodeData& data, const Eigen::VectorXd& theta,
                              const ThresholdSpec& spec) {
  double value = 0.0;
  Eigen::VectorXd g;
  require_valid(NodeObjective(data, spec).evaluate(theta, value, &g, nullptr), data);
  return g;
}

Eigen::MatrixXd node_hessian(const NodeData& data, const Eigen::VectorXd& theta,
                             const ThresholdSpec& spec) {
  double value = 0.0;
  Eigen::MatrixXd h;
  require_valid(NodeObjective(data, spec).evaluate(theta, value, nullptr, &h), data);
  return h;
}

}  // namespace glt
