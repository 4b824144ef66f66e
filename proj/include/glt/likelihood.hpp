#pragma once

#include "glt/graph.hpp"
#include "glt/model.hpp"
#include "glt/thresholds.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace glt {

// Exposed rows record an intermediate exposure of v that did not lead to
// activation. Their survival factors telescope into the last row of the
// trace, so they contribute nothing to the likelihood but are counted in N_v.
enum class RowOutcome : std::uint8_t { Exposed, Activated, NotActivated };

// One time point at which v gained at least one newly active parent.
// z_prev / z_curr are parent indicators of A_{t-1} and A_t.
struct ObservationRow {
  std::vector<std::uint8_t> z_prev;
  std::vector<std::uint8_t> z_curr;
  RowOutcome outcome = RowOutcome::Exposed;
  std::size_t trace_index = 0;
};

struct NodeData {
  NodeId node = 0;
  std::vector<NodeId> parents;
  std::vector<ObservationRow> rows;
  std::size_t informative_traces = 0;

  std::size_t n_obs() const noexcept { return rows.size(); }
  bool has_information() const noexcept { return !rows.empty(); }
};

// Partial observation: active parents A_v of node v and whether v activated.
struct PseudoTrace {
  NodeId node = 0;
  NodeSet active_parents;
  bool activated = false;
};

NodeData build_node_data(std::span<const Trace> traces, const Graph& graph, NodeId v);
// NodeData for every node, indexed by node id. Traces are validated once.
std::vector<NodeData> build_all_node_data(std::span<const Trace> traces, const Graph& graph,
                                          unsigned threads = 1);
// Uses the pseudo-traces whose node is v; rows are (0, 1(A_v), y).
NodeData build_pseudo_node_data(std::span<const PseudoTrace> pseudo, const Graph& graph, NodeId v);
std::vector<NodeData> build_all_pseudo_node_data(std::span<const PseudoTrace> pseudo,
                                                 const Graph& graph);

// Node log-likelihood
//   sum_activated log[F(theta'z_curr) - F(theta'z_prev)] + sum_terminal log[1 - F(theta'z_curr)]
// over rows compressed into distinct patterns with multiplicities.
class NodeObjective {
 public:
  NodeObjective(const NodeData& data, ThresholdSpec spec);

  std::size_t dimension() const noexcept { return dimension_; }
  const ThresholdSpec& spec() const noexcept { return spec_; }
  std::size_t pattern_count() const noexcept { return patterns_.size(); }

  // -infinity when some factor is not positive (or below the family's
  // reliability floor).
  double value(const Eigen::VectorXd& theta) const;
  // Returns false (leaving outputs unspecified) when the value is -infinity.
  bool evaluate(const Eigen::VectorXd& theta, double& value, Eigen::VectorXd* gradient,
                Eigen::MatrixXd* hessian) const;

 private:
  struct Pattern {
    Eigen::VectorXd prev;
    Eigen::VectorXd curr;
    bool prev_zero = true;
    bool activated = false;
    double count = 0.0;
  };

  std::size_t dimension_ = 0;
  ThresholdSpec spec_;
  std::vector<Pattern> patterns_;
};

// Throw ZeroProbability when a factor is not positive.
double node_log_likelihood(const NodeData& data, const Eigen::VectorXd& theta,
                           const ThresholdSpec& spec);
Eigen::VectorXd node_gradient(const NodeData& data, const Eigen::VectorXd& theta,
                              const ThresholdSpec& spec);
Eigen::MatrixXd node_hessian(const NodeData& data, const Eigen::VectorXd& theta,
                             const ThresholdSpec& spec);

}  // namespace glt
