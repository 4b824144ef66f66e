#pragma once

#include "glt/graph.hpp"
#include "glt/node_set.hpp"
#include "glt/rng.hpp"
#include "glt/thresholds.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace glt {

// Graph + nonnegative per-edge weights (canonical edge order) + per-node
// threshold distributions. For every node v, |theta_v|_1 <= h_v.
class GltModel {
 public:
  GltModel(Graph graph, std::vector<double> weights, std::vector<ThresholdSpec> thresholds);

  const Graph& graph() const noexcept { return graph_; }
  std::span<const double> weights() const noexcept { return weights_; }
  const std::vector<ThresholdSpec>& thresholds() const noexcept { return thresholds_; }
  const ThresholdSpec& threshold(NodeId v) const { return thresholds_.at(static_cast<std::size_t>(v)); }
  std::span<const double> parent_weights(NodeId v) const;

  // theta_v >= epsilon and |theta_v|_1 <= gamma_v for every node with parents,
  // where gamma_v = h_v - epsilon for finite h_v and `gamma_infinite` otherwise.
  bool in_truncated_space(double epsilon, double gamma_infinite = 10.0) const;

 private:
  Graph graph_;
  std::vector<double> weights_;
  std::vector<ThresholdSpec> thresholds_;
};

// IC edge probabilities p in [0, 1) -> exponential thresholds, b = -log(1 - p).
GltModel from_ic(const Graph& graph, std::span<const double> edge_probabilities);
// LT weights (|theta_v|_1 <= 1) -> uniform thresholds.
GltModel from_lt(const Graph& graph, std::span<const double> weights);

// Propagation trace (D_0, ..., D_T) of newly activated node sets.
struct Trace {
  std::vector<NodeSet> steps;

  std::size_t length() const noexcept { return steps.size(); }
  NodeSet active_set() const;

  friend bool operator==(const Trace&, const Trace&) = default;
};

// Throws InfeasibleTrace (with step and node) unless the trace satisfies:
// nonempty D_0, pairwise disjoint steps, and every v in D_t (t >= 1) has a
// parent in D_{t-1}. Empty trailing steps are rejected as well.
void validate_trace(const Graph& graph, const Trace& trace);

// Prefix (D_0, ..., D_{t-1}) with cumulative sets A_s and the influence
// accessor B_v(A_s) = sum of b_{u,v} over active parents u.
class ActivationHistory {
 public:
  ActivationHistory(const Graph& graph, const Trace& prefix);

  std::size_t steps() const noexcept { return steps_; }
  // Time step at which v became active, or -1.
  int activation_time(NodeId v) const { return time_.at(static_cast<std::size_t>(v)); }
  bool active_by(NodeId v, int s) const;
  NodeSet cumulative(int s) const;  // A_s, with A_{-1} = {}
  double influence(const GltModel& model, NodeId v, int s) const;

 private:
  std::size_t steps_ = 0;
  std::vector<int> time_;
};

// P(v in D_t | D_0..D_{t-1}) for the history prefix of length t.
// Zero when v has no parent in D_{t-1}.
double transition_probability(const GltModel& model, const Trace& history, NodeId v);

// Draws one uniform per node per trace (threshold persistence) and activates
// v once F_v(B_v(A_{t-1})) reaches it.
Trace simulate_trace(const GltModel& model, const NodeSet& seeds, Rng& rng);
// Trace i draws its seed set and thresholds from derive(root_seed, {i}), so
// the batch does not depend on the thread count.
std::vector<Trace> simulate_traces(const GltModel& model, const SeedDistribution& seeds, std::size_t count,
                                   std::uint64_t root_seed, unsigned threads = 1);
// Cross-check simulator applying the conditional kernel step by step with
// fresh randomness.
Trace simulate_trace_sequential(const GltModel& model, const NodeSet& seeds, Rng& rng);

// Reusable buffers for the allocation-free spread simulation.
struct SimulationWorkspace {
  std::vector<double> influence;
  std::vector<char> active;
  std::vector<char> queued;
  std::vector<NodeId> frontier;
  std::vector<NodeId> next;
  std::vector<NodeId> touched;
};

// |A(D)| for the trace determined by per-node uniforms u_v.
std::size_t simulate_final_size(const GltModel& model, const NodeSet& seeds,
                                std::span<const double> uniforms, SimulationWorkspace& ws);

// log P(D) for a feasible trace; the parameter-free seed term is supplied by
// the caller. Throws ZeroProbability naming the offending node and time.
double trace_log_probability(const GltModel& model, const Trace& trace,
                             double seed_log_prob = 0.0);

// All feasible traces starting at `seeds`. Throws CapExceeded once more than
// `state_cap` partial traces have been generated.
std::vector<Trace> enumerate_feasible_traces(const Graph& graph, const NodeSet& seeds,
                                             std::size_t state_cap = 1'000'000);

// Expected |A(D)| given D_0 = seeds, summed exactly over feasible traces
// (memoised on the (A_{t-1}, A_t) state). At most 64 nodes.
double exact_spread(const GltModel& model, const NodeSet& seeds,
                    std::size_t state_cap = 1'000'000);

}  // namespace glt
