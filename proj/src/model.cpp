#include "glt/model.hpp"

#include "glt/error.hpp"
#include "glt/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <unordered_map>

namespace glt {

GltModel::GltModel(Graph graph, std::vector<double> weights,
                   std::vector<ThresholdSpec> thresholds)
    : graph_(std::move(graph)), weights_(std::move(weights)), thresholds_(std::move(thresholds)) {
  if (weights_.size() != graph_.edge_count()) {
    throw Error(ErrorKind::InvalidArgument, "weight vector does not match edge count",
                {{"weights", weights_.size()}, {"edges", graph_.edge_count()}});
  }
  if (thresholds_.size() != graph_.node_count()) {
    throw Error(ErrorKind::InvalidArgument, "threshold list does not match node count",
                {{"thresholds", thresholds_.size()}, {"n", graph_.node_count()}});
  }
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i])) {
      throw Error(ErrorKind::InvalidArgument, "edge weights must be finite and nonnegative",
                  {{"edge", i}, {"weight", weights_[i]}});
    }
  }
  for (std::size_t v = 0; v < graph_.node_count(); ++v) {
    const auto node = static_cast<NodeId>(v);
    double total = 0.0;
    for (double w : parent_weights(node)) total += w;
    const double h = thresholds_[v].support_bound();
    if (total > h * (1.0 + 1e-12)) {
      throw Error(ErrorKind::InvalidArgument, "parent weights exceed the threshold support bound",
                  {{"node", node}, {"sum", total}, {"h", h}});
    }
  }
}

std::span<const double> GltModel::parent_weights(NodeId v) const {
  return std::span<const double>(weights_).subspan(graph_.in_offset(v), graph_.in_degree(v));
}

bool GltModel::in_truncated_space(double epsilon, double gamma_infinite) const {
  for (std::size_t v = 0; v < graph_.node_count(); ++v) {
    const auto node = static_cast<NodeId>(v);
    auto block = parent_weights(node);
    if (block.empty()) continue;
    const double h = thresholds_[v].support_bound();
    const double gamma = std::isfinite(h) ? h - epsilon : gamma_infinite;
    double total = 0.0;
    for (double w : block) {
      if (w < epsilon) return false;
      total += w;
    }
    if (total > gamma) return false;
  }
  return true;
}

GltModel from_ic(const Graph& graph, std::span<const double> edge_probabilities) {
  if (edge_probabilities.size() != graph.edge_count()) {
    throw Error(ErrorKind::InvalidArgument, "probability vector does not match edge count");
  }
  std::vector<double> weights(graph.edge_count());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double p = edge_probabilities[i];
    if (!(p >= 0.0 && p < 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "IC probabilities must lie in [0, 1)",
                  {{"edge", i}, {"p", p}});
    }
    weights[i] = -std::log1p(-p);
  }
  return GltModel(graph, std::move(weights),
                  std::vector<ThresholdSpec>(graph.node_count(), ThresholdSpec::exponential_unit()));
}

GltModel from_lt(const Graph& graph, std::span<const double> weights) {
  if (weights.size() != graph.edge_count()) {
    throw Error(ErrorKind::InvalidArgument, "weight vector does not match edge count");
  }
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    const auto node = static_cast<NodeId>(v);
    double total = 0.0;
    for (std::size_t i = 0; i < graph.in_degree(node); ++i) total += weights[graph.in_offset(node) + i];
    if (total > 1.0 + 1e-12) {
      throw Error(ErrorKind::InvalidArgument, "LT in-degree constraint violated",
                  {{"node", node}, {"sum", total}});
    }
  }
  return GltModel(graph, std::vector<double>(weights.begin(), weights.end()),
                  std::vector<ThresholdSpec>(graph.node_count(), ThresholdSpec::uniform()));
}

NodeSet Trace::active_set() const {
  NodeSet out;
  for (const auto& d : steps) out = out.united(d);
  return out;
}

void validate_trace(const Graph& graph, const Trace& trace) {
  if (trace.steps.empty() || trace.steps.front().empty()) {
    throw Error(ErrorKind::InfeasibleTrace, "trace must start with a nonempty seed set",
                {{"step", 0}});
  }
  std::vector<int> time(graph.node_count(), -1);
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    const NodeSet& d = trace.steps[t];
    if (d.empty()) {
      throw Error(ErrorKind::InfeasibleTrace, "trace contains an empty step", {{"step", t}});
    }
    for (NodeId v : d) {
      if (!graph.is_valid_node(v)) {
        throw Error(ErrorKind::InfeasibleTrace, "trace references an unknown node",
                    {{"step", t}, {"node", v}});
      }
      if (time[static_cast<std::size_t>(v)] >= 0) {
        throw Error(ErrorKind::InfeasibleTrace, "node activated twice",
                    {{"step", t}, {"node", v}});
      }
    }
    if (t > 0) {
      for (NodeId v : d) {
        const auto parents = graph.parent_list(v);
        const bool has_new_parent = std::any_of(parents.begin(), parents.end(), [&](NodeId u) {
          return time[static_cast<std::size_t>(u)] == static_cast<int>(t) - 1;
        });
        if (!has_new_parent) {
          throw Error(ErrorKind::InfeasibleTrace,
                      "activated node has no parent activated at the previous step",
                      {{"step", t}, {"node", v}});
        }
      }
    }
    for (NodeId v : d) time[static_cast<std::size_t>(v)] = static_cast<int>(t);
  }
}

ActivationHistory::ActivationHistory(const Graph& graph, const Trace& prefix)
    : steps_(prefix.steps.size()), time_(graph.node_count(), -1) {
  validate_trace(graph, prefix);
  for (std::size_t t = 0; t < prefix.steps.size(); ++t) {
    for (NodeId v : prefix.steps[t]) time_[static_cast<std::size_t>(v)] = static_cast<int>(t);
  }
}

bool ActivationHistory::active_by(NodeId v, int s) const {
  const int t = time_.at(static_cast<std::size_t>(v));
  return t >= 0 && t <= s;
}

NodeSet ActivationHistory::cumulative(int s) const {
  std::vector<NodeId> out;
  for (std::size_t v = 0; v < time_.size(); ++v) {
    if (time_[v] >= 0 && time_[v] <= s) out.push_back(static_cast<NodeId>(v));
  }
  return NodeSet(std::move(out));
}

double ActivationHistory::influence(const GltModel& model, NodeId v, int s) const {
  const auto parents = model.graph().parent_list(v);
  const auto w = model.parent_weights(v);
  double total = 0.0;
  for (std::size_t i = 0; i < parents.size(); ++i) {
    if (active_by(parents[i], s)) total += w[i];
  }
  return total;
}

double transition_probability(const GltModel& model, const Trace& history, NodeId v) {
  const ActivationHistory h(model.graph(), history);
  const int t = static_cast<int>(h.steps());
  if (h.activation_time(v) >= 0) {
    throw Error(ErrorKind::InvalidArgument, "node is already active",
                {{"node", v}, {"time", h.activation_time(v)}});
  }
  const auto parents = model.graph().parent_list(v);
  const bool exposed = std::any_of(parents.begin(), parents.end(),
                                   [&](NodeId u) { return h.activation_time(u) == t - 1; });
  if (!exposed) return 0.0;
  const ThresholdSpec& spec = model.threshold(v);
  const double current = h.influence(model, v, t - 1);
  const double previous = h.influence(model, v, t - 2);
  const double remaining = spec.sf(previous);
  if (!(remaining > 0.0)) {
    throw Error(ErrorKind::ZeroProbability, "history has zero probability at node",
                {{"node", v}, {"time", t - 1}});
  }
  return std::clamp(spec.cdf_difference(current, previous) / remaining, 0.0, 1.0);
}

namespace {

void prepare(SimulationWorkspace& ws, std::size_t n) {
  ws.influence.assign(n, 0.0);
  ws.active.assign(n, 0);
  ws.queued.assign(n, 0);
  ws.frontier.clear();
  ws.next.clear();
  ws.touched.clear();
}

// Threshold-persistent propagation. `on_step` receives each newly activated
// set after D_0.
template <typename OnStep>
std::size_t propagate(const GltModel& model, const NodeSet& seeds,
                      std::span<const double> uniforms, SimulationWorkspace& ws, OnStep&& on_step) {
  const Graph& g = model.graph();
  const auto weights = model.weights();
  prepare(ws, g.node_count());
  std::size_t active_count = 0;
  for (NodeId v : seeds) {
    ws.active[static_cast<std::size_t>(v)] = 1;
    ws.frontier.push_back(v);
    ++active_count;
  }
  while (!ws.frontier.empty()) {
    ws.touched.clear();
    for (NodeId u : ws.frontier) {
      const auto children = g.child_list(u);
      const auto edges = g.out_edge_indices(u);
      for (std::size_t i = 0; i < children.size(); ++i) {
        const auto c = static_cast<std::size_t>(children[i]);
        if (ws.active[c]) continue;
        ws.influence[c] += weights[edges[i]];
        if (!ws.queued[c]) {
          ws.queued[c] = 1;
          ws.touched.push_back(children[i]);
        }
      }
    }
    ws.next.clear();
    for (NodeId c : ws.touched) {
      const auto ci = static_cast<std::size_t>(c);
      ws.queued[ci] = 0;
      if (uniforms[ci] <= model.threshold(c).cdf(ws.influence[ci])) ws.next.push_back(c);
    }
    for (NodeId c : ws.next) ws.active[static_cast<std::size_t>(c)] = 1;
    active_count += ws.next.size();
    if (!ws.next.empty()) on_step(ws.next);
    std::swap(ws.frontier, ws.next);
  }
  return active_count;
}

}  // namespace

std::size_t simulate_final_size(const GltModel& model, const NodeSet& seeds,
                                std::span<const double> uniforms, SimulationWorkspace& ws) {
  return propagate(model, seeds, uniforms, ws, [](const std::vector<NodeId>&) {});
}

Trace simulate_trace(const GltModel& model, const NodeSet& seeds, Rng& rng) {
  if (seeds.empty()) {
    throw Error(ErrorKind::InvalidArgument, "seed set must be nonempty");
  }
  const std::size_t n = model.graph().node_count();
  std::vector<double> uniforms(n);
  for (double& u : uniforms) u = rng.uniform01();
  Trace trace;
  trace.steps.push_back(seeds);
  SimulationWorkspace ws;
  propagate(model, seeds, uniforms, ws,
            [&](const std::vector<NodeId>& step) { trace.steps.emplace_back(step); });
  return trace;
}

std::vector<Trace> simulate_traces(const GltModel& model, const SeedDistribution& seeds, std::size_t count,
                                   std::uint64_t root_seed, unsigned threads) {
  std::vector<Trace> out(count);
  parallel_for(count, threads, [&](std::size_t i) {
    Rng rng = Rng::derive(root_seed, {i});
    out[i] = simulate_trace(model, sample_seed(seeds, model.graph(), rng), rng);
  });
  return out;
}

Trace simulate_trace_sequential(const GltModel& model, const NodeSet& seeds, Rng& rng) {
  if (seeds.empty()) {
    throw Error(ErrorKind::InvalidArgument, "seed set must be nonempty");
  }
  const Graph& g = model.graph();
  const auto weights = model.weights();
  const std::size_t n = g.node_count();
  std::vector<double> influence(n, 0.0);
  std::vector<char> active(n, 0);
  Trace trace;
  trace.steps.push_back(seeds);
  for (NodeId v : seeds) active[static_cast<std::size_t>(v)] = 1;
  std::vector<NodeId> frontier(seeds.begin(), seeds.end());
  while (!frontier.empty()) {
    // Candidates with their influence from A_{t-2} (before) and A_{t-1} (after).
    std::vector<NodeId> candidates;
    std::vector<double> before(n, -1.0);
    for (NodeId u : frontier) {
      const auto children = g.child_list(u);
      const auto edges = g.out_edge_indices(u);
      for (std::size_t i = 0; i < children.size(); ++i) {
        const auto c = static_cast<std::size_t>(children[i]);
        if (active[c]) continue;
        if (before[c] < 0.0) {
          before[c] = influence[c];
          candidates.push_back(children[i]);
        }
        influence[c] += weights[edges[i]];
      }
    }
    std::sort(candidates.begin(), candidates.end());
    std::vector<NodeId> next;
    for (NodeId c : candidates) {
      const auto ci = static_cast<std::size_t>(c);
      const ThresholdSpec& spec = model.threshold(c);
      const double remaining = spec.sf(before[ci]);
      const double p = remaining > 0.0 ? spec.cdf_difference(influence[ci], before[ci]) / remaining : 0.0;
      if (rng.uniform01() < p) next.push_back(c);
    }
    for (NodeId c : next) active[static_cast<std::size_t>(c)] = 1;
    if (!next.empty()) trace.steps.emplace_back(next);
    frontier = std::move(next);
  }
  return trace;
}

double trace_log_probability(const GltModel& model, const Trace& trace, double seed_log_prob) {
  const Graph& g = model.graph();
  const ActivationHistory h(g, trace);
  const int last = static_cast<int>(trace.steps.size()) - 1;
  double total = seed_log_prob;
  for (std::size_t t = 1; t < trace.steps.size(); ++t) {
    const int s = static_cast<int>(t);
    for (NodeId v : trace.steps[t]) {
      const double d = model.threshold(v).cdf_difference(h.influence(model, v, s - 1),
                                                         h.influence(model, v, s - 2));
      if (!(d > 0.0)) {
        throw Error(ErrorKind::ZeroProbability, "activation has zero probability",
                    {{"node", v}, {"time", t}});
      }
      total += std::log(d);
    }
  }
  const NodeSet active = trace.active_set();
  for (NodeId v : g.children_of_set(active)) {
    const double survive = model.threshold(v).sf(h.influence(model, v, last));
    if (!(survive > 0.0)) {
      throw Error(ErrorKind::ZeroProbability, "non-activation has zero probability",
                  {{"node", v}, {"time", last + 1}});
    }
    total += std::log(survive);
  }
  return total;
}

std::vector<Trace> enumerate_feasible_traces(const Graph& graph, const NodeSet& seeds,
                                             std::size_t state_cap) {
  if (seeds.empty()) {
    throw Error(ErrorKind::InvalidArgument, "seed set must be nonempty");
  }
  for (NodeId v : seeds) {
    if (!graph.is_valid_node(v)) {
      throw Error(ErrorKind::InvalidArgument, "seed node out of range", {{"node", v}});
    }
  }
  std::vector<Trace> out;
  std::size_t states = 0;
  Trace current;
  current.steps.push_back(seeds);
  NodeSet active = seeds;

  std::function<void()> recurse = [&]() {
    if (++states > state_cap) {
      throw Error(ErrorKind::CapExceeded, "trace enumeration exceeded the state cap",
                  {{"cap", state_cap}, {"states", states}});
    }
    out.push_back(current);
    const NodeSet candidates = graph.children_of_set(current.steps.back()).minus(active);
    const std::size_t k = candidates.size();
    if (k >= 63) {
      throw Error(ErrorKind::CapExceeded, "too many simultaneous candidates to enumerate",
                  {{"candidates", k}});
    }
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << k); ++mask) {
      std::vector<NodeId> chosen;
      for (std::size_t i = 0; i < k; ++i) {
        if (mask & (std::uint64_t{1} << i)) chosen.push_back(candidates[i]);
      }
      NodeSet step(std::move(chosen));
      const NodeSet saved = active;
      active = active.united(step);
      current.steps.push_back(std::move(step));
      recurse();
      current.steps.pop_back();
      active = saved;
    }
  };
  recurse();
  return out;
}

namespace {

struct PairHash {
  std::size_t operator()(const std::pair<NodeMask, NodeMask>& p) const noexcept {
    return std::hash<NodeMask>{}(p.first * 0x9e3779b97f4a7c15ULL ^ p.second);
  }
};

}  // namespace

double exact_spread(const GltModel& model, const NodeSet& seeds, std::size_t state_cap) {
  const Graph& g = model.graph();
  if (g.node_count() > 64) {
    throw Error(ErrorKind::InvalidArgument, "exact spread supports at most 64 nodes",
                {{"n", g.node_count()}});
  }
  if (seeds.empty()) return 0.0;
  const auto weights = model.weights();
  std::unordered_map<std::pair<NodeMask, NodeMask>, double, PairHash> memo;

  const auto influence = [&](NodeId v, NodeMask set) {
    const auto parents = g.parent_list(v);
    const auto offset = g.in_offset(v);
    double total = 0.0;
    for (std::size_t i = 0; i < parents.size(); ++i) {
      if (set & (NodeMask{1} << parents[i])) total += weights[offset + i];
    }
    return total;
  };

  // Expected final size from state (A_{t-1}, A_t).
  std::function<double(NodeMask, NodeMask)> expected = [&](NodeMask prev, NodeMask curr) {
    const auto key = std::make_pair(prev, curr);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    if (memo.size() >= state_cap) {
      throw Error(ErrorKind::CapExceeded, "exact spread exceeded the state cap",
                  {{"cap", state_cap}});
    }
    const NodeMask newly = curr & ~prev;
    NodeMask cand_mask = 0;
    for (NodeMask m = newly; m != 0; m &= m - 1) {
      for (NodeId c : g.child_list(static_cast<NodeId>(std::countr_zero(m)))) {
        cand_mask |= NodeMask{1} << c;
      }
    }
    cand_mask &= ~curr;
    std::vector<NodeId> cand;
    std::vector<double> prob;
    for (NodeMask m = cand_mask; m != 0; m &= m - 1) {
      const auto c = static_cast<NodeId>(std::countr_zero(m));
      const ThresholdSpec& spec = model.threshold(c);
      const double before = influence(c, prev);
      const double after = influence(c, curr);
      const double remaining = spec.sf(before);
      double p = remaining > 0.0 ? spec.cdf_difference(after, before) / remaining : 0.0;
      p = std::clamp(p, 0.0, 1.0);
      cand.push_back(c);
      prob.push_back(p);
    }
    const double size_now = static_cast<double>(std::popcount(curr));
    double value = 0.0;
    const std::size_t k = cand.size();
    if (k >= 30) {
      throw Error(ErrorKind::CapExceeded, "too many simultaneous candidates for exact spread",
                  {{"candidates", k}});
    }
    for (std::uint64_t subset = 0; subset < (std::uint64_t{1} << k); ++subset) {
      double p = 1.0;
      NodeMask chosen = 0;
      for (std::size_t i = 0; i < k && p > 0.0; ++i) {
        if (subset & (std::uint64_t{1} << i)) {
          p *= prob[i];
          chosen |= NodeMask{1} << cand[i];
        } else {
          p *= 1.0 - prob[i];
        }
      }
      if (p == 0.0) continue;
      value += p * (chosen == 0 ? size_now : expected(curr, curr | chosen));
    }
    memo.emplace(key, value);
    return value;
  };
  const NodeMask seed_mask = to_mask(seeds);
  return expected(0, seed_mask);
}

}  // namespace glt
