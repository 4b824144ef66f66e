#include "glt/influence.hpp"

#include "glt/error.hpp"
#include "glt/parallel.hpp"
#include "glt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace glt {

namespace {

SpreadEstimate summarize(const std::vector<double>& sizes) {
  SpreadEstimate out;
  out.replicates = sizes.size();
  if (sizes.empty()) return out;
  double sum = 0.0;
  for (double s : sizes) sum += s;
  out.mean = sum / static_cast<double>(sizes.size());
  if (sizes.size() > 1) {
    double ss = 0.0;
    for (double s : sizes) ss += (s - out.mean) * (s - out.mean);
    out.standard_error = std::sqrt(ss / static_cast<double>(sizes.size() - 1) / static_cast<double>(sizes.size()));
  }
  return out;
}

void fill_uniforms(Rng rng, std::span<double> out) {
  for (double& u : out) u = rng.uniform01();
}

void check_seeds(const GltModel& model, const NodeSet& seeds) {
  for (NodeId v : seeds) {
    if (!model.graph().is_valid_node(v)) throw Error(ErrorKind::InvalidArgument, "seed is not a node", {{"node", v}});
  }
}

}  // namespace

SpreadEstimate estimate_spread_mc(const GltModel& model, const NodeSet& seeds, std::size_t replicates,
                                  std::uint64_t root_seed, unsigned threads) {
  if (replicates == 0) throw Error(ErrorKind::InvalidArgument, "at least one replicate is required");
  check_seeds(model, seeds);
  const std::size_t n = model.graph().node_count();
  std::vector<double> sizes(replicates);
  const std::size_t workers = std::max(1u, threads);
  parallel_for(workers, threads, [&](std::size_t w) {
    SimulationWorkspace ws;
    std::vector<double> uniforms(n);
    for (std::size_t r = replicates * w / workers; r < replicates * (w + 1) / workers; ++r) {
      fill_uniforms(Rng::derive(root_seed, {r}), uniforms);
      sizes[r] = static_cast<double>(simulate_final_size(model, seeds, uniforms, ws));
    }
  });
  return summarize(sizes);
}

bool is_bipartite_orientation(const Graph& graph) {
  for (const Edge& e : graph.edges()) {
    if (graph.in_degree(e.parent) != 0 || !graph.child_list(e.child).empty()) return false;
  }
  return true;
}

double spread_bipartite_closed_form(const GltModel& model, const NodeSet& seeds) {
  const Graph& g = model.graph();
  if (!is_bipartite_orientation(g)) {
    throw Error(ErrorKind::InvalidGraph, "graph is not bipartite from parents to children");
  }
  check_seeds(model, seeds);
  double total = static_cast<double>(seeds.size());
  for (NodeId v = 0; v < static_cast<NodeId>(g.node_count()); ++v) {
    if (g.in_degree(v) == 0 || seeds.contains(v)) continue;
    const auto parents = g.parent_list(v);
    const auto w = model.parent_weights(v);
    double influence = 0.0;
    for (std::size_t j = 0; j < parents.size(); ++j) {
      if (seeds.contains(parents[j])) influence += w[j];
    }
    if (influence > 0.0) total += model.threshold(v).cdf(influence);
  }
  return total;
}

const char* to_string(EvaluatorKind kind) noexcept {
  switch (kind) {
    case EvaluatorKind::MonteCarlo: return "mc";
    case EvaluatorKind::Exact: return "exact";
    case EvaluatorKind::Bipartite: return "bipartite";
  }
  return "mc";
}

SpreadEvaluator SpreadEvaluator::monte_carlo(std::size_t replicates, std::uint64_t seed, unsigned threads) {
  SpreadEvaluator e;
  e.kind = EvaluatorKind::MonteCarlo;
  e.replicates = replicates;
  e.seed = seed;
  e.threads = threads;
  return e;
}

SpreadEvaluator SpreadEvaluator::exact(std::size_t state_cap) {
  SpreadEvaluator e;
  e.kind = EvaluatorKind::Exact;
  e.state_cap = state_cap;
  return e;
}

SpreadEvaluator SpreadEvaluator::bipartite() {
  SpreadEvaluator e;
  e.kind = EvaluatorKind::Bipartite;
  return e;
}

SpreadEstimate evaluate_spread(const GltModel& model, const NodeSet& seeds, const SpreadEvaluator& evaluator) {
  SpreadEstimate out;
  switch (evaluator.kind) {
    case EvaluatorKind::MonteCarlo:
      return estimate_spread_mc(model, seeds, evaluator.replicates, evaluator.seed, evaluator.threads);
    case EvaluatorKind::Exact:
      check_seeds(model, seeds);
      out.mean = seeds.empty() ? 0.0 : exact_spread(model, seeds, evaluator.state_cap);
      break;
    case EvaluatorKind::Bipartite:
      out.mean = spread_bipartite_closed_form(model, seeds);
      break;
  }
  out.replicates = 1;
  return out;
}

namespace {

// Marginal gains of every candidate outside `chosen` at greedy step `step`.
std::vector<double> step_gains(const GltModel& model, const NodeSet& chosen, std::size_t step,
                               const SpreadEvaluator& evaluator) {
  const std::size_t n = model.graph().node_count();
  std::vector<double> gains(n, -std::numeric_limits<double>::infinity());
  if (evaluator.kind != EvaluatorKind::MonteCarlo) {
    const double base = evaluate_spread(model, chosen, evaluator).mean;
    for (std::size_t v = 0; v < n; ++v) {
      if (chosen.contains(static_cast<NodeId>(v))) continue;
      gains[v] = evaluate_spread(model, chosen.with(static_cast<NodeId>(v)), evaluator).mean - base;
    }
    return gains;
  }
  if (evaluator.replicates == 0) throw Error(ErrorKind::InvalidArgument, "at least one replicate is required");
  const std::size_t reps = evaluator.replicates;
  std::vector<double> uniforms(reps * n);
  parallel_for(reps, evaluator.threads, [&](std::size_t r) {
    fill_uniforms(Rng::derive(evaluator.seed, {step, r}), std::span<double>(uniforms).subspan(r * n, n));
  });
  const auto mean_size = [&](const NodeSet& seeds, SimulationWorkspace& ws) {
    double sum = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      sum += static_cast<double>(simulate_final_size(model, seeds, std::span<const double>(uniforms).subspan(r * n, n), ws));
    }
    return sum / static_cast<double>(reps);
  };
  SimulationWorkspace base_ws;
  const double base = chosen.empty() ? 0.0 : mean_size(chosen, base_ws);
  const std::size_t workers = std::max(1u, evaluator.threads);
  parallel_for(workers, evaluator.threads, [&](std::size_t w) {
    SimulationWorkspace ws;
    for (std::size_t v = n * w / workers; v < n * (w + 1) / workers; ++v) {
      if (chosen.contains(static_cast<NodeId>(v))) continue;
      gains[v] = mean_size(chosen.with(static_cast<NodeId>(v)), ws) - base;
    }
  });
  return gains;
}

SpreadEstimate final_spread(const GltModel& model, const NodeSet& seeds, const SpreadEvaluator& evaluator) {
  if (evaluator.kind != EvaluatorKind::MonteCarlo) return evaluate_spread(model, seeds, evaluator);
  return estimate_spread_mc(model, seeds, evaluator.replicates, subseed(evaluator.seed, "final-spread"),
                            evaluator.threads);
}

void check_budget(const GltModel& model, std::size_t budget) {
  if (budget > model.graph().node_count()) {
    throw Error(ErrorKind::InvalidArgument, "budget exceeds the number of nodes",
                {{"budget", budget}, {"nodes", model.graph().node_count()}});
  }
}

}  // namespace

ImSolution greedy_im(const GltModel& model, std::size_t budget, const SpreadEvaluator& evaluator) {
  check_budget(model, budget);
  ImSolution out;
  NodeSet chosen;
  for (std::size_t step = 0; step < budget; ++step) {
    const auto gains = step_gains(model, chosen, step, evaluator);
    // Exact evaluators differ by round-off on ties; keep the lower index then.
    const double slack = evaluator.kind == EvaluatorKind::MonteCarlo ? 0.0 : 1e-12;
    std::size_t best = gains.size();
    for (std::size_t v = 0; v < gains.size(); ++v) {
      if (chosen.contains(static_cast<NodeId>(v))) continue;
      if (best == gains.size() || gains[v] > gains[best] + slack * (1.0 + std::abs(gains[best]))) best = v;
    }
    out.seeds.push_back(static_cast<NodeId>(best));
    out.gains.push_back(gains[best]);
    chosen = chosen.with(static_cast<NodeId>(best));
  }
  out.spread = final_spread(model, chosen, evaluator);
  return out;
}

ImSolution exhaustive_im(const GltModel& model, std::size_t budget, const SpreadEvaluator& evaluator,
                         std::size_t max_sets) {
  check_budget(model, budget);
  if (evaluator.kind == EvaluatorKind::MonteCarlo) {
    throw Error(ErrorKind::InvalidArgument, "exhaustive search needs an exact evaluator");
  }
  const std::size_t n = model.graph().node_count();
  std::vector<NodeId> current(budget);
  for (std::size_t i = 0; i < budget; ++i) current[i] = static_cast<NodeId>(i);
  ImSolution out;
  double best = -std::numeric_limits<double>::infinity();
  std::size_t visited = 0;
  while (true) {
    if (++visited > max_sets) {
      throw Error(ErrorKind::CapExceeded, "too many candidate seed sets", {{"max_sets", max_sets}});
    }
    const NodeSet s{std::vector<NodeId>(current)};
    const double value = evaluate_spread(model, s, evaluator).mean;
    if (visited == 1 || value > best + 1e-12 * (1.0 + std::abs(best))) {
      best = value;
      out.seeds = current;
    }
    // Next k-combination in lexicographic order.
    std::size_t i = budget;
    while (i > 0 && static_cast<std::size_t>(current[i - 1]) == n - budget + i - 1) --i;
    if (i == 0) break;
    ++current[i - 1];
    for (std::size_t j = i; j < budget; ++j) current[j] = current[j - 1] + 1;
  }
  out.spread.mean = budget == 0 ? 0.0 : best;
  out.spread.replicates = 1;
  return out;
}

double im_solution_gap(const GltModel& truth, const GltModel& estimate, std::size_t budget,
                       const SpreadEvaluator& evaluator, ImSolver solver) {
  const auto a = truth.graph().edges();
  const auto b = estimate.graph().edges();
  if (truth.graph().node_count() != estimate.graph().node_count() || !std::equal(a.begin(), a.end(), b.begin(), b.end())) {
    throw Error(ErrorKind::InvalidArgument, "models must share the same graph");
  }
  const auto solve = [&](const GltModel& m) {
    return solver == ImSolver::Greedy ? greedy_im(m, budget, evaluator).seeds
                                      : exhaustive_im(m, budget, evaluator).seeds;
  };
  const NodeSet best{solve(truth)};
  const NodeSet chosen{solve(estimate)};
  return final_spread(truth, best, evaluator).mean - final_spread(truth, chosen, evaluator).mean;
}

}  // namespace glt
