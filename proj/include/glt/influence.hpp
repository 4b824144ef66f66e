#pragma once

#include "glt/model.hpp"

#include <cstdint>
#include <vector>

namespace glt {

struct SpreadEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t replicates = 0;
};

// Replicate r uses the stream derive(root_seed, {r}), so the estimate does not
// depend on the thread count.
SpreadEstimate estimate_spread_mc(const GltModel& model, const NodeSet& seeds, std::size_t replicates,
                                  std::uint64_t root_seed, unsigned threads = 1);

// |S| + sum over children v outside S of F_v(B_v(S)). Throws InvalidGraph
// unless every edge goes from a node without parents to a node without children.
double spread_bipartite_closed_form(const GltModel& model, const NodeSet& seeds);
bool is_bipartite_orientation(const Graph& graph);

enum class EvaluatorKind { MonteCarlo, Exact, Bipartite };
const char* to_string(EvaluatorKind kind) noexcept;

struct SpreadEvaluator {
  EvaluatorKind kind = EvaluatorKind::MonteCarlo;
  std::size_t replicates = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::size_t state_cap = 1'000'000;

  static SpreadEvaluator monte_carlo(std::size_t replicates, std::uint64_t seed, unsigned threads = 1);
  static SpreadEvaluator exact(std::size_t state_cap = 1'000'000);
  static SpreadEvaluator bipartite();
};

// Exact evaluators return a zero standard error.
SpreadEstimate evaluate_spread(const GltModel& model, const NodeSet& seeds, const SpreadEvaluator& evaluator);

struct ImSolution {
  std::vector<NodeId> seeds;  // in selection order
  std::vector<double> gains;  // marginal gain of each pick when it was made
  SpreadEstimate spread;      // of the final set
};

// Greedy selection of `budget` seeds by largest marginal gain, ties to the
// lowest node index. Under Monte Carlo every candidate of step t sees the
// same replicate streams derive(seed, {t, r}).
ImSolution greedy_im(const GltModel& model, std::size_t budget, const SpreadEvaluator& evaluator);

// Best set of size `budget` by enumeration of all subsets (lexicographically
// first on ties). Requires an exact evaluator.
ImSolution exhaustive_im(const GltModel& model, std::size_t budget, const SpreadEvaluator& evaluator,
                         std::size_t max_sets = 1'000'000);

enum class ImSolver { Greedy, Exhaustive };

// sigma_true(S*(true)) - sigma_true(S*(estimate)), both spreads under the true model.
double im_solution_gap(const GltModel& truth, const GltModel& estimate, std::size_t budget,
                       const SpreadEvaluator& evaluator, ImSolver solver = ImSolver::Greedy);

}  // namespace glt
