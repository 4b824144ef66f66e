#pragma once

#include "glt/graph.hpp"
#include "glt/model.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace glt {

enum class IdentifiabilityVerdict { Identifiable, NotIdentifiable, Unknown };
const char* to_string(IdentifiabilityVerdict verdict) noexcept;

struct NodeIdentifiability {
  NodeId node = 0;
  std::vector<NodeId> parents;
  IdentifiabilityVerdict verdict = IdentifiabilityVerdict::Unknown;
  // Distinct nonempty D_t cap P(v) found with v still inactive. The search
  // stops as soon as m independent ones are known, so this may be partial.
  std::vector<NodeSet> achievable;
  // Identifiable: S_1..S_m with X[i][j] = 1(parents[i] in S_j) invertible.
  std::vector<NodeSet> witnesses;
  std::vector<std::vector<int>> matrix;
  std::size_t rank = 0;
  std::size_t rank_deficiency = 0;
  std::size_t states_explored = 0;
  std::string message;
};

struct IdentifiabilityReport {
  std::vector<NodeIdentifiability> nodes;  // every node with at least one parent
  bool all_identifiable() const;
};

// Forward search over (A_t, D_t) states reachable from the seed support while
// v stays inactive. Nodes whose search exceeds state_cap get Unknown.
IdentifiabilityReport check_identifiability(const Graph& graph, const SeedDistribution& seeds,
                                            std::size_t state_cap = 1'000'000, unsigned threads = 1,
                                            std::size_t max_seed_sets = 100'000);
NodeIdentifiability check_node_identifiability(const Graph& graph,
                                               const std::vector<std::pair<NodeSet, double>>& support,
                                               NodeId v, std::size_t state_cap = 1'000'000);

// Exact integer rank and determinant by fraction-free elimination.
std::size_t exact_rank(const std::vector<std::vector<int>>& matrix);
boost::multiprecision::cpp_int exact_determinant(const std::vector<std::vector<int>>& matrix);

// sigma({v} u S') - sigma(S') < sigma({v} u S) - sigma(S) - tolerance.
struct SubmodularityViolation {
  NodeSet smaller;
  NodeSet larger;
  NodeId added = 0;
  double gain_smaller = 0.0;
  double gain_larger = 0.0;
};

struct MonotonicityViolation {
  NodeSet smaller;
  NodeSet larger;
  double spread_smaller = 0.0;
  double spread_larger = 0.0;
};

// Exhaustive over S' strictly inside S, |S| <= max_budget, v outside S, with
// exact spreads. Throws CapExceeded above node_cap nodes.
std::vector<SubmodularityViolation> check_submodularity_exact(const GltModel& model, std::size_t max_budget,
                                                              std::size_t node_cap = 12,
                                                              double tolerance = 1e-9,
                                                              std::size_t state_cap = 1'000'000);
std::vector<MonotonicityViolation> check_monotonicity_exact(const GltModel& model, std::size_t max_budget,
                                                            std::size_t node_cap = 12,
                                                            double tolerance = 1e-9,
                                                            std::size_t state_cap = 1'000'000);

// Probabilities P_T of the triggering sets T of a three-parent node that
// reproduce its activation law: P(T meets S) = F(B(S)) for every nonempty S,
// and the P_T sum to one.
struct TriggeringEmbedding {
  std::vector<NodeId> parents;
  std::vector<NodeSet> subsets;  // all 8 subsets of parents, by bitmask order
  std::vector<double> probabilities;
  bool feasible = true;          // every probability >= -tolerance
  NodeSet most_negative_subset;  // certificate when infeasible
  double most_negative = 0.0;
  double residual = 0.0;         // max equation error of the solution
};

TriggeringEmbedding solve_triggering_embedding(const std::array<double, 3>& weights,
                                               const std::function<double(double)>& cdf,
                                               std::array<NodeId, 3> parents = {0, 1, 2},
                                               double tolerance = 1e-12);
// Requires v to have exactly three parents.
TriggeringEmbedding solve_triggering_embedding(const GltModel& model, NodeId v, double tolerance = 1e-12);

}  // namespace glt
