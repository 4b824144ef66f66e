#include "glt/diagnostics.hpp"

#include "glt/error.hpp"
#include "glt/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <unordered_set>

namespace glt {

using boost::multiprecision::cpp_int;

const char* to_string(IdentifiabilityVerdict verdict) noexcept {
  switch (verdict) {
    case IdentifiabilityVerdict::Identifiable: return "identifiable";
    case IdentifiabilityVerdict::NotIdentifiable: return "not-identifiable";
    case IdentifiabilityVerdict::Unknown: return "unknown-cap-exceeded";
  }
  return "unknown-cap-exceeded";
}

bool IdentifiabilityReport::all_identifiable() const {
  return std::all_of(nodes.begin(), nodes.end(), [](const NodeIdentifiability& n) {
    return n.verdict == IdentifiabilityVerdict::Identifiable;
  });
}

namespace {

using BigMatrix = std::vector<std::vector<cpp_int>>;

BigMatrix to_big(const std::vector<std::vector<int>>& matrix) {
  BigMatrix out;
  for (const auto& row : matrix) out.emplace_back(row.begin(), row.end());
  return out;
}

// Fraction-free echelon form in place; returns the rank and the sign of the
// row permutation.
std::size_t bareiss(BigMatrix& a, int& sign) {
  sign = 1;
  const std::size_t rows = a.size();
  const std::size_t cols = rows == 0 ? 0 : a[0].size();
  cpp_int previous = 1;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rank;
    while (pivot < rows && a[pivot][c] == 0) ++pivot;
    if (pivot == rows) continue;
    if (pivot != rank) {
      std::swap(a[pivot], a[rank]);
      sign = -sign;
    }
    for (std::size_t i = rank + 1; i < rows; ++i) {
      for (std::size_t j = c + 1; j < cols; ++j) {
        a[i][j] = (a[i][j] * a[rank][c] - a[i][c] * a[rank][j]) / previous;
      }
      a[i][c] = 0;
    }
    previous = a[rank][c];
    ++rank;
  }
  return rank;
}

struct StateHash {
  std::size_t operator()(const std::pair<NodeMask, NodeMask>& s) const noexcept {
    return std::hash<NodeMask>{}(s.first * 0x9e3779b97f4a7c15ULL ^ s.second);
  }
};

std::vector<std::vector<int>> incidence(const std::vector<NodeId>& parents, const std::vector<NodeSet>& subsets) {
  std::vector<std::vector<int>> x(parents.size(), std::vector<int>(subsets.size(), 0));
  for (std::size_t i = 0; i < parents.size(); ++i) {
    for (std::size_t j = 0; j < subsets.size(); ++j) x[i][j] = subsets[j].contains(parents[i]) ? 1 : 0;
  }
  return x;
}

}  // namespace

std::size_t exact_rank(const std::vector<std::vector<int>>& matrix) {
  BigMatrix a = to_big(matrix);
  int sign = 1;
  return bareiss(a, sign);
}

cpp_int exact_determinant(const std::vector<std::vector<int>>& matrix) {
  for (const auto& row : matrix) {
    if (row.size() != matrix.size()) throw Error(ErrorKind::InvalidArgument, "determinant of a non-square matrix");
  }
  if (matrix.empty()) return 1;
  BigMatrix a = to_big(matrix);
  int sign = 1;
  if (bareiss(a, sign) < matrix.size()) return 0;
  return sign * a.back().back();
}

NodeIdentifiability check_node_identifiability(const Graph& graph,
                                               const std::vector<std::pair<NodeSet, double>>& support,
                                               NodeId v, std::size_t state_cap) {
  NodeIdentifiability out;
  out.node = v;
  const auto parent_span = graph.parent_list(v);
  out.parents.assign(parent_span.begin(), parent_span.end());
  const std::size_t m = out.parents.size();
  if (graph.node_count() > 64) {
    out.message = "search limited to graphs of at most 64 nodes";
    out.rank_deficiency = m;
    return out;
  }
  const std::size_t n = graph.node_count();
  std::vector<NodeMask> child_mask(n, 0);
  for (std::size_t u = 0; u < n; ++u) child_mask[u] = to_mask(graph.children(static_cast<NodeId>(u)));
  const NodeMask parent_mask = to_mask(graph.parents(v));
  const NodeMask self = NodeMask{1} << v;

  std::unordered_set<NodeMask> seen_subsets;
  std::unordered_set<std::pair<NodeMask, NodeMask>, StateHash> visited;
  std::deque<std::pair<NodeMask, NodeMask>> queue;
  for (const auto& [set, p] : support) {
    if (!(p > 0.0) || set.empty()) continue;
    const NodeMask s = to_mask(set);
    if (s & self) continue;
    if (visited.insert({s, s}).second) queue.emplace_back(s, s);
  }

  bool capped = false;
  while (!queue.empty() && out.rank < m) {
    const auto [active, fresh] = queue.front();
    queue.pop_front();
    ++out.states_explored;
    const NodeMask hit = fresh & parent_mask;
    if (hit && seen_subsets.insert(hit).second) {
      const NodeSet subset = from_mask(hit);
      out.achievable.push_back(subset);
      auto trial = out.witnesses;
      trial.push_back(subset);
      if (exact_rank(incidence(out.parents, trial)) > out.rank) {
        out.witnesses = std::move(trial);
        ++out.rank;
      }
    }
    if (capped) continue;
    NodeMask candidates = 0;
    for (NodeMask rest = fresh; rest; rest &= rest - 1) candidates |= child_mask[static_cast<std::size_t>(std::countr_zero(rest))];
    candidates &= ~active & ~self;
    if (!candidates) continue;
    if (std::popcount(candidates) > 24) {
      capped = true;
      continue;
    }
    // Every nonempty subset of the candidates is a feasible next step.
    for (NodeMask sub = candidates; sub; sub = (sub - 1) & candidates) {
      if (visited.size() >= state_cap) {
        capped = true;
        break;
      }
      if (visited.insert({active | sub, sub}).second) queue.emplace_back(active | sub, sub);
    }
  }

  std::sort(out.achievable.begin(), out.achievable.end());
  out.rank_deficiency = m - out.rank;
  if (out.rank == m) {
    out.verdict = IdentifiabilityVerdict::Identifiable;
    out.matrix = incidence(out.parents, out.witnesses);
  } else if (capped) {
    out.verdict = IdentifiabilityVerdict::Unknown;
    out.message = "state cap exceeded before the search finished";
  } else {
    out.verdict = IdentifiabilityVerdict::NotIdentifiable;
    out.witnesses.clear();
    for (std::size_t i = 0; i < m; ++i) {
      const bool never = std::none_of(out.achievable.begin(), out.achievable.end(),
                                      [&](const NodeSet& s) { return s.contains(out.parents[i]); });
      if (never) {
        out.message = "parent " + std::to_string(out.parents[i]) + " is never newly active while the node is inactive";
        break;
      }
    }
    if (out.message.empty()) out.message = "achievable parent subsets do not span all weights";
  }
  return out;
}

IdentifiabilityReport check_identifiability(const Graph& graph, const SeedDistribution& seeds,
                                            std::size_t state_cap, unsigned threads,
                                            std::size_t max_seed_sets) {
  const auto support = seeds.expand(graph, max_seed_sets);
  std::vector<NodeId> targets;
  for (NodeId v = 0; v < static_cast<NodeId>(graph.node_count()); ++v) {
    if (graph.in_degree(v) > 0) targets.push_back(v);
  }
  IdentifiabilityReport report;
  report.nodes.resize(targets.size());
  parallel_for(targets.size(), threads, [&](std::size_t i) {
    report.nodes[i] = check_node_identifiability(graph, support, targets[i], state_cap);
  });
  return report;
}

namespace {

std::vector<double> subset_spreads(const GltModel& model, std::size_t max_size, std::size_t node_cap,
                                   std::size_t state_cap) {
  const std::size_t n = model.graph().node_count();
  if (n > node_cap || n > 20) {
    throw Error(ErrorKind::CapExceeded, "exhaustive spread check limited by the node cap",
                {{"nodes", n}, {"node_cap", node_cap}});
  }
  std::vector<double> sigma(std::size_t{1} << n, std::nan(""));
  sigma[0] = 0.0;
  for (NodeMask s = 1; s < sigma.size(); ++s) {
    if (static_cast<std::size_t>(std::popcount(s)) <= max_size) sigma[s] = exact_spread(model, from_mask(s), state_cap);
  }
  return sigma;
}

}  // namespace

std::vector<SubmodularityViolation> check_submodularity_exact(const GltModel& model, std::size_t max_budget,
                                                              std::size_t node_cap, double tolerance,
                                                              std::size_t state_cap) {
  const auto sigma = subset_spreads(model, max_budget + 1, node_cap, state_cap);
  const std::size_t n = model.graph().node_count();
  std::vector<SubmodularityViolation> out;
  for (NodeMask s = 0; s < sigma.size(); ++s) {
    if (s == 0 || static_cast<std::size_t>(std::popcount(s)) > max_budget) continue;
    for (std::size_t v = 0; v < n; ++v) {
      const NodeMask bit = NodeMask{1} << v;
      if (s & bit) continue;
      const double large = sigma[s | bit] - sigma[s];
      // Proper subsets of s, including the empty set.
      for (NodeMask sub = (s - 1) & s;; sub = (sub - 1) & s) {
        const double small = sigma[sub | bit] - sigma[sub];
        if (small < large - tolerance) {
          out.push_back({from_mask(sub), from_mask(s), static_cast<NodeId>(v), small, large});
        }
        if (sub == 0) break;
      }
    }
  }
  return out;
}

std::vector<MonotonicityViolation> check_monotonicity_exact(const GltModel& model, std::size_t max_budget,
                                                            std::size_t node_cap, double tolerance,
                                                            std::size_t state_cap) {
  const auto sigma = subset_spreads(model, max_budget, node_cap, state_cap);
  std::vector<MonotonicityViolation> out;
  for (NodeMask s = 1; s < sigma.size(); ++s) {
    if (static_cast<std::size_t>(std::popcount(s)) > max_budget) continue;
    for (NodeMask sub = (s - 1) & s;; sub = (sub - 1) & s) {
      if (sigma[sub] > sigma[s] + tolerance) out.push_back({from_mask(sub), from_mask(s), sigma[sub], sigma[s]});
      if (sub == 0) break;
    }
  }
  return out;
}

TriggeringEmbedding solve_triggering_embedding(const std::array<double, 3>& weights,
                                               const std::function<double(double)>& cdf,
                                               std::array<NodeId, 3> parents, double tolerance) {
  // Unknowns P_T indexed by the bitmask of T over the three parents.
  Eigen::Matrix<double, 8, 8> a = Eigen::Matrix<double, 8, 8>::Zero();
  Eigen::Matrix<double, 8, 1> rhs;
  a.row(0).setOnes();
  rhs[0] = 1.0;
  for (unsigned s = 1; s < 8; ++s) {
    double influence = 0.0;
    for (unsigned i = 0; i < 3; ++i) {
      if (s & (1u << i)) influence += weights[i];
    }
    for (unsigned t = 0; t < 8; ++t) a(s, t) = (s & t) ? 1.0 : 0.0;
    rhs[s] = cdf(influence);
  }
  const Eigen::FullPivLU<Eigen::Matrix<double, 8, 8>> lu(a);
  if (lu.rank() < 8) throw Error(ErrorKind::Numerical, "triggering system is singular");
  const Eigen::Matrix<double, 8, 1> p = lu.solve(rhs);

  TriggeringEmbedding out;
  out.parents.assign(parents.begin(), parents.end());
  out.residual = (a * p - rhs).cwiseAbs().maxCoeff();
  for (unsigned t = 0; t < 8; ++t) {
    std::vector<NodeId> members;
    for (unsigned i = 0; i < 3; ++i) {
      if (t & (1u << i)) members.push_back(parents[i]);
    }
    out.subsets.emplace_back(std::move(members));
    out.probabilities.push_back(p[t]);
    if (p[t] < out.most_negative) {
      out.most_negative = p[t];
      out.most_negative_subset = out.subsets.back();
    }
  }
  out.feasible = out.most_negative >= -tolerance;
  return out;
}

TriggeringEmbedding solve_triggering_embedding(const GltModel& model, NodeId v, double tolerance) {
  const auto parents = model.graph().parent_list(v);
  if (parents.size() != 3) {
    throw Error(ErrorKind::InvalidArgument, "triggering embedding needs a node with three parents",
                {{"node", v}, {"in_degree", parents.size()}});
  }
  const auto w = model.parent_weights(v);
  const ThresholdSpec& spec = model.threshold(v);
  return solve_triggering_embedding({w[0], w[1], w[2]}, [&](double x) { return spec.cdf(x); },
                                    {parents[0], parents[1], parents[2]}, tolerance);
}

}  // namespace glt
