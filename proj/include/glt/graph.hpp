#pragma once

#include "glt/node_set.hpp"
#include "glt/rng.hpp"

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace glt {

struct Edge {
  NodeId parent = 0;
  NodeId child = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Canonical order: by child, then by parent.
bool canonical_less(const Edge& a, const Edge& b) noexcept;

// Simple directed graph with edges stored in canonical order. The parent
// edges of a node v therefore occupy the contiguous index range
// [in_offset(v), in_offset(v) + in_degree(v)), which is how per-edge weight
// vectors are sliced into per-node parameter blocks.
class Graph {
 public:
  Graph() = default;

  std::size_t node_count() const noexcept { return node_count_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }

  std::size_t in_offset(NodeId v) const { return in_offsets_.at(static_cast<std::size_t>(v)); }
  std::size_t in_degree(NodeId v) const;
  std::span<const NodeId> parent_list(NodeId v) const;
  std::span<const NodeId> child_list(NodeId v) const;
  // Edge indices of v -> child_list(v)[i].
  std::span<const std::size_t> out_edge_indices(NodeId v) const;

  NodeSet parents(NodeId v) const;
  NodeSet children(NodeId v) const;
  // Union of parents (children) of members of s, excluding s itself.
  NodeSet parents_of_set(const NodeSet& s) const;
  NodeSet children_of_set(const NodeSet& s) const;

  std::optional<std::size_t> edge_index(NodeId parent, NodeId child) const;
  bool is_valid_node(NodeId v) const noexcept {
    return v >= 0 && static_cast<std::size_t>(v) < node_count_;
  }
  // Connectivity of the undirected skeleton.
  bool weakly_connected() const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.node_count_ == b.node_count_ && a.edges_ == b.edges_;
  }

  friend Graph build_graph(std::size_t node_count, std::vector<Edge> edges);

 private:
  void check_node(NodeId v) const;

  std::size_t node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> in_offsets_;  // node_count + 1 entries
  std::vector<NodeId> parents_flat_;
  std::vector<std::size_t> out_offsets_;
  std::vector<NodeId> children_flat_;
  std::vector<std::size_t> out_edges_flat_;
};

// Throws InvalidGraph on self-loops, duplicate edges or out-of-range indices.
Graph build_graph(std::size_t node_count, std::vector<Edge> edges);

// Connected Watts-Strogatz graph with every undirected edge doubled. Requires
// n > k >= 2, k even, 0 <= p <= 1. Regenerates up to `max_attempts` times
// until the graph is connected.
Graph generate_cws(std::size_t n, std::size_t k, double p, Rng& rng, int max_attempts = 100);

// Per child v, theta_v ~ Uniform{w >= 0, |w|_1 <= d_max}; aligned to the
// canonical edge order.
std::vector<double> sample_weights_simplex(const Graph& graph, double d_max, Rng& rng);

// Scales w down (if needed) so that the left-to-right floating-point sum is
// <= bound exactly.
void clamp_l1(std::span<double> w, double bound);

enum class SeedLaw {
  SizeThenSubset,  // size uniform on {1..s_max}, then a uniform subset of that size
  UniformOverSets, // uniform over all sets with 1 <= |S| <= s_max
};

class SeedDistribution {
 public:
  static SeedDistribution explicit_support(std::vector<std::pair<NodeSet, double>> support);
  static SeedDistribution uniform_by_size(std::size_t s_max, SeedLaw law = SeedLaw::SizeThenSubset);

  bool is_explicit() const noexcept { return explicit_; }
  const std::vector<std::pair<NodeSet, double>>& support() const noexcept { return support_; }
  std::size_t s_max() const noexcept { return s_max_; }
  SeedLaw law() const noexcept { return law_; }

  // Explicit list of (set, probability). For uniform-by-size laws this
  // enumerates all sets, throwing CapExceeded above max_sets.
  std::vector<std::pair<NodeSet, double>> expand(const Graph& graph, std::size_t max_sets) const;

 private:
  bool explicit_ = true;
  std::vector<std::pair<NodeSet, double>> support_;
  std::vector<double> cumulative_;
  std::size_t s_max_ = 0;
  SeedLaw law_ = SeedLaw::SizeThenSubset;

  friend NodeSet sample_seed(const SeedDistribution&, const Graph&, Rng&);
};

NodeSet sample_seed(const SeedDistribution& dist, const Graph& graph, Rng& rng);

}  // namespace glt
