#include "glt/graph.hpp"

#include "glt/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>

namespace glt {

bool canonical_less(const Edge& a, const Edge& b) noexcept {
  if (a.child != b.child) return a.child < b.child;
  return a.parent < b.parent;
}

Graph build_graph(std::size_t node_count, std::vector<Edge> edges) {
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    const auto in_range = [&](NodeId v) {
      return v >= 0 && static_cast<std::size_t>(v) < node_count;
    };
    if (!in_range(e.parent) || !in_range(e.child)) {
      throw Error(ErrorKind::InvalidGraph, "edge index out of range",
                  {{"edge", i}, {"parent", e.parent}, {"child", e.child}, {"n", node_count}});
    }
    if (e.parent == e.child) {
      throw Error(ErrorKind::InvalidGraph, "self-loop", {{"edge", i}, {"node", e.parent}});
    }
  }
  std::sort(edges.begin(), edges.end(), canonical_less);
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (edges[i] == edges[i - 1]) {
      throw Error(ErrorKind::InvalidGraph, "duplicate edge",
                  {{"parent", edges[i].parent}, {"child", edges[i].child}});
    }
  }

  Graph g;
  g.node_count_ = node_count;
  g.edges_ = std::move(edges);

  g.in_offsets_.assign(node_count + 1, 0);
  for (const Edge& e : g.edges_) ++g.in_offsets_[static_cast<std::size_t>(e.child) + 1];
  std::partial_sum(g.in_offsets_.begin(), g.in_offsets_.end(), g.in_offsets_.begin());
  g.parents_flat_.reserve(g.edges_.size());
  for (const Edge& e : g.edges_) g.parents_flat_.push_back(e.parent);

  g.out_offsets_.assign(node_count + 1, 0);
  for (const Edge& e : g.edges_) ++g.out_offsets_[static_cast<std::size_t>(e.parent) + 1];
  std::partial_sum(g.out_offsets_.begin(), g.out_offsets_.end(), g.out_offsets_.begin());
  g.children_flat_.resize(g.edges_.size());
  g.out_edges_flat_.resize(g.edges_.size());
  std::vector<std::size_t> cursor(g.out_offsets_.begin(), g.out_offsets_.end() - 1);
  // Edges are visited in canonical order, so children of a parent end up sorted.
  for (std::size_t i = 0; i < g.edges_.size(); ++i) {
    const auto slot = cursor[static_cast<std::size_t>(g.edges_[i].parent)]++;
    g.children_flat_[slot] = g.edges_[i].child;
    g.out_edges_flat_[slot] = i;
  }
  return g;
}

void Graph::check_node(NodeId v) const {
  if (!is_valid_node(v)) {
    throw Error(ErrorKind::InvalidArgument, "node index out of range",
                {{"node", v}, {"n", node_count_}});
  }
}

std::size_t Graph::in_degree(NodeId v) const {
  check_node(v);
  const auto i = static_cast<std::size_t>(v);
  return in_offsets_[i + 1] - in_offsets_[i];
}

std::span<const NodeId> Graph::parent_list(NodeId v) const {
  check_node(v);
  const auto i = static_cast<std::size_t>(v);
  return std::span<const NodeId>(parents_flat_).subspan(in_offsets_[i],
                                                        in_offsets_[i + 1] - in_offsets_[i]);
}

std::span<const NodeId> Graph::child_list(NodeId v) const {
  check_node(v);
  const auto i = static_cast<std::size_t>(v);
  return std::span<const NodeId>(children_flat_)
      .subspan(out_offsets_[i], out_offsets_[i + 1] - out_offsets_[i]);
}

std::span<const std::size_t> Graph::out_edge_indices(NodeId v) const {
  check_node(v);
  const auto i = static_cast<std::size_t>(v);
  return std::span<const std::size_t>(out_edges_flat_)
      .subspan(out_offsets_[i], out_offsets_[i + 1] - out_offsets_[i]);
}

NodeSet Graph::parents(NodeId v) const {
  auto p = parent_list(v);
  return NodeSet(std::vector<NodeId>(p.begin(), p.end()));
}

NodeSet Graph::children(NodeId v) const {
  auto c = child_list(v);
  return NodeSet(std::vector<NodeId>(c.begin(), c.end()));
}

NodeSet Graph::parents_of_set(const NodeSet& s) const {
  std::vector<NodeId> out;
  for (NodeId v : s) {
    for (NodeId u : parent_list(v)) {
      if (!s.contains(u)) out.push_back(u);
    }
  }
  return NodeSet(std::move(out));
}

NodeSet Graph::children_of_set(const NodeSet& s) const {
  std::vector<NodeId> out;
  for (NodeId v : s) {
    for (NodeId u : child_list(v)) {
      if (!s.contains(u)) out.push_back(u);
    }
  }
  return NodeSet(std::move(out));
}

std::optional<std::size_t> Graph::edge_index(NodeId parent, NodeId child) const {
  if (!is_valid_node(parent) || !is_valid_node(child)) return std::nullopt;
  auto plist = parent_list(child);
  auto it = std::lower_bound(plist.begin(), plist.end(), parent);
  if (it == plist.end() || *it != parent) return std::nullopt;
  return in_offset(child) + static_cast<std::size_t>(it - plist.begin());
}

bool Graph::weakly_connected() const {
  if (node_count_ == 0) return true;
  std::vector<char> seen(node_count_, 0);
  std::queue<NodeId> frontier;
  frontier.push(0);
  seen[0] = 1;
  std::size_t visited = 1;
  while (!frontier.empty()) {
    const NodeId v = frontier.front();
    frontier.pop();
    const auto visit = [&](NodeId u) {
      if (!seen[static_cast<std::size_t>(u)]) {
        seen[static_cast<std::size_t>(u)] = 1;
        ++visited;
        frontier.push(u);
      }
    };
    for (NodeId u : parent_list(v)) visit(u);
    for (NodeId u : child_list(v)) visit(u);
  }
  return visited == node_count_;
}

namespace {

// One Watts-Strogatz draw as an undirected edge set {min, max}.
std::set<std::pair<NodeId, NodeId>> watts_strogatz(std::size_t n, std::size_t k, double p,
                                                   Rng& rng) {
  const auto key = [](NodeId a, NodeId b) { return std::pair{std::min(a, b), std::max(a, b)}; };
  std::vector<std::set<NodeId>> adj(n);
  std::set<std::pair<NodeId, NodeId>> edges;
  for (std::size_t j = 1; j <= k / 2; ++j) {
    for (std::size_t u = 0; u < n; ++u) {
      const auto a = static_cast<NodeId>(u);
      const auto b = static_cast<NodeId>((u + j) % n);
      edges.insert(key(a, b));
      adj[static_cast<std::size_t>(a)].insert(b);
      adj[static_cast<std::size_t>(b)].insert(a);
    }
  }
  // Rewire the j-th ring neighbour of each node with probability p.
  for (std::size_t j = 1; j <= k / 2; ++j) {
    for (std::size_t u = 0; u < n; ++u) {
      if (rng.uniform01() >= p) continue;
      const auto a = static_cast<NodeId>(u);
      const auto v = static_cast<NodeId>((u + j) % n);
      if (adj[u].size() >= n - 1) continue;
      NodeId w = 0;
      do {
        w = static_cast<NodeId>(rng.below(n));
      } while (w == a || adj[u].contains(w));
      if (!adj[u].contains(v)) continue;
      edges.erase(key(a, v));
      adj[u].erase(v);
      adj[static_cast<std::size_t>(v)].erase(a);
      edges.insert(key(a, w));
      adj[u].insert(w);
      adj[static_cast<std::size_t>(w)].insert(a);
    }
  }
  return edges;
}

}  // namespace

Graph generate_cws(std::size_t n, std::size_t k, double p, Rng& rng, int max_attempts) {
  if (!(n > k && k >= 2 && k % 2 == 0)) {
    throw Error(ErrorKind::InvalidArgument, "CWS requires n > k >= 2 with k even",
                {{"n", n}, {"k", k}});
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "rewiring probability must lie in [0, 1]", {{"p", p}});
  }
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    const auto undirected = watts_strogatz(n, k, p, rng);
    std::vector<Edge> edges;
    edges.reserve(2 * undirected.size());
    for (const auto& [a, b] : undirected) {
      edges.push_back({a, b});
      edges.push_back({b, a});
    }
    Graph g = build_graph(n, std::move(edges));
    if (g.weakly_connected()) return g;
  }
  throw Error(ErrorKind::CapExceeded, "no connected Watts-Strogatz graph within retry budget",
              {{"attempts", max_attempts}, {"n", n}, {"k", k}, {"p", p}});
}

void clamp_l1(std::span<double> w, double bound) {
  for (int guard = 0; guard < 64; ++guard) {
    double sum = 0.0;
    for (double x : w) sum += x;
    if (sum <= bound) return;
    const double scale = std::nextafter(bound / sum, 0.0);
    for (double& x : w) x *= scale;
  }
  throw Error(ErrorKind::Numerical, "could not enforce l1 bound", {{"bound", bound}});
}

std::vector<double> sample_weights_simplex(const Graph& graph, double d_max, Rng& rng) {
  if (!(d_max > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "d_max must be positive", {{"d_max", d_max}});
  }
  std::vector<double> weights(graph.edge_count(), 0.0);
  std::vector<double> draws;
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    const auto node = static_cast<NodeId>(v);
    const std::size_t m = graph.in_degree(node);
    if (m == 0) continue;
    // m + 1 exponentials normalised: flat Dirichlet on the (m+1)-simplex,
    // dropping the slack coordinate gives the uniform law on the l1 ball.
    draws.resize(m + 1);
    double total = 0.0;
    for (double& d : draws) {
      d = rng.exponential();
      total += d;
    }
    std::span<double> block(weights.data() + graph.in_offset(node), m);
    for (std::size_t i = 0; i < m; ++i) block[i] = d_max * (draws[i] / total);
    clamp_l1(block, d_max);
  }
  return weights;
}

SeedDistribution SeedDistribution::explicit_support(
    std::vector<std::pair<NodeSet, double>> support) {
  if (support.empty()) {
    throw Error(ErrorKind::InvalidArgument, "seed distribution support is empty");
  }
  SeedDistribution d;
  d.explicit_ = true;
  double total = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    const auto& [set, prob] = support[i];
    if (set.empty()) {
      throw Error(ErrorKind::InvalidArgument, "seed distribution support contains the empty set",
                  {{"entry", i}});
    }
    if (!(prob >= 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "negative seed probability", {{"entry", i}});
    }
    total += prob;
    d.cumulative_.push_back(total);
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorKind::InvalidArgument, "seed probabilities must sum to 1", {{"sum", total}});
  }
  d.support_ = std::move(support);
  return d;
}

SeedDistribution SeedDistribution::uniform_by_size(std::size_t s_max, SeedLaw law) {
  if (s_max < 1) {
    throw Error(ErrorKind::InvalidArgument, "s_max must be at least 1", {{"s_max", s_max}});
  }
  SeedDistribution d;
  d.explicit_ = false;
  d.s_max_ = s_max;
  d.law_ = law;
  return d;
}

namespace {

double log_binomial(std::size_t n, std::size_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

void check_s_max(const SeedDistribution& dist, const Graph& graph) {
  if (dist.s_max() > graph.node_count()) {
    throw Error(ErrorKind::InvalidArgument, "s_max exceeds node count",
                {{"s_max", dist.s_max()}, {"n", graph.node_count()}});
  }
}

}  // namespace

std::vector<std::pair<NodeSet, double>> SeedDistribution::expand(const Graph& graph,
                                                                 std::size_t max_sets) const {
  if (explicit_) return support_;
  check_s_max(*this, graph);
  const std::size_t n = graph.node_count();
  double count = 0.0;
  for (std::size_t s = 1; s <= s_max_; ++s) count += std::exp(log_binomial(n, s));
  if (count > static_cast<double>(max_sets)) {
    throw Error(ErrorKind::CapExceeded, "seed support too large to enumerate",
                {{"sets", count}, {"cap", max_sets}});
  }
  std::vector<std::pair<NodeSet, double>> out;
  for (std::size_t s = 1; s <= s_max_; ++s) {
    const double per_set = law_ == SeedLaw::SizeThenSubset
                               ? 1.0 / (static_cast<double>(s_max_) * std::exp(log_binomial(n, s)))
                               : 1.0 / count;
    // Lexicographic enumeration of s-subsets.
    std::vector<NodeId> idx(s);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      out.emplace_back(NodeSet(idx), per_set);
      std::size_t i = s;
      while (i > 0 && static_cast<std::size_t>(idx[i - 1]) == n - s + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < s; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return out;
}

NodeSet sample_seed(const SeedDistribution& dist, const Graph& graph, Rng& rng) {
  if (dist.explicit_) {
    const double u = rng.uniform01() * dist.cumulative_.back();
    auto it = std::upper_bound(dist.cumulative_.begin(), dist.cumulative_.end(), u);
    auto i = static_cast<std::size_t>(it - dist.cumulative_.begin());
    if (i >= dist.support_.size()) i = dist.support_.size() - 1;
    return dist.support_[i].first;
  }
  check_s_max(dist, graph);
  const std::size_t n = graph.node_count();
  std::size_t size = 1;
  if (dist.law_ == SeedLaw::SizeThenSubset) {
    size = 1 + static_cast<std::size_t>(rng.below(dist.s_max_));
  } else {
    std::vector<double> w(dist.s_max_);
    const double top = log_binomial(n, std::min(n / 2, dist.s_max_));
    double total = 0.0;
    for (std::size_t s = 1; s <= dist.s_max_; ++s) {
      w[s - 1] = std::exp(log_binomial(n, s) - top);
      total += w[s - 1];
    }
    double u = rng.uniform01() * total;
    size = dist.s_max_;
    for (std::size_t s = 1; s <= dist.s_max_; ++s) {
      u -= w[s - 1];
      if (u < 0.0) {
        size = s;
        break;
      }
    }
  }
  // Partial Fisher-Yates.
  std::vector<NodeId> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t i = 0; i < size; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(size);
  return NodeSet(std::move(pool));
}

}  // namespace glt
