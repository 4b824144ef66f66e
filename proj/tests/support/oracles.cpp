#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

double ic_trace_probability(const Graph& graph, std::span<const double> p, const Trace& trace) {
  const std::size_t n = graph.node_count();
  std::vector<char> active(n, 0);
  for (NodeId v : trace.steps.front()) active[static_cast<std::size_t>(v)] = 1;
  double prob = 1.0;
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    const NodeSet next = t + 1 < trace.steps.size() ? trace.steps[t + 1] : NodeSet{};
    for (std::size_t v = 0; v < n; ++v) {
      if (active[v]) continue;
      double miss = 1.0;
      bool exposed = false;
      for (const auto& e : graph.edges()) {
        if (static_cast<std::size_t>(e.child) != v || !trace.steps[t].contains(e.parent)) continue;
        exposed = true;
        miss *= 1.0 - p[*graph.edge_index(e.parent, e.child)];
      }
      const bool hit = next.contains(static_cast<NodeId>(v));
      if (!exposed) {
        if (hit) return 0.0;
        continue;
      }
      prob *= hit ? 1.0 - miss : miss;
    }
    for (NodeId v : next) active[static_cast<std::size_t>(v)] = 1;
  }
  return prob;
}

Graph random_graph(std::size_t n, double q, Rng& rng) {
  std::vector<glt::Edge> edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (u != v && rng.uniform01() < q) {
        edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v)});
      }
    }
  }
  return glt::build_graph(n, std::move(edges));
}

Graph random_bipartite(std::size_t parents, std::size_t children, double q, Rng& rng) {
  std::vector<glt::Edge> edges;
  for (std::size_t c = 0; c < children; ++c) {
    const auto child = static_cast<NodeId>(parents + c);
    bool any = false;
    for (std::size_t u = 0; u < parents; ++u) {
      if (rng.uniform01() < q) {
        edges.push_back({static_cast<NodeId>(u), child});
        any = true;
      }
    }
    if (!any) edges.push_back({static_cast<NodeId>(rng.below(parents)), child});
  }
  return glt::build_graph(parents + children, std::move(edges));
}

std::vector<double> random_weights(const Graph& graph, const std::vector<glt::ThresholdSpec>& specs,
                                   double fraction, double infinite_cap, Rng& rng) {
  std::vector<double> w(graph.edge_count());
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    const auto node = static_cast<NodeId>(v);
    const std::size_t m = graph.in_degree(node);
    if (m == 0) continue;
    const double h = specs[v].support_bound();
    const double cap = fraction * (std::isfinite(h) ? h : infinite_cap);
    std::vector<double> raw(m + 1);
    double total = 0.0;
    for (double& r : raw) {
      r = -std::log(rng.uniform01());
      total += r;
    }
    for (std::size_t j = 0; j < m; ++j) w[graph.in_offset(node) + j] = cap * raw[j] / total;
  }
  return w;
}

double spread_by_enumeration(const GltModel& model, const NodeSet& seeds) {
  double total = 0.0;
  for (const Trace& trace : glt::enumerate_feasible_traces(model.graph(), seeds)) {
    double log_p = 0.0;
    try {
      log_p = glt::trace_log_probability(model, trace);
    } catch (const std::exception&) {
      continue;  // zero-probability trace
    }
    total += std::exp(log_p) * static_cast<double>(trace.active_set().size());
  }
  return total;
}

namespace {

using Lattice = std::vector<long>;

struct Search {
  const std::function<double(const Eigen::VectorXd&)>& f;
  int m;
  double epsilon;
  double gamma;
  double step;
  long limit;  // largest total of lattice units that stays feasible
  Lattice best;
  double best_value = -std::numeric_limits<double>::infinity();

  Eigen::VectorXd point(const Lattice& k) const {
    Eigen::VectorXd x(m);
    for (int i = 0; i < m; ++i) x[i] = epsilon + static_cast<double>(k[static_cast<std::size_t>(i)]) * step;
    return x;
  }

  bool feasible(const Lattice& k) const {
    long total = 0;
    for (long v : k) {
      if (v < 0) return false;
      total += v;
    }
    return total <= limit;
  }

  void consider(const Lattice& k) {
    if (!feasible(k)) return;
    const double value = f(point(k));
    if (value > best_value) {
      best_value = value;
      best = k;
    }
  }

  // All lattice points k with lo_i <= k_i <= hi_i, k_i = multiple of stride.
  void scan(const Lattice& lo, const Lattice& hi, long stride, Lattice& k, int i) {
    if (i == m) {
      consider(k);
      return;
    }
    const auto idx = static_cast<std::size_t>(i);
    long total = 0;
    for (int j = 0; j < i; ++j) total += k[static_cast<std::size_t>(j)];
    for (long v = lo[idx]; v <= hi[idx] && total + v <= limit; v += stride) {
      k[idx] = v;
      scan(lo, hi, stride, k, i + 1);
    }
  }
};

}  // namespace

Eigen::VectorXd grid_argmax(const std::function<double(const Eigen::VectorXd&)>& f, int m,
                            double epsilon, double gamma, double step) {
  Search s{f, m, epsilon, gamma, step, 0, Lattice(static_cast<std::size_t>(m), 0)};
  s.limit = static_cast<long>(std::floor((gamma - m * epsilon) / step + 1e-9));
  while (s.limit >= 0) {
    Lattice probe(static_cast<std::size_t>(m), 0);
    probe[0] = s.limit;
    double total = 0.0;
    for (double x : s.point(probe)) total += x;
    if (total <= gamma) break;
    --s.limit;
  }
  std::vector<long> strides{1};
  while (strides.back() * 5 * 20 <= s.limit) strides.push_back(strides.back() * 5);
  std::reverse(strides.begin(), strides.end());

  Lattice k(static_cast<std::size_t>(m), 0);
  Lattice lo(static_cast<std::size_t>(m), 0);
  Lattice hi(static_cast<std::size_t>(m), s.limit);
  s.scan(lo, hi, strides.front(), k, 0);
  for (std::size_t level = 1; level < strides.size(); ++level) {
    const long radius = 2 * strides[level - 1];
    const long stride = strides[level];
    for (int i = 0; i < m; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      lo[idx] = std::max(0L, (s.best[idx] - radius) / stride * stride);
      hi[idx] = s.best[idx] + radius;
    }
    s.scan(lo, hi, stride, k, 0);
  }
  // Hill climb on the finest lattice, including moves along the sum face.
  for (bool improved = true; improved;) {
    improved = false;
    const Lattice centre = s.best;
    for (int i = 0; i < m; ++i) {
      for (int j = -1; j < m; ++j) {
        for (long sign : {-1L, 1L}) {
          Lattice cand = centre;
          cand[static_cast<std::size_t>(i)] += sign;
          if (j >= 0 && j != i) cand[static_cast<std::size_t>(j)] -= sign;
          const double before = s.best_value;
          s.consider(cand);
          if (s.best_value > before) improved = true;
        }
      }
    }
  }
  return s.point(s.best);
}

Eigen::VectorXd finite_difference_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                           const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd up = x;
    Eigen::VectorXd down = x;
    up[i] += h;
    down[i] -= h;
    g[i] = (f(up) - f(down)) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd finite_difference_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& g, const Eigen::VectorXd& x,
    double h) {
  const Eigen::Index m = x.size();
  Eigen::MatrixXd jac(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::VectorXd up = x;
    Eigen::VectorXd down = x;
    up[i] += h;
    down[i] -= h;
    jac.col(i) = (g(up) - g(down)) / (2.0 * h);
  }
  return jac;
}

double relative_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace oracle
