#include "glt/diagnostics.hpp"
#include "glt/error.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace glt;

namespace {

SeedDistribution support_of(std::vector<NodeSet> sets) {
  std::vector<std::pair<NodeSet, double>> s;
  for (auto& set : sets) s.emplace_back(std::move(set), 1.0 / static_cast<double>(sets.size()));
  return SeedDistribution::explicit_support(std::move(s));
}

const NodeIdentifiability& verdict_for(const IdentifiabilityReport& r, NodeId v) {
  const auto it = std::find_if(r.nodes.begin(), r.nodes.end(), [&](const auto& n) { return n.node == v; });
  REQUIRE(it != r.nodes.end());
  return *it;
}

// Piecewise-linear cdf through the given knots on [0, 1].
std::function<double(double)> piecewise(std::vector<std::pair<double, double>> knots) {
  return [knots](double x) {
    if (x <= knots.front().first) return knots.front().second;
    for (std::size_t i = 1; i < knots.size(); ++i) {
      if (x <= knots[i].first) {
        const auto [x0, y0] = knots[i - 1];
        const auto [x1, y1] = knots[i];
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
      }
    }
    return knots.back().second;
  };
}

// Star with parents 0..m-1 and child m.
Graph star(int m) {
  std::vector<Edge> edges;
  for (NodeId u = 0; u < m; ++u) edges.push_back({u, m});
  return build_graph(static_cast<std::size_t>(m + 1), edges);
}

}  // namespace

TEST_CASE("exact rank and determinant") {
  CHECK(exact_rank({{1, 1}, {0, 1}}) == 2);
  CHECK(exact_rank({{1, 1}, {1, 1}}) == 1);
  CHECK(exact_rank({{0, 0, 0}}) == 0);
  CHECK(exact_determinant({{1, 1}, {0, 1}}) == 1);
  CHECK(exact_determinant({{0, 1}, {1, 0}}) == -1);
  Rng rng(3);
  for (int rep = 0; rep < 300; ++rep) {
    const int n = 1 + static_cast<int>(rng.below(6));
    std::vector<std::vector<int>> x(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(n)));
    Eigen::MatrixXd d(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) d(i, j) = x[i][j] = rng.uniform01() < 0.5 ? 1 : 0;
    }
    // Determinants of 0/1 matrices this small are exact in double after rounding.
    const double reference = std::round(d.determinant());
    CHECK(exact_determinant(x) == static_cast<long long>(reference));
    CHECK(exact_rank(x) == static_cast<std::size_t>(Eigen::FullPivLU<Eigen::MatrixXd>(d).rank()));
  }
}

TEST_CASE("identifiability on the two-parent star") {
  const Graph g = star(2);
  SUBCASE("both parents always seeded together") {
    const auto r = check_identifiability(g, support_of({NodeSet{0, 1}}));
    const auto& v = verdict_for(r, 2);
    CHECK(v.verdict == IdentifiabilityVerdict::NotIdentifiable);
    CHECK(v.rank_deficiency == 1);
    CHECK(v.achievable == std::vector<NodeSet>{NodeSet{0, 1}});
  }
  SUBCASE("a single parent and the pair") {
    const auto r = check_identifiability(g, support_of({NodeSet{0}, NodeSet{0, 1}}));
    const auto& v = verdict_for(r, 2);
    CHECK(v.verdict == IdentifiabilityVerdict::Identifiable);
    CHECK(v.matrix == std::vector<std::vector<int>>{{1, 1}, {0, 1}});
    CHECK(exact_determinant(v.matrix) != 0);
  }
  SUBCASE("seed containing the child gives nothing") {
    const auto r = check_identifiability(g, support_of({NodeSet{2}}));
    CHECK(verdict_for(r, 2).verdict == IdentifiabilityVerdict::NotIdentifiable);
    CHECK(verdict_for(r, 2).rank_deficiency == 2);
  }
}

TEST_CASE("an unreachable parent leaves a zero row") {
  // Node 1 is never seeded and has no parents of its own.
  const Graph g = build_graph(4, {{0, 2}, {1, 2}, {0, 3}});
  const auto r = check_identifiability(g, support_of({NodeSet{0}}));
  const auto& v = verdict_for(r, 2);
  CHECK(v.verdict == IdentifiabilityVerdict::NotIdentifiable);
  CHECK(v.message.find("parent 1") != std::string::npos);
  CHECK(verdict_for(r, 3).verdict == IdentifiabilityVerdict::Identifiable);
}

TEST_CASE("subsets achieved at different times combine") {
  // Seed {0}; node 1 activates at t = 1 while node 2 waits.
  const Graph g = build_graph(3, {{0, 1}, {0, 2}, {1, 2}});
  const auto r = check_identifiability(g, support_of({NodeSet{0}}));
  const auto& v = verdict_for(r, 2);
  CHECK(v.verdict == IdentifiabilityVerdict::Identifiable);
  CHECK(std::find(v.witnesses.begin(), v.witnesses.end(), NodeSet{1}) != v.witnesses.end());
}

TEST_CASE("uniform seeds identify every node with parents") {
  Rng rng(6);
  const Graph g = generate_cws(12, 4, 0.2, rng);
  const auto r = check_identifiability(g, SeedDistribution::uniform_by_size(2), 1'000'000, 2);
  CHECK(r.nodes.size() == 12);
  CHECK(r.all_identifiable());
}

TEST_CASE("enlarging the seed support never loses identifiability") {
  Rng rng(17);
  for (int rep = 0; rep < 40; ++rep) {
    const Graph g = oracle::random_graph(6, 0.3, rng);
    std::vector<NodeSet> small{NodeSet{static_cast<NodeId>(rng.below(6))}};
    std::vector<NodeSet> large = small;
    for (int k = 0; k < 3; ++k) {
      NodeSet s{static_cast<NodeId>(rng.below(6))};
      if (rng.uniform01() < 0.5) s = s.with(static_cast<NodeId>(rng.below(6)));
      large.push_back(s);
    }
    const auto a = check_identifiability(g, support_of(small));
    const auto b = check_identifiability(g, support_of(large));
    REQUIRE(a.nodes.size() == b.nodes.size());
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
      CHECK(b.nodes[i].rank >= a.nodes[i].rank);
      if (a.nodes[i].verdict == IdentifiabilityVerdict::Identifiable) {
        CHECK(b.nodes[i].verdict == IdentifiabilityVerdict::Identifiable);
      }
    }
  }
}

TEST_CASE("state cap yields an unknown verdict") {
  const Graph g = build_graph(5, {{0, 1}, {0, 2}, {0, 3}, {1, 4}, {2, 4}, {3, 4}});
  const auto r = check_identifiability(g, support_of({NodeSet{0}}), 3);
  CHECK(verdict_for(r, 4).verdict == IdentifiabilityVerdict::Unknown);
  const auto full = check_identifiability(g, support_of({NodeSet{0}}));
  CHECK(verdict_for(full, 4).verdict == IdentifiabilityVerdict::Identifiable);
}

TEST_CASE("concave thresholds give submodular spread") {
  Rng rng(23);
  const std::vector<ThresholdSpec> families{make_uniform(), make_exponential_unit(), make_beta(1, 2)};
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 5 + rng.below(4);
    const Graph g = oracle::random_graph(n, 0.3, rng);
    const std::vector<ThresholdSpec> specs(n, families[static_cast<std::size_t>(rep) % 3]);
    const GltModel m(g, oracle::random_weights(g, specs, 0.95, 3.0, rng), specs);
    CHECK(check_submodularity_exact(m, n).empty());
    CHECK(check_monotonicity_exact(m, n).empty());
  }
}

TEST_CASE("a convex cdf breaks submodularity on the three-parent star") {
  // Weights (x, y - x, b) with x = 0.1, y = 0.5, b = 0.3 and F(x) = x^2.
  const GltModel m(star(3), {0.1, 0.4, 0.3}, std::vector<ThresholdSpec>(4, make_beta(2, 1)));
  const auto violations = check_submodularity_exact(m, 3);
  REQUIRE_FALSE(violations.empty());
  const bool engineered = std::any_of(violations.begin(), violations.end(), [](const auto& v) {
    return v.smaller == NodeSet{0} && v.larger == NodeSet{0, 1} && v.added == 2;
  });
  CHECK(engineered);
  for (const auto& v : violations) CHECK(v.gain_smaller < v.gain_larger);
  CHECK(check_monotonicity_exact(m, 3).empty());
}

TEST_CASE("star violations match the cdf increment inequality") {
  Rng rng(29);
  for (const ThresholdSpec& spec : {make_beta(2, 1), make_beta(3, 1), make_beta(2, 2), make_uniform(), make_beta(1, 3)}) {
    for (int rep = 0; rep < 10; ++rep) {
      const std::vector<double> w = oracle::random_weights(star(3), std::vector<ThresholdSpec>(4, spec), 0.95, 3.0, rng);
      const GltModel m(star(3), w, std::vector<ThresholdSpec>(4, spec));
      // Direct scan of F(B(S') + b_u) - F(B(S')) >= F(B(S) + b_u) - F(B(S)).
      bool fails = false;
      for (unsigned s = 1; s < 8; ++s) {
        for (unsigned sub = (s - 1) & s;; sub = (sub - 1) & s) {
          for (unsigned u = 0; u < 3; ++u) {
            if (s & (1u << u)) continue;
            double x = 0.0;
            double y = 0.0;
            for (unsigned i = 0; i < 3; ++i) {
              if (sub & (1u << i)) x += w[i];
              if (s & (1u << i)) y += w[i];
            }
            const double lhs = spec.cdf(x + w[u]) - spec.cdf(x);
            const double rhs = spec.cdf(y + w[u]) - spec.cdf(y);
            fails = fails || lhs < rhs - 1e-9;
          }
          if (sub == 0) break;
        }
      }
      CHECK_MESSAGE(fails == !check_submodularity_exact(m, 3).empty(), spec.describe());
    }
  }
}

TEST_CASE("submodularity check refuses large graphs") {
  Rng rng(1);
  const Graph g = generate_cws(14, 4, 0.1, rng);
  const GltModel m(g, sample_weights_simplex(g, 0.5, rng), std::vector<ThresholdSpec>(14));
  CHECK_THROWS_AS(check_submodularity_exact(m, 2), Error);
}

TEST_CASE("triggering embedding of a three-parent node") {
  const std::array<double, 3> equal{1.0 / 3, 1.0 / 3, 1.0 / 3};
  SUBCASE("no triggering distribution exists") {
    const auto f = piecewise({{0.0, 0.0}, {1.0 / 3, 0.5}, {2.0 / 3, 0.85}, {1.0, 1.0}});
    const TriggeringEmbedding e = solve_triggering_embedding(equal, f);
    CHECK(std::abs(e.probabilities[7] + 0.05) <= 1e-12);
    CHECK_FALSE(e.feasible);
    CHECK(e.most_negative_subset == NodeSet{0, 1, 2});
    double total = 0.0;
    for (double p : e.probabilities) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("linear thresholds pick one parent with probability equal to its weight") {
    const GltModel m(star(3), {0.2, 0.3, 0.4}, std::vector<ThresholdSpec>(4, make_uniform()));
    const TriggeringEmbedding e = solve_triggering_embedding(m, 3);
    CHECK(e.feasible);
    CHECK(e.probabilities[0] == doctest::Approx(0.1));
    CHECK(e.probabilities[1] == doctest::Approx(0.2));
    CHECK(e.probabilities[2] == doctest::Approx(0.3));
    CHECK(e.probabilities[4] == doctest::Approx(0.4));
    for (unsigned t : {3u, 5u, 6u, 7u}) CHECK(std::abs(e.probabilities[t]) < 1e-12);
    CHECK(e.residual < 1e-12);
  }
  SUBCASE("wrong in-degree") {
    const GltModel m(star(2), {0.2, 0.3}, std::vector<ThresholdSpec>(3, make_uniform()));
    CHECK_THROWS_AS(solve_triggering_embedding(m, 2), Error);
  }
}
