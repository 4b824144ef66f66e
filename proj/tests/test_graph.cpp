#include "glt/error.hpp"
#include "glt/graph.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

using namespace glt;

TEST_CASE("bidirected triangle is stored child-major") {
  const Graph g = build_graph(3, {{0, 1}, {1, 0}, {0, 2}, {2, 0}, {1, 2}, {2, 1}});
  const std::vector<Edge> expected{{1, 0}, {2, 0}, {0, 1}, {2, 1}, {0, 2}, {1, 2}};
  CHECK(std::equal(g.edges().begin(), g.edges().end(), expected.begin(), expected.end()));
  CHECK(g.children_of_set(NodeSet{0, 1}) == NodeSet{2});
  CHECK(g.parents_of_set(NodeSet{0, 1}) == NodeSet{2});
}

TEST_CASE("edge order does not depend on input permutation") {
  std::vector<Edge> edges{{3, 1}, {0, 2}, {2, 3}, {1, 0}, {0, 3}, {3, 0}};
  const Graph reference = build_graph(4, edges);
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.parent, a.child) < std::tie(b.parent, b.child);
  });
  do {
    CHECK(build_graph(4, edges) == reference);
  } while (std::next_permutation(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.parent, a.child) < std::tie(b.parent, b.child);
  }));
}

TEST_CASE("neighbourhood queries") {
  SUBCASE("no edges") {
    const Graph g = build_graph(3, {});
    for (NodeId v = 0; v < 3; ++v) CHECK(g.parents(v).empty());
  }
  SUBCASE("star of in-degree m") {
    const int m = 4;
    std::vector<Edge> edges;
    for (int i = 0; i < m; ++i) edges.push_back({i, m});
    const Graph g = build_graph(m + 1, edges);
    CHECK(g.parents(m) == NodeSet{0, 1, 2, 3});
    CHECK(g.children(m).empty());
    CHECK(g.in_offset(m) == 0);
    CHECK(g.in_degree(m) == 4);
  }
  SUBCASE("set neighbourhoods exclude the set") {
    const Graph g = build_graph(4, {{0, 1}, {1, 0}, {1, 2}, {2, 3}, {3, 1}});
    for (const NodeSet& s : {NodeSet{0}, NodeSet{0, 1}, NodeSet{1, 2, 3}, NodeSet{1, 3}}) {
      CHECK_FALSE(g.children_of_set(s).intersects(s));
      CHECK_FALSE(g.parents_of_set(s).intersects(s));
    }
  }
}

TEST_CASE("invalid graphs are rejected") {
  CHECK_THROWS_AS(build_graph(3, {{0, 0}}), Error);
  CHECK_THROWS_AS(build_graph(3, {{0, 1}, {0, 1}}), Error);
  CHECK_THROWS_AS(build_graph(3, {{0, 3}}), Error);
  CHECK_THROWS_AS(build_graph(2, {}).parents(5), Error);
}

TEST_CASE("connected Watts-Strogatz generator") {
  SUBCASE("p = 0 gives the ring lattice") {
    Rng rng(1);
    const Graph g = generate_cws(12, 4, 0.0, rng);
    for (NodeId v = 0; v < 12; ++v) {
      CHECK(g.in_degree(v) == 4);
      CHECK(g.parents(v) == NodeSet{(v + 10) % 12, (v + 11) % 12, (v + 1) % 12, (v + 2) % 12});
    }
  }
  SUBCASE("edge count and connectivity") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed);
      const Graph g = generate_cws(100, 10, 0.2, rng);
      CHECK(g.edge_count() == 1000);
      CHECK(g.weakly_connected());
      for (const Edge& e : g.edges()) CHECK(g.edge_index(e.child, e.parent).has_value());
    }
  }
  SUBCASE("preconditions") {
    Rng rng(3);
    CHECK_THROWS_AS(generate_cws(10, 3, 0.1, rng), Error);
    CHECK_THROWS_AS(generate_cws(4, 4, 0.1, rng), Error);
    CHECK_THROWS_AS(generate_cws(10, 4, 1.5, rng), Error);
  }
}

TEST_CASE("simplex weight sampling") {
  SUBCASE("support holds exactly") {
    Rng rng(11);
    const Graph g = generate_cws(50, 6, 0.3, rng);
    for (double d_max : {0.2, 1.0, 3.0}) {
      const auto w = sample_weights_simplex(g, d_max, rng);
      for (NodeId v = 0; v < 50; ++v) {
        double total = 0.0;
        for (std::size_t j = 0; j < g.in_degree(v); ++j) {
          CHECK(w[g.in_offset(v) + j] >= 0.0);
          total += w[g.in_offset(v) + j];
        }
        CHECK(total <= d_max);
      }
    }
  }
  SUBCASE("marginal means match the flat Dirichlet") {
    // Single parent: Uniform(0, d_max), mean d_max / 2, sd d_max / sqrt(12).
    // m parents: each weight has mean d_max / (m + 1) and variance
    // d_max^2 m / ((m + 1)^2 (m + 2)).
    Rng rng(5);
    for (int m : {1, 3}) {
      std::vector<Edge> edges;
      for (int i = 0; i < m; ++i) edges.push_back({i, m});
      const Graph g = build_graph(static_cast<std::size_t>(m + 1), edges);
      const double d_max = 0.8;
      const int draws = 100000;
      double sum = 0.0;
      for (int i = 0; i < draws; ++i) sum += sample_weights_simplex(g, d_max, rng)[0];
      const double mean = d_max / (m + 1);
      const double sd = d_max * std::sqrt(m / ((m + 1.0) * (m + 1.0) * (m + 2.0)));
      CHECK(std::abs(sum / draws - mean) < 3.0 * sd / std::sqrt(draws));
    }
  }
}

TEST_CASE("seed sampling") {
  const Graph g = build_graph(5, {});
  SUBCASE("point mass") {
    const auto dist = SeedDistribution::explicit_support({{NodeSet{0, 1}, 1.0}});
    Rng rng(2);
    for (int i = 0; i < 100; ++i) CHECK(sample_seed(dist, g, rng) == NodeSet{0, 1});
  }
  SUBCASE("singletons are uniform") {
    const auto dist = SeedDistribution::uniform_by_size(1);
    Rng rng(4);
    std::vector<double> counts(5, 0.0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
      const NodeSet s = sample_seed(dist, g, rng);
      REQUIRE(s.size() == 1);
      counts[static_cast<std::size_t>(s[0])] += 1.0;
    }
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - draws / 5.0) * (c - draws / 5.0) / (draws / 5.0);
    CHECK(chi2 < 13.277);  // chi-square(4) 99% quantile
  }
  SUBCASE("never empty, sizes within range") {
    for (SeedLaw law : {SeedLaw::SizeThenSubset, SeedLaw::UniformOverSets}) {
      const auto dist = SeedDistribution::uniform_by_size(3, law);
      Rng rng(9);
      for (int i = 0; i < 2000; ++i) {
        const NodeSet s = sample_seed(dist, g, rng);
        CHECK(!s.empty());
        CHECK(s.size() <= 3);
      }
    }
  }
  SUBCASE("uniform over sets weights sizes by their counts") {
    // Sets of size 1, 2 on 5 nodes: 5 and 10, so size 2 has probability 2/3.
    const auto dist = SeedDistribution::uniform_by_size(2, SeedLaw::UniformOverSets);
    Rng rng(10);
    const int draws = 30000;
    int pairs = 0;
    for (int i = 0; i < draws; ++i) pairs += sample_seed(dist, g, rng).size() == 2 ? 1 : 0;
    const double se = std::sqrt(2.0 / 9.0 / draws);
    CHECK(std::abs(pairs / static_cast<double>(draws) - 2.0 / 3.0) < 4.0 * se);
  }
  SUBCASE("expansion sums to one") {
    const auto sets = SeedDistribution::uniform_by_size(2).expand(g, 1000);
    CHECK(sets.size() == 15);
    double total = 0.0;
    for (const auto& [s, p] : sets) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sets.front().second == doctest::Approx(0.5 / 5));
  }
  SUBCASE("invalid distributions") {
    CHECK_THROWS_AS(SeedDistribution::explicit_support({}), Error);
    CHECK_THROWS_AS(SeedDistribution::explicit_support({{NodeSet{}, 1.0}}), Error);
    CHECK_THROWS_AS(SeedDistribution::explicit_support({{NodeSet{1}, 0.4}}), Error);
    Rng rng(1);
    CHECK_THROWS_AS(sample_seed(SeedDistribution::uniform_by_size(6), g, rng), Error);
  }
}

TEST_CASE("rng streams are reproducible and keyed") {
  Rng a = Rng::derive(7, {1, 2});
  Rng b = Rng::derive(7, {1, 2});
  Rng c = Rng::derive(7, {2, 1});
  bool differs = false;
  for (int i = 0; i < 10; ++i) {
    const auto x = a();
    CHECK(x == b());
    differs = differs || x != c();
  }
  CHECK(differs);
  CHECK(subseed(1, "graph") != subseed(1, "traces"));
  CHECK(subseed(1, "graph") == subseed(1, "graph"));
}
