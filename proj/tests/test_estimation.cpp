#include "glt/error.hpp"
#include "glt/estimation.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace glt;

namespace {

Trace make_trace(std::vector<NodeSet> steps) { return Trace{std::move(steps)}; }

double sequential_sum(const std::vector<double>& w) { return std::accumulate(w.begin(), w.end(), 0.0); }

NodeData bernoulli_data(int exposures, int activations) {
  const Graph g = build_graph(2, {{0, 1}});
  std::vector<Trace> traces;
  for (int i = 0; i < exposures; ++i) {
    traces.push_back(i < activations ? make_trace({NodeSet{0}, NodeSet{1}}) : make_trace({NodeSet{0}}));
  }
  return build_node_data(traces, g, 1);
}

std::vector<Trace> simulate_many(const GltModel& m, int count, std::size_t s_max, Rng& rng) {
  const auto dist = SeedDistribution::uniform_by_size(s_max);
  std::vector<Trace> out;
  for (int i = 0; i < count; ++i) out.push_back(simulate_trace(m, sample_seed(dist, m.graph(), rng), rng));
  return out;
}

void check_feasible(const NodeFitResult& fit) {
  for (double w : fit.weights) CHECK(w >= fit.epsilon);
  CHECK(sequential_sum(fit.weights) <= fit.gamma);
}

}  // namespace

TEST_CASE("projection onto the truncated set") {
  Rng rng(3);
  for (int rep = 0; rep < 500; ++rep) {
    const int m = 1 + static_cast<int>(rng.below(6));
    const double eps = 1e-3;
    const double gamma = 0.5 + rng.uniform01();
    Eigen::VectorXd x(m);
    for (int i = 0; i < m; ++i) x[i] = 2.0 * rng.uniform01() - 0.5;
    const Eigen::VectorXd p = project_onto_truncated_set(x, eps, gamma);
    std::vector<double> pv(p.data(), p.data() + m);
    CHECK(sequential_sum(pv) <= gamma);
    CHECK(p.minCoeff() >= eps);
    CHECK((project_onto_truncated_set(p, eps, gamma) - p).cwiseAbs().maxCoeff() < 1e-12);
    // Variational inequality against random feasible points.
    for (int k = 0; k < 10; ++k) {
      Eigen::VectorXd y(m);
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += (y[i] = rng.exponential());
      y = eps + (y.array() * ((gamma - m * eps) * rng.uniform01() / s));
      CHECK((x - p).dot(y - p) <= 1e-10);
    }
  }
  CHECK_THROWS_AS(project_onto_truncated_set(Eigen::VectorXd::Zero(3), 0.5, 1.0), Error);
}

TEST_CASE("Bernoulli fits") {
  SUBCASE("interior maximum") {
    const NodeFitResult fit = fit_node(bernoulli_data(10, 4), make_uniform());
    CHECK(fit.converged);
    CHECK(fit.weights[0] == doctest::Approx(0.4).epsilon(1e-9));
    CHECK(fit.kkt_residual <= 1e-8);
    CHECK(fit.n_obs == 10);
    CHECK(fit.log_likelihood == doctest::Approx(4 * std::log(0.4) + 6 * std::log(0.6)));
  }
  SUBCASE("exponential thresholds invert the cdf") {
    const NodeFitResult fit = fit_node(bernoulli_data(10, 4), make_exponential_unit());
    CHECK(fit.weights[0] == doctest::Approx(-std::log(0.6)).epsilon(1e-9));
  }
  SUBCASE("no activations puts the weight on the lower bound") {
    const NodeFitResult fit = fit_node(bernoulli_data(10, 0), make_uniform());
    CHECK(fit.converged);
    CHECK(fit.weights[0] == 1e-6);
  }
  SUBCASE("all activations puts the weight on the upper bound") {
    const NodeFitResult fit = fit_node(bernoulli_data(10, 10), make_uniform());
    CHECK(fit.converged);
    CHECK(fit.weights[0] == doctest::Approx(1.0 - 1e-6));
    check_feasible(fit);
  }
  SUBCASE("no data") {
    const Graph g = build_graph(2, {{0, 1}});
    CHECK_THROWS_AS(fit_node(build_node_data(std::vector<Trace>{}, g, 1), make_uniform()), Error);
  }
}

TEST_CASE("fits agree with grid search on three-parent nodes") {
  // A 3-parent star fed by seeds of every size, so all directions are identified.
  const Graph g = build_graph(4, {{0, 3}, {1, 3}, {2, 3}});
  Rng rng(7);
  for (const ThresholdSpec& spec : {make_uniform(), make_exponential_unit(), make_beta(2, 2)}) {
    const double scale = std::isfinite(spec.support_bound()) ? 1.0 : 2.0;
    const GltModel truth(g, {0.15 * scale, 0.3 * scale, 0.25 * scale}, std::vector<ThresholdSpec>(4, spec));
    std::vector<Trace> traces;
    for (int i = 0; i < 300; ++i) {
      NodeSet seeds;
      while (seeds.empty()) {
        for (NodeId u = 0; u < 3; ++u) {
          if (rng.uniform01() < 0.5) seeds = seeds.with(u);
        }
      }
      traces.push_back(simulate_trace(truth, seeds, rng));
    }
    const NodeData d = build_node_data(traces, g, 3);
    FitOptions options;
    const NodeFitResult fit = fit_node(d, spec, options);
    CHECK(fit.converged);
    check_feasible(fit);
    const NodeObjective obj(d, spec);
    const Eigen::VectorXd grid = oracle::grid_argmax([&](const Eigen::VectorXd& x) { return obj.value(x); },
                                                     3, options.epsilon, fit.gamma, 0.005);
    for (int i = 0; i < 3; ++i) CHECK_MESSAGE(std::abs(fit.weights[static_cast<std::size_t>(i)] - grid[i]) <= 0.01, spec.describe());
    CHECK(fit.log_likelihood >= obj.value(grid) - 1e-9);
  }
}

TEST_CASE("fit_all marks nodes without data and is order invariant") {
  Rng rng(12);
  const Graph g = generate_cws(30, 4, 0.2, rng);
  const GltModel truth(g, sample_weights_simplex(g, 1.0, rng), std::vector<ThresholdSpec>(30));
  auto traces = simulate_many(truth, 400, 5, rng);
  const std::vector<ThresholdSpec> specs(30, make_uniform());
  const auto fits = fit_all(traces, g, specs, {}, 2);
  for (const auto& fit : fits) {
    if (fit.status == FitStatus::Converged) check_feasible(fit);
    CHECK(fit.status != FitStatus::Failed);
  }
  std::reverse(traces.begin(), traces.end());
  const auto again = fit_all(traces, g, specs, {}, 1);
  for (std::size_t v = 0; v < fits.size(); ++v) CHECK(fits[v].weights == again[v].weights);

  const std::vector<Trace> sparse{make_trace({NodeSet{0}})};
  const auto partial = fit_all(sparse, g, specs);
  int estimated = 0;
  for (const auto& fit : partial) {
    if (fit.status == FitStatus::NotEstimated) continue;
    ++estimated;
    CHECK(g.parents(fit.node).contains(0));
  }
  CHECK(estimated == static_cast<int>(g.children(0).size()));
}

TEST_CASE("threshold grid search") {
  Rng rng(19);
  const Graph g = build_graph(4, {{0, 3}, {1, 3}, {2, 3}});
  const GltModel truth(g, {0.2, 0.3, 0.3}, std::vector<ThresholdSpec>(4, make_beta(1, 3)));
  std::vector<Trace> traces;
  for (int i = 0; i < 500; ++i) traces.push_back(simulate_trace(truth, NodeSet{static_cast<NodeId>(rng.below(3))}.with(static_cast<NodeId>(rng.below(3))), rng));
  const NodeData d = build_node_data(traces, g, 3);
  const std::vector<double> alphas{1};
  const std::vector<double> betas{1, 2, 3, 4, 5};
  const auto grid = beta_grid(alphas, betas);
  const NodeFitResult best = fit_with_threshold_grid(d, grid);
  REQUIRE(best.grid_log_likelihoods.size() == 5);
  for (const auto& [spec, ll] : best.grid_log_likelihoods) CHECK(best.log_likelihood >= ll);
  const std::vector<ThresholdSpec> single{make_beta(1, 2)};
  const NodeFitResult one = fit_with_threshold_grid(d, single);
  const NodeFitResult direct = fit_node(d, make_beta(1, 2));
  CHECK(one.weights == direct.weights);
  CHECK(one.log_likelihood == direct.log_likelihood);
  // Ties go to the earliest grid point.
  const std::vector<ThresholdSpec> twice{make_beta(1, 2), make_beta(1, 2)};
  CHECK(fit_with_threshold_grid(d, twice).grid_log_likelihoods.size() == 2);
  CHECK_THROWS_AS(fit_with_threshold_grid(d, std::vector<ThresholdSpec>{}), Error);
}

TEST_CASE("non-log-concave thresholds are fitted with a warning") {
  const NodeFitResult fit = fit_node(bernoulli_data(20, 5), ThresholdSpec::beta(0.5, 2));
  CHECK(fit.local_only);
  CHECK(fit.message.find("local") != std::string::npos);
}

TEST_CASE("baselines") {
  const Graph star = build_graph(3, {{0, 2}, {1, 2}});
  CHECK(baseline_wc(star) == std::vector<double>{0.5, 0.5});
  SUBCASE("PTP ratios") {
    // Node 0 always precedes 2; node 1 is active in two traces, once before 2.
    const std::vector<Trace> traces{make_trace({NodeSet{0}, NodeSet{2}}),
                                    make_trace({NodeSet{0, 1}, NodeSet{2}}),
                                    make_trace({NodeSet{1}})};
    const auto w = baseline_ptp(traces, star);
    // Ratios 1 and 1/2, normalised.
    CHECK(w[0] == doctest::Approx(2.0 / 3.0));
    CHECK(w[1] == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("PTP falls back to uniform and always sums to one") {
    Rng rng(4);
    const Graph g = generate_cws(20, 4, 0.3, rng);
    const GltModel m(g, sample_weights_simplex(g, 0.5, rng), std::vector<ThresholdSpec>(20));
    const auto w = baseline_ptp(simulate_many(m, 30, 2, rng), g);
    for (NodeId v = 0; v < 20; ++v) {
      double total = 0.0;
      for (std::size_t j = 0; j < g.in_degree(v); ++j) total += w[g.in_offset(v) + j];
      CHECK(total == doctest::Approx(1.0));
    }
    const std::vector<Trace> none{make_trace({NodeSet{2}})};
    CHECK(baseline_ptp(none, star) == std::vector<double>{0.5, 0.5});
  }
}
