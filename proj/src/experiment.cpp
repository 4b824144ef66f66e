#include "glt/experiment.hpp"

#include "glt/error.hpp"
#include "glt/inference.hpp"
#include "glt/influence.hpp"
#include "glt/likelihood.hpp"
#include "glt/metrics.hpp"
#include "glt/model.hpp"
#include "glt/parallel.hpp"
#include "glt/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

namespace glt {

void Table::add(std::vector<std::string> row) {
  if (row.size() != columns.size()) {
    throw Error(ErrorKind::InvalidArgument, "row width does not match the header",
                {{"expected", columns.size()}, {"got", row.size()}});
  }
  rows.push_back(std::move(row));
}

std::size_t Table::column_index(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) {
    throw Error(ErrorKind::InvalidArgument, "unknown column", {{"column", std::string(name)}});
  }
  return static_cast<std::size_t>(it - columns.begin());
}

const std::string& Table::text(std::size_t row, std::string_view column) const {
  return rows.at(row).at(column_index(column));
}

double Table::number(std::size_t row, std::string_view column) const {
  const std::string& cell = text(row, column);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw Error(ErrorKind::Parse, "cell is not a number",
                {{"row", row}, {"column", std::string(column)}, {"cell", cell}});
  }
  return value;
}

std::string Table::to_csv() const {
  std::ostringstream out;
  auto write_row = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  };
  write_row(columns);
  for (const auto& row : rows) write_row(row);
  return out.str();
}

std::string format_number(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw Error(ErrorKind::Numerical, "cannot format number");
  return std::string(buffer, ptr);
}

namespace {

std::string num(double v) { return format_number(v); }
std::string num(std::size_t v) { return std::to_string(v); }

std::string join_nodes(const std::vector<NodeId>& nodes) {
  std::string out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(nodes[i]);
  }
  return out;
}

std::uint64_t stream_seed(std::uint64_t root, std::string_view label,
                          std::initializer_list<std::uint64_t> keys) {
  Rng rng = Rng::derive(subseed(root, label), keys);
  return rng();
}

Rng stream(std::uint64_t root, std::string_view label, std::initializer_list<std::uint64_t> keys) {
  return Rng::derive(subseed(root, label), keys);
}

void require_positive(std::size_t value, const char* field) {
  if (value == 0) throw Error(ErrorKind::InvalidArgument, "count must be positive", {{"field", field}});
}

template <typename T>
void require_nonempty(const std::vector<T>& values, const char* field) {
  if (values.empty()) throw Error(ErrorKind::InvalidArgument, "list must not be empty", {{"field", field}});
}

// Groups rows by `keys` (in first-appearance order) and summarises `value`.
Table summarise(const Table& raw, const std::vector<std::string>& keys, std::string_view value) {
  Table out;
  out.columns = keys;
  for (const char* c : {"count", "mean", "se", "two_se", "median"}) out.columns.emplace_back(c);
  std::vector<std::size_t> key_idx;
  for (const auto& k : keys) key_idx.push_back(raw.column_index(k));
  std::vector<std::vector<std::string>> order;
  std::map<std::vector<std::string>, std::vector<double>> groups;
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    std::vector<std::string> key;
    for (std::size_t i : key_idx) key.push_back(raw.rows[r][i]);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(raw.number(r, value));
  }
  for (const auto& key : order) {
    const auto& values = groups.at(key);
    const double se = standard_error(values);
    auto row = key;
    row.push_back(num(values.size()));
    row.push_back(num(mean(values)));
    row.push_back(num(se));
    row.push_back(num(2.0 * se));
    row.push_back(num(median(values)));
    out.add(std::move(row));
  }
  return out;
}

bool estimated(const NodeFitResult& fit) {
  return fit.status == FitStatus::Converged || fit.status == FitStatus::NotConverged;
}

// RMAE over the edges into nodes that were estimated.
double estimated_rmae(const Graph& graph, std::span<const double> truth, const GltModel& fitted,
                      std::span<const NodeFitResult> fits, std::size_t* edge_count) {
  std::vector<double> t;
  std::vector<double> e;
  const auto edges = graph.edges();
  const auto w = fitted.weights();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (!estimated(fits[static_cast<std::size_t>(edges[i].child)])) continue;
    t.push_back(truth[i]);
    e.push_back(w[i]);
  }
  if (edge_count) *edge_count = t.size();
  return rmae(t, e);
}

std::vector<ThresholdSpec> uniform_specs(std::size_t n, const ThresholdSpec& spec) {
  return std::vector<ThresholdSpec>(n, spec);
}

SeedDistribution seeds_of(const ExperimentConfig& c) {
  return SeedDistribution::uniform_by_size(c.s_max, c.seed_law);
}

std::size_t max_of(const std::vector<std::size_t>& v) { return *std::max_element(v.begin(), v.end()); }

struct Instance {
  Graph graph;
  GltModel model;
};

Instance make_instance(const ExperimentConfig& c, std::size_t n, std::size_t k, double d_max,
                       std::initializer_list<std::uint64_t> keys, const std::vector<ThresholdSpec>& thresholds) {
  Rng graph_rng = stream(c.seed, "graph", keys);
  Graph graph = generate_cws(n, k, c.rewiring, graph_rng);
  Rng weight_rng = stream(c.seed, "weights", keys);
  auto weights = sample_weights_simplex(graph, d_max, weight_rng);
  GltModel model(graph, std::move(weights), thresholds);
  return {std::move(graph), std::move(model)};
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"rmae-vs-n",  "rmae-vs-traces", "ci-coverage",
                                              "activation-prediction", "im-comparison", "spread-comparison"};
  return names;
}

ExperimentConfig default_experiment_config(std::string_view name) {
  ExperimentConfig c;
  c.experiment = std::string(name);
  if (name == "rmae-vs-n") {
    c.nodes = {50, 100, 200, 400};
    c.degrees = {10};
    c.traces = {2000};
  } else if (name == "rmae-vs-traces") {
    c.traces = {500, 1000, 2000, 4000};
    c.d_max = {0.2, 0.4, 0.6, 0.8, 1.0};
  } else if (name == "ci-coverage") {
    c.nodes = {30};
    c.degrees = {4};
    c.replications = 25;
  } else if (name == "activation-prediction") {
    c.degrees = {4};
    c.traces = {1500};
    c.s_max = 10;
    c.replications = 1;
    c.truth = ThresholdSpec::beta_fit_safe(2, 1);
    c.candidates = {ThresholdSpec::beta_fit_safe(2, 1), ThresholdSpec::beta_fit_safe(3, 1),
                    ThresholdSpec::uniform(), ThresholdSpec::exponential_unit()};
  } else if (name == "im-comparison") {
    c.replications = 10;
  } else if (name == "spread-comparison") {
    c.traces = {1000};
    c.s_max = 20;
    c.replications = 1;
    c.truth = ThresholdSpec::beta_fit_safe(2, 2);
    c.candidates = {ThresholdSpec::beta_fit_safe(2, 2), ThresholdSpec::beta_fit_safe(1, 2),
                    ThresholdSpec::beta_fit_safe(2, 1), ThresholdSpec::uniform()};
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown experiment", {{"experiment", std::string(name)}});
  }
  return c;
}

namespace {

template <typename T>
std::vector<T> list_of(const Json& doc, const char* key) {
  const Json& v = doc.at(key);
  if (!v.is_array()) throw Error(ErrorKind::Parse, "expected an array", {{"field", key}});
  return v.get<std::vector<T>>();
}

}  // namespace

ExperimentConfig experiment_config_from_json(const Json& doc, ExperimentConfig c) {
  if (!doc.is_object()) throw Error(ErrorKind::Parse, "experiment config must be an object");
  try {
    if (doc.contains("experiment")) c.experiment = doc.at("experiment").get<std::string>();
    if (doc.contains("seed")) c.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("threads")) c.threads = doc.at("threads").get<unsigned>();
    if (doc.contains("replications")) c.replications = doc.at("replications").get<std::size_t>();
    if (doc.contains("nodes")) c.nodes = list_of<std::size_t>(doc, "nodes");
    if (doc.contains("degrees")) c.degrees = list_of<std::size_t>(doc, "degrees");
    if (doc.contains("rewiring")) c.rewiring = doc.at("rewiring").get<double>();
    if (doc.contains("traces")) c.traces = list_of<std::size_t>(doc, "traces");
    if (doc.contains("d_max")) c.d_max = list_of<double>(doc, "d_max");
    if (doc.contains("s_max")) c.s_max = doc.at("s_max").get<std::size_t>();
    if (doc.contains("seed_law")) c.seed_law = seed_law_from_string(doc.at("seed_law").get<std::string>());
    if (doc.contains("truth")) c.truth = threshold_from_json(doc.at("truth"));
    if (doc.contains("candidates")) {
      c.candidates.clear();
      for (const auto& t : doc.at("candidates")) c.candidates.push_back(threshold_from_json(t));
    }
    if (doc.contains("beta_grid")) c.beta_grid = list_of<double>(doc, "beta_grid");
    if (doc.contains("truth_betas")) c.truth_betas = list_of<double>(doc, "truth_betas");
    if (doc.contains("budgets")) c.budgets = list_of<std::size_t>(doc, "budgets");
    if (doc.contains("mc_replicates")) c.mc_replicates = doc.at("mc_replicates").get<std::size_t>();
    if (doc.contains("fits_per_network")) c.fits_per_network = doc.at("fits_per_network").get<std::size_t>();
    if (doc.contains("test_size")) c.test_size = doc.at("test_size").get<std::size_t>();
    if (doc.contains("level")) c.level = doc.at("level").get<double>();
    if (doc.contains("epsilon")) c.fit.epsilon = doc.at("epsilon").get<double>();
    if (doc.contains("gamma")) c.fit.gamma = doc.at("gamma").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("invalid experiment config: ") + e.what());
  }
  return c;
}

Json experiment_config_to_json(const ExperimentConfig& c) {
  Json doc;
  doc["experiment"] = c.experiment;
  doc["seed"] = c.seed;
  doc["replications"] = c.replications;
  doc["nodes"] = c.nodes;
  doc["degrees"] = c.degrees;
  doc["rewiring"] = c.rewiring;
  doc["traces"] = c.traces;
  doc["d_max"] = c.d_max;
  doc["s_max"] = c.s_max;
  doc["seed_law"] = to_string(c.seed_law);
  doc["truth"] = threshold_to_json(c.truth);
  doc["candidates"] = Json::array();
  for (const auto& t : c.candidates) doc["candidates"].push_back(threshold_to_json(t));
  doc["beta_grid"] = c.beta_grid;
  doc["truth_betas"] = c.truth_betas;
  doc["budgets"] = c.budgets;
  doc["mc_replicates"] = c.mc_replicates;
  doc["fits_per_network"] = c.fits_per_network;
  doc["test_size"] = c.test_size;
  doc["level"] = c.level;
  doc["epsilon"] = c.fit.epsilon;
  if (c.fit.gamma) doc["gamma"] = *c.fit.gamma;
  return doc;
}

ExperimentResult run_rmae_study(const ExperimentConfig& c) {
  require_positive(c.replications, "replications");
  require_nonempty(c.nodes, "nodes");
  require_nonempty(c.degrees, "degrees");
  require_nonempty(c.traces, "traces");
  require_nonempty(c.d_max, "d_max");
  ExperimentResult result;
  result.raw.columns = {"n", "k", "d_max", "traces", "replication", "rmae", "estimated_nodes", "edges"};
  const std::size_t pool = max_of(c.traces);
  const auto seeds = seeds_of(c);
  for (std::size_t n : c.nodes) {
    for (std::size_t k : c.degrees) {
      for (std::size_t di = 0; di < c.d_max.size(); ++di) {
        for (std::size_t rep = 0; rep < c.replications; ++rep) {
          // Graph and weight direction are shared across d_max so that rows are matched.
          auto inst = make_instance(c, n, k, c.d_max[di], {n, k, rep}, uniform_specs(n, c.truth));
          const auto all = simulate_traces(inst.model, seeds, pool,
                                           stream_seed(c.seed, "traces", {n, k, di, rep}), c.threads);
          for (std::size_t count : c.traces) {
            std::span<const Trace> prefix(all.data(), count);
            const auto fits = fit_all(prefix, inst.graph, uniform_specs(n, c.truth), c.fit, c.threads);
            const auto fitted = assemble_model(inst.graph, fits, c.truth);
            std::size_t edges = 0;
            const double err = estimated_rmae(inst.graph, inst.model.weights(), fitted, fits, &edges);
            const auto nodes = static_cast<std::size_t>(std::count_if(fits.begin(), fits.end(), estimated));
            result.raw.add({num(n), num(k), num(c.d_max[di]), num(count), num(rep), num(err), num(nodes),
                            num(edges)});
          }
        }
      }
    }
  }
  result.summary = summarise(result.raw, {"n", "k", "d_max", "traces"}, "rmae");
  return result;
}

ExperimentResult run_ci_coverage(const ExperimentConfig& c) {
  require_positive(c.replications, "replications");
  ExperimentResult result;
  result.raw.columns = {"n",     "k",     "traces", "replication", "node",     "parent",  "truth",
                        "estimate", "stderr", "lower",  "upper",       "covered", "valid", "interior"};
  const auto seeds = seeds_of(c);
  const std::size_t n = c.nodes.at(0);
  const std::size_t k = c.degrees.at(0);
  const std::size_t count = c.traces.at(0);
  const double d_max = c.d_max.at(0);
  for (std::size_t rep = 0; rep < c.replications; ++rep) {
    auto inst = make_instance(c, n, k, d_max, {n, k, rep}, uniform_specs(n, c.truth));
    const auto traces = simulate_traces(inst.model, seeds, count, stream_seed(c.seed, "traces", {n, k, rep}),
                                        c.threads);
    const auto data = build_all_node_data(traces, inst.graph, c.threads);
    const auto fits = fit_all(data, uniform_specs(n, c.truth), c.fit, c.threads);
    for (std::size_t v = 0; v < n; ++v) {
      const auto& fit = fits[v];
      if (!estimated(fit)) continue;
      const auto cov = node_covariance(data[v], fit);
      const bool interior = cov.valid && !on_boundary(fit);
      const auto truth = inst.model.parent_weights(static_cast<NodeId>(v));
      std::vector<Interval> intervals;
      std::vector<double> se;
      if (cov.valid) {
        intervals = weight_intervals(fit, cov, c.level);
        se = standard_errors(cov);
      }
      for (std::size_t i = 0; i < fit.parents.size(); ++i) {
        const double lo = cov.valid ? intervals[i].lower : std::nan("");
        const double hi = cov.valid ? intervals[i].upper : std::nan("");
        const bool covered = cov.valid && lo <= truth[i] && truth[i] <= hi;
        result.raw.add({num(n), num(k), num(count), num(rep), num(v), num(static_cast<std::size_t>(fit.parents[i])),
                        num(truth[i]), num(fit.weights[i]), num(cov.valid ? se[i] : std::nan("")), num(lo), num(hi),
                        covered ? "1" : "0", cov.valid ? "1" : "0", interior ? "1" : "0"});
      }
    }
  }
  result.summary.columns = {"scope", "node_replications", "weights", "coverage", "mean_length"};
  for (bool interior_only : {true, false}) {
    std::size_t weights = 0, hits = 0;
    double length = 0.0;
    std::size_t nodes = 0;
    std::string last;
    for (std::size_t r = 0; r < result.raw.rows.size(); ++r) {
      if (result.raw.text(r, "valid") != "1") continue;
      if (interior_only && result.raw.text(r, "interior") != "1") continue;
      ++weights;
      hits += result.raw.text(r, "covered") == "1";
      length += result.raw.number(r, "upper") - result.raw.number(r, "lower");
      const std::string key = result.raw.text(r, "replication") + "/" + result.raw.text(r, "node");
      if (key != last) ++nodes;
      last = key;
    }
    const double w = static_cast<double>(std::max<std::size_t>(weights, 1));
    result.summary.add({interior_only ? "interior" : "valid", num(nodes), num(weights),
                        num(static_cast<double>(hits) / w), num(length / w)});
  }
  return result;
}

namespace {

struct ExposureCase {
  std::size_t trace = 0;
  NodeId node = 0;
  std::size_t time = 0;
  bool activated = false;
};

// Every (v, t) with v inactive through t-1 and a parent newly active at t-1.
std::vector<ExposureCase> exposure_cases(const Graph& graph, const std::vector<Trace>& traces) {
  std::vector<ExposureCase> cases;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const Trace& tr = traces[i];
    ActivationHistory full(graph, tr);
    for (std::size_t v = 0; v < graph.node_count(); ++v) {
      const auto node = static_cast<NodeId>(v);
      const int tv = full.activation_time(node);
      if (tv == 0) continue;
      const std::size_t last = tv < 0 ? tr.length() : static_cast<std::size_t>(tv);
      for (std::size_t t = 1; t <= last; ++t) {
        bool exposed = false;
        for (NodeId u : graph.parent_list(node)) {
          if (tr.steps[t - 1].contains(u)) {
            exposed = true;
            break;
          }
        }
        if (exposed) cases.push_back({i, node, t, tv >= 0 && static_cast<std::size_t>(tv) == t});
      }
    }
  }
  return cases;
}

Trace prefix_of(const Trace& tr, std::size_t t) {
  Trace out;
  out.steps.assign(tr.steps.begin(), tr.steps.begin() + static_cast<std::ptrdiff_t>(t));
  return out;
}

}  // namespace

ExperimentResult run_activation_prediction(const ExperimentConfig& c) {
  require_positive(c.replications, "replications");
  require_positive(c.test_size, "test_size");
  require_nonempty(c.candidates, "candidates");
  ExperimentResult result;
  result.raw.columns = {"replication", "trace", "node",  "time",  "activated", "model",
                        "truth",       "estimate", "lower", "upper", "valid",    "covered"};
  const auto seeds = seeds_of(c);
  const std::size_t n = c.nodes.at(0);
  const std::size_t k = c.degrees.at(0);
  const std::size_t count = c.traces.at(0);
  for (std::size_t rep = 0; rep < c.replications; ++rep) {
    auto inst = make_instance(c, n, k, c.d_max.at(0), {n, k, rep}, uniform_specs(n, c.truth));
    const auto train = simulate_traces(inst.model, seeds, count, stream_seed(c.seed, "traces", {n, k, rep}),
                                       c.threads);
    const auto test = simulate_traces(inst.model, seeds, c.test_size,
                                      stream_seed(c.seed, "test-traces", {n, k, rep}), c.threads);
    const auto data = build_all_node_data(train, inst.graph, c.threads);
    const auto cases = exposure_cases(inst.graph, test);
    std::vector<double> truth(cases.size());
    std::vector<Trace> histories(cases.size());
    for (std::size_t i = 0; i < cases.size(); ++i) {
      histories[i] = prefix_of(test[cases[i].trace], cases[i].time);
      truth[i] = transition_probability(inst.model, histories[i], cases[i].node);
    }
    for (const auto& candidate : c.candidates) {
      const auto fits = fit_all(data, uniform_specs(n, candidate), c.fit, c.threads);
      const auto fitted = assemble_model(inst.graph, fits, candidate);
      std::vector<CovarianceResult> covs(n);
      parallel_for(n, c.threads, [&](std::size_t v) {
        if (estimated(fits[v])) covs[v] = node_covariance(data[v], fits[v]);
      });
      const std::string name = candidate.describe();
      for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto& cs = cases[i];
        const auto& cov = covs[static_cast<std::size_t>(cs.node)];
        double estimate = transition_probability(fitted, histories[i], cs.node);
        double lo = std::nan("");
        double hi = std::nan("");
        if (cov.valid) {
          const auto pi = activation_probability_interval(fitted, cov, histories[i], cs.node, c.level);
          estimate = pi.estimate;
          lo = pi.interval.lower;
          hi = pi.interval.upper;
        }
        const bool covered = cov.valid && lo <= truth[i] && truth[i] <= hi;
        result.raw.add({num(rep), num(cs.trace), num(static_cast<std::size_t>(cs.node)), num(cs.time),
                        cs.activated ? "1" : "0", name, num(truth[i]), num(estimate), num(lo), num(hi),
                        cov.valid ? "1" : "0", covered ? "1" : "0"});
      }
    }
  }
  result.summary.columns = {"model", "cases", "valid", "coverage", "mean_length", "mean_abs_error", "rmae"};
  std::vector<std::string> order;
  for (const auto& cand : c.candidates) order.push_back(cand.describe());
  for (const auto& name : order) {
    std::size_t cases = 0, valid = 0, hits = 0;
    double length = 0.0;
    std::vector<double> t, e;
    for (std::size_t r = 0; r < result.raw.rows.size(); ++r) {
      if (result.raw.text(r, "model") != name) continue;
      ++cases;
      t.push_back(result.raw.number(r, "truth"));
      e.push_back(result.raw.number(r, "estimate"));
      if (result.raw.text(r, "valid") != "1") continue;
      ++valid;
      hits += result.raw.text(r, "covered") == "1";
      length += result.raw.number(r, "upper") - result.raw.number(r, "lower");
    }
    double mae = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) mae += std::abs(t[i] - e[i]);
    const double vd = static_cast<double>(std::max<std::size_t>(valid, 1));
    result.summary.add({name, num(cases), num(valid), num(static_cast<double>(hits) / vd), num(length / vd),
                        num(mae / static_cast<double>(std::max<std::size_t>(cases, 1))),
                        t.empty() ? "nan" : num(rmae(t, e))});
  }
  return result;
}

ExperimentResult run_im_comparison(const ExperimentConfig& c) {
  require_positive(c.replications, "replications");
  require_positive(c.fits_per_network, "fits_per_network");
  require_positive(c.mc_replicates, "mc_replicates");
  require_nonempty(c.budgets, "budgets");
  require_nonempty(c.beta_grid, "beta_grid");
  require_nonempty(c.truth_betas, "truth_betas");
  ExperimentResult result;
  result.raw.columns = {"network", "fit", "method", "k", "spread", "se", "seeds"};
  const auto seeds = seeds_of(c);
  const std::size_t n = c.nodes.at(0);
  const std::size_t k = c.degrees.at(0);
  const std::size_t count = c.traces.at(0);
  const std::size_t budget = max_of(c.budgets);
  const std::vector<double> alpha_one{1.0};
  const auto grid = beta_grid(alpha_one, c.beta_grid);
  const std::vector<std::string> methods{"oracle", "glt", "lt", "ic", "wc", "ptp"};

  for (std::size_t net = 0; net < c.replications; ++net) {
    Rng beta_rng = stream(c.seed, "truth-thresholds", {n, k, net});
    std::vector<ThresholdSpec> thresholds;
    for (std::size_t v = 0; v < n; ++v) {
      thresholds.push_back(ThresholdSpec::beta(1.0, c.truth_betas[beta_rng.below(c.truth_betas.size())]));
    }
    auto inst = make_instance(c, n, k, c.d_max.at(0), {n, k, net}, thresholds);

    auto record = [&](std::size_t fit, std::size_t method, const GltModel& candidate) {
      const auto solution = greedy_im(
          candidate, budget,
          SpreadEvaluator::monte_carlo(c.mc_replicates, stream_seed(c.seed, "im-greedy", {net, fit, method}),
                                       c.threads));
      for (std::size_t b : c.budgets) {
        std::vector<NodeId> chosen(solution.seeds.begin(), solution.seeds.begin() + static_cast<std::ptrdiff_t>(b));
        const auto spread = estimate_spread_mc(inst.model, NodeSet(chosen), c.mc_replicates,
                                               stream_seed(c.seed, "im-spread", {net, b}), c.threads);
        result.raw.add({num(net), num(fit), methods[method], num(b), num(spread.mean), num(spread.standard_error),
                        join_nodes(chosen)});
      }
    };

    record(0, 0, inst.model);
    for (std::size_t fit = 0; fit < c.fits_per_network; ++fit) {
      const auto traces = simulate_traces(inst.model, seeds, count,
                                          stream_seed(c.seed, "traces", {n, k, net, fit}), c.threads);
      const auto data = build_all_node_data(traces, inst.graph, c.threads);
      const auto glt_fits = fit_all_with_grid(data, grid, c.fit, c.threads);
      record(fit, 1, assemble_model(inst.graph, glt_fits, grid.front()));
      const auto lt_fits = fit_all(data, uniform_specs(n, ThresholdSpec::uniform()), c.fit, c.threads);
      record(fit, 2, assemble_model(inst.graph, lt_fits, ThresholdSpec::uniform()));
      const auto ic_fits = fit_all(data, uniform_specs(n, ThresholdSpec::exponential_unit()), c.fit, c.threads);
      record(fit, 3, assemble_model(inst.graph, ic_fits, ThresholdSpec::exponential_unit()));
      record(fit, 4, from_lt(inst.graph, baseline_wc(inst.graph)));
      record(fit, 5, from_lt(inst.graph, baseline_ptp(traces, inst.graph)));
    }
  }

  // Per network, spreads are averaged over fits first; the summary is over networks.
  Table per_network;
  per_network.columns = {"method", "k", "network", "spread"};
  for (const auto& method : methods) {
    for (std::size_t b : c.budgets) {
      for (std::size_t net = 0; net < c.replications; ++net) {
        std::vector<double> values;
        for (std::size_t r = 0; r < result.raw.rows.size(); ++r) {
          if (result.raw.text(r, "method") == method && result.raw.text(r, "k") == num(b) &&
              result.raw.text(r, "network") == num(net)) {
            values.push_back(result.raw.number(r, "spread"));
          }
        }
        per_network.add({method, num(b), num(net), num(mean(values))});
      }
    }
  }
  result.summary = summarise(per_network, {"method", "k"}, "spread");
  return result;
}

ExperimentResult run_spread_comparison(const ExperimentConfig& c) {
  require_positive(c.replications, "replications");
  require_positive(c.test_size, "test_size");
  require_positive(c.mc_replicates, "mc_replicates");
  require_nonempty(c.candidates, "candidates");
  ExperimentResult result;
  result.raw.columns = {"replication", "set", "size", "model", "truth", "predicted"};
  const auto seeds = seeds_of(c);
  const std::size_t n = c.nodes.at(0);
  const std::size_t k = c.degrees.at(0);
  const std::size_t count = c.traces.at(0);
  for (std::size_t rep = 0; rep < c.replications; ++rep) {
    auto inst = make_instance(c, n, k, c.d_max.at(0), {n, k, rep}, uniform_specs(n, c.truth));
    const auto train = simulate_traces(inst.model, seeds, count, stream_seed(c.seed, "traces", {n, k, rep}),
                                       c.threads);
    const auto data = build_all_node_data(train, inst.graph, c.threads);
    std::vector<GltModel> fitted;
    for (const auto& candidate : c.candidates) {
      const auto fits = fit_all(data, uniform_specs(n, candidate), c.fit, c.threads);
      fitted.push_back(assemble_model(inst.graph, fits, candidate));
    }
    std::vector<NodeSet> test_sets;
    for (std::size_t i = 0; i < c.test_size; ++i) {
      Rng rng = stream(c.seed, "test-seeds", {n, k, rep, i});
      test_sets.push_back(sample_seed(seeds, inst.graph, rng));
    }
    for (std::size_t i = 0; i < test_sets.size(); ++i) {
      // Common random numbers: every model sees the same replicate streams for a set.
      const std::uint64_t mc = stream_seed(c.seed, "spread-mc", {rep, i});
      const double truth = estimate_spread_mc(inst.model, test_sets[i], c.mc_replicates, mc, c.threads).mean;
      for (std::size_t m = 0; m < fitted.size(); ++m) {
        const double predicted = estimate_spread_mc(fitted[m], test_sets[i], c.mc_replicates, mc, c.threads).mean;
        result.raw.add({num(rep), num(i), num(test_sets[i].size()), c.candidates[m].describe(), num(truth),
                        num(predicted)});
      }
    }
  }
  result.summary.columns = {"model", "sets", "rmae", "mean_bias"};
  for (const auto& cand : c.candidates) {
    const std::string name = cand.describe();
    std::vector<double> t, p;
    for (std::size_t r = 0; r < result.raw.rows.size(); ++r) {
      if (result.raw.text(r, "model") != name) continue;
      t.push_back(result.raw.number(r, "truth"));
      p.push_back(result.raw.number(r, "predicted"));
    }
    double bias = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) bias += p[i] - t[i];
    result.summary.add({name, num(t.size()), num(rmae(t, p)), num(bias / static_cast<double>(t.size()))});
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& c) {
  if (c.experiment == "rmae-vs-n" || c.experiment == "rmae-vs-traces") return run_rmae_study(c);
  if (c.experiment == "ci-coverage") return run_ci_coverage(c);
  if (c.experiment == "activation-prediction") return run_activation_prediction(c);
  if (c.experiment == "im-comparison") return run_im_comparison(c);
  if (c.experiment == "spread-comparison") return run_spread_comparison(c);
  throw Error(ErrorKind::InvalidArgument, "unknown experiment", {{"experiment", c.experiment}});
}

}  // namespace glt
