#include "glt/cli.hpp"

#include "glt/diagnostics.hpp"
#include "glt/error.hpp"
#include "glt/estimation.hpp"
#include "glt/experiment.hpp"
#include "glt/inference.hpp"
#include "glt/influence.hpp"
#include "glt/io.hpp"
#include "glt/likelihood.hpp"
#include "glt/model.hpp"
#include "glt/rng.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <optional>
#include <ostream>
#include <sstream>

namespace glt {
namespace {

struct Options {
  std::string graph, model, traces, pseudo, fit, seeds_file, out, config, experiment;
  std::string family = "uniform";
  std::string evaluator = "mc";
  std::string seed_law = "size-then-subset";
  std::string seed_set;
  std::string grid, grid_alpha = "1";
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::size_t replicates = 1000;
  std::size_t k = 1;
  std::size_t count = 0;
  std::size_t n = 0;
  std::size_t degree = 4;
  std::size_t s_max = 5;
  std::size_t state_cap = 1'000'000;
  std::size_t max_budget = 2;
  double rewiring = 0.2;
  double d_max = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  double level = 0.95;
  double epsilon = 1e-6;
  std::optional<double> gamma;
  bool exhaustive = false;
  bool submodularity = false;
};

Error usage(const std::string& message) { return Error(ErrorKind::InvalidArgument, message); }

std::uint64_t require_seed(const Options& o) {
  if (!o.seed) throw usage("--seed is required");
  return *o.seed;
}

const std::string& require(const std::string& value, const char* flag) {
  if (value.empty()) throw usage(std::string(flag) + " is required");
  return value;
}

void emit(const Options& o, std::ostream& out, const std::string& content) {
  if (o.out.empty()) {
    out << content;
  } else {
    write_text_file(o.out, content);
  }
}

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::Parse, "invalid number in list", {{"flag", flag}, {"item", item}});
    }
  }
  if (values.empty()) throw Error(ErrorKind::Parse, "empty list", {{"flag", flag}});
  return values;
}

ThresholdSpec threshold_of(const Options& o) {
  if (o.family == "uniform") return ThresholdSpec::uniform();
  if (o.family == "exponential") return ThresholdSpec::exponential_unit();
  if (o.family == "beta") return ThresholdSpec::beta(o.alpha, o.beta);
  throw usage("--family must be uniform, exponential or beta");
}

FitOptions fit_options(const Options& o) {
  FitOptions f;
  f.epsilon = o.epsilon;
  f.gamma = o.gamma;
  return f;
}

Graph load_graph(const Options& o) {
  if (!o.graph.empty()) return graph_from_json(read_json_file(o.graph));
  if (!o.model.empty()) return model_from_json(read_json_file(o.model)).graph();
  throw usage("--graph or --model is required");
}

GltModel load_model(const Options& o) { return model_from_json(read_json_file(require(o.model, "--model"))); }

SeedDistribution seed_distribution(const Options& o) {
  if (!o.seeds_file.empty()) return seed_distribution_from_json(read_json_file(o.seeds_file));
  return SeedDistribution::uniform_by_size(o.s_max, seed_law_from_string(o.seed_law));
}

std::vector<NodeData> load_data(const Options& o, const Graph& graph) {
  if (!o.traces.empty() && !o.pseudo.empty()) throw usage("--traces and --pseudo are exclusive");
  if (!o.traces.empty()) {
    const auto traces = traces_from_jsonl(read_text_file(o.traces), &graph, o.traces);
    return build_all_node_data(traces, graph, o.threads);
  }
  if (!o.pseudo.empty()) {
    const auto pseudo = pseudo_traces_from_jsonl(read_text_file(o.pseudo), o.pseudo);
    return build_all_pseudo_node_data(pseudo, graph);
  }
  throw usage("--traces or --pseudo is required");
}

SpreadEvaluator evaluator_of(const Options& o) {
  if (o.evaluator == "mc") return SpreadEvaluator::monte_carlo(o.replicates, require_seed(o), o.threads);
  if (o.evaluator == "exact") return SpreadEvaluator::exact(o.state_cap);
  if (o.evaluator == "bipartite") return SpreadEvaluator::bipartite();
  throw usage("--evaluator must be mc, exact or bipartite");
}

void cmd_generate(const Options& o, std::ostream& out) {
  Rng weight_rng = Rng::derive(subseed(require_seed(o), "weights"), {});
  Graph graph = [&] {
    if (!o.graph.empty()) return graph_from_json(read_json_file(o.graph));
    if (o.n == 0) throw usage("--n or --graph is required");
    Rng graph_rng = Rng::derive(subseed(*o.seed, "graph"), {});
    return generate_cws(o.n, o.degree, o.rewiring, graph_rng);
  }();
  auto weights = sample_weights_simplex(graph, o.d_max, weight_rng);
  const std::vector<ThresholdSpec> thresholds(graph.node_count(), threshold_of(o));
  emit(o, out, dump_json(model_to_json(GltModel(graph, std::move(weights), thresholds))));
}

void cmd_simulate(const Options& o, std::ostream& out) {
  if (o.count == 0) throw usage("--count must be positive");
  const GltModel model = load_model(o);
  std::vector<Trace> traces;
  if (!o.seed_set.empty()) {
    std::vector<NodeId> nodes;
    for (double v : parse_list(o.seed_set, "--seed-set")) nodes.push_back(static_cast<NodeId>(v));
    const auto dist = SeedDistribution::explicit_support({{NodeSet(nodes), 1.0}});
    traces = simulate_traces(model, dist, o.count, subseed(require_seed(o), "traces"), o.threads);
  } else {
    traces = simulate_traces(model, seed_distribution(o), o.count, subseed(require_seed(o), "traces"), o.threads);
  }
  emit(o, out, traces_to_jsonl(traces));
}

void cmd_fit(const Options& o, std::ostream& out) {
  const Graph graph = load_graph(o);
  const auto data = load_data(o, graph);
  const FitOptions options = fit_options(o);
  std::vector<NodeFitResult> fits;
  ThresholdSpec fallback = threshold_of(o);
  if (!o.grid.empty()) {
    const auto alphas = parse_list(o.grid_alpha, "--grid-alpha");
    const auto betas = parse_list(o.grid, "--grid");
    const auto grid = beta_grid(alphas, betas);
    fits = fit_all_with_grid(data, grid, options, o.threads);
    fallback = grid.front();
  } else {
    const std::vector<ThresholdSpec> specs(graph.node_count(), fallback);
    fits = fit_all(data, specs, options, o.threads);
  }
  emit(o, out, dump_json(fit_to_json(assemble_model(graph, fits, fallback), fits)));
}

void cmd_infer(const Options& o, std::ostream& out) {
  const Json doc = read_json_file(require(o.fit, "--fit"));
  const GltModel assembled = model_from_json(doc);
  const auto fits = fits_from_json(doc);
  const auto data = load_data(o, assembled.graph());
  std::vector<NodeInference> nodes;
  for (const auto& fit : fits) {
    NodeInference ni;
    ni.fit = fit;
    const auto& d = data.at(static_cast<std::size_t>(fit.node));
    if (d.has_information() && !fit.weights.empty()) {
      ni.covariance = node_covariance(d, fit);
      if (ni.covariance.valid) ni.intervals = weight_intervals(fit, ni.covariance, o.level);
    } else {
      ni.covariance.node = fit.node;
      ni.covariance.message = "node has no informative observations";
    }
    ni.boundary = !fit.weights.empty() && on_boundary(fit);
    nodes.push_back(std::move(ni));
  }
  emit(o, out, dump_json(inference_to_json(assembled, nodes)));
}

void cmd_diagnose(const Options& o, std::ostream& out) {
  const Graph graph = load_graph(o);
  Json doc = identifiability_to_json(check_identifiability(graph, seed_distribution(o), o.state_cap, o.threads));
  if (o.submodularity) {
    const GltModel model = load_model(o);
    Json sub;
    sub["max_budget"] = o.max_budget;
    Json list = Json::array();
    for (const auto& v : check_submodularity_exact(model, o.max_budget, 12, 1e-9, o.state_cap)) {
      Json item;
      item["smaller"] = v.smaller.values();
      item["larger"] = v.larger.values();
      item["added"] = v.added;
      item["gain_smaller"] = v.gain_smaller;
      item["gain_larger"] = v.gain_larger;
      list.push_back(std::move(item));
    }
    sub["violations"] = std::move(list);
    doc["submodularity"] = std::move(sub);
  }
  emit(o, out, dump_json(doc));
}

void cmd_im(const Options& o, std::ostream& out) {
  const GltModel model = load_model(o);
  const SpreadEvaluator evaluator = evaluator_of(o);
  const ImSolution solution = o.exhaustive ? exhaustive_im(model, o.k, evaluator) : greedy_im(model, o.k, evaluator);
  Json doc;
  doc["seeds"] = solution.seeds;
  doc["gains"] = solution.gains;
  doc["spread"] = solution.spread.mean;
  doc["se"] = solution.spread.standard_error;
  doc["evaluator"] = to_string(evaluator.kind);
  if (evaluator.kind == EvaluatorKind::MonteCarlo) doc["replicates"] = evaluator.replicates;
  emit(o, out, dump_json(doc));
}

void cmd_spread(const Options& o, std::ostream& out) {
  const GltModel model = load_model(o);
  std::vector<NodeId> nodes;
  for (double v : parse_list(require(o.seed_set, "--seed-set"), "--seed-set")) nodes.push_back(static_cast<NodeId>(v));
  const NodeSet seeds(nodes);
  const SpreadEvaluator evaluator = evaluator_of(o);
  const auto estimate = evaluate_spread(model, seeds, evaluator);
  Json doc;
  doc["seeds"] = seeds.values();
  doc["spread"] = estimate.mean;
  doc["se"] = estimate.standard_error;
  doc["evaluator"] = to_string(evaluator.kind);
  if (evaluator.kind == EvaluatorKind::MonteCarlo) doc["replicates"] = estimate.replicates;
  emit(o, out, dump_json(doc));
}

void cmd_experiment(const Options& o, std::ostream& out) {
  ExperimentConfig config = default_experiment_config(require(o.experiment, "--experiment"));
  if (!o.config.empty()) config = experiment_config_from_json(read_json_file(o.config), config);
  if (config.experiment != o.experiment) throw usage("config names a different experiment");
  config.seed = require_seed(o);
  config.threads = o.threads;
  const ExperimentResult result = run_experiment(config);
  if (o.out.empty()) {
    out << result.summary.to_csv();
    return;
  }
  write_text_file(o.out + "_raw.csv", result.raw.to_csv());
  write_text_file(o.out + "_summary.csv", result.summary.to_csv());
  Json manifest = experiment_config_to_json(config);
  write_text_file(o.out + "_config.json", dump_json(manifest));
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generalized linear threshold diffusion: simulation, estimation, inference and IM", "glt"};
  app.require_subcommand(1, 1);
  Options o;

  auto* generate = app.add_subcommand("generate", "Sample a CWS graph (or load one) with simplex weights");
  auto* simulate = app.add_subcommand("simulate", "Simulate propagation traces as JSONL");
  auto* fit = app.add_subcommand("fit", "Maximum-likelihood weights per node");
  auto* infer = app.add_subcommand("infer", "Covariances and confidence intervals for a fit");
  auto* diagnose = app.add_subcommand("diagnose", "Identifiability and submodularity checks");
  auto* im = app.add_subcommand("im", "Influence maximisation");
  auto* spread = app.add_subcommand("spread", "Expected spread of a seed set");
  auto* experiment = app.add_subcommand("experiment", "Run a synthetic study and write CSV tables");

  for (auto* cmd : {generate, simulate, fit, infer, diagnose, im, spread, experiment}) {
    cmd->add_option("--out", o.out, "Output file (stdout when omitted)");
    cmd->add_option("--seed", o.seed, "Root RNG seed");
    cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  }
  for (auto* cmd : {generate, fit, diagnose}) cmd->add_option("--graph", o.graph, "Graph JSON");
  for (auto* cmd : {simulate, fit, diagnose, im, spread}) cmd->add_option("--model", o.model, "Model JSON");
  for (auto* cmd : {fit, infer}) {
    cmd->add_option("--traces", o.traces, "Trace JSONL");
    cmd->add_option("--pseudo", o.pseudo, "Pseudo-trace JSONL");
  }
  for (auto* cmd : {generate, fit}) {
    cmd->add_option("--family", o.family, "uniform | exponential | beta");
    cmd->add_option("--alpha", o.alpha, "Beta threshold alpha");
    cmd->add_option("--beta", o.beta, "Beta threshold beta");
  }
  for (auto* cmd : {simulate, diagnose}) {
    cmd->add_option("--seeds", o.seeds_file, "Seed distribution JSON");
    cmd->add_option("--s-max", o.s_max, "Largest seed set size")->check(CLI::PositiveNumber);
    cmd->add_option("--seed-law", o.seed_law, "size-then-subset | uniform-over-sets");
  }
  for (auto* cmd : {im, spread}) {
    cmd->add_option("--replicates", o.replicates, "Monte Carlo replicates")->check(CLI::PositiveNumber);
    cmd->add_option("--evaluator", o.evaluator, "mc | exact | bipartite");
    cmd->add_option("--state-cap", o.state_cap, "State cap of the exact evaluator");
  }

  generate->add_option("--n", o.n, "Number of nodes");
  generate->add_option("--degree", o.degree, "Initial lattice degree (even)");
  generate->add_option("--p", o.rewiring, "Rewiring probability");
  generate->add_option("--d-max", o.d_max, "Bound on each node's total incoming weight");

  simulate->add_option("--count", o.count, "Number of traces")->required();
  simulate->add_option("--seed-set", o.seed_set, "Fixed seed set, comma separated");

  fit->add_option("--grid", o.grid, "Beta(alpha, beta) grid: comma-separated beta values");
  fit->add_option("--grid-alpha", o.grid_alpha, "Comma-separated alpha values of the grid");
  fit->add_option("--epsilon", o.epsilon, "Lower bound on each weight");
  fit->add_option("--gamma", o.gamma, "Upper bound on each node's total weight");

  infer->add_option("--fit", o.fit, "Fit JSON produced by `fit`")->required();
  infer->add_option("--level", o.level, "Interval level");

  diagnose->add_option("--state-cap", o.state_cap, "State cap per node");
  diagnose->add_flag("--submodularity", o.submodularity, "Exhaustive submodularity check (needs --model)");
  diagnose->add_option("--max-budget", o.max_budget, "Largest set size in the submodularity check");

  im->add_option("--k", o.k, "Budget")->required();
  im->add_flag("--exhaustive", o.exhaustive, "Enumerate all sets of size k (exact evaluators)");

  spread->add_option("--seed-set", o.seed_set, "Seed set, comma separated")->required();

  experiment->add_option("--experiment", o.experiment, "Study name")->required();
  experiment->add_option("--config", o.config, "JSON overrides of the study defaults");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    Json doc;
    doc["error"] = {{"kind", "usage"}, {"message", e.what()}, {"details", Json::object()}};
    err << doc.dump() << '\n';
    return 2;
  }

  try {
    if (generate->parsed()) cmd_generate(o, out);
    else if (simulate->parsed()) cmd_simulate(o, out);
    else if (fit->parsed()) cmd_fit(o, out);
    else if (infer->parsed()) cmd_infer(o, out);
    else if (diagnose->parsed()) cmd_diagnose(o, out);
    else if (im->parsed()) cmd_im(o, out);
    else if (spread->parsed()) cmd_spread(o, out);
    else if (experiment->parsed()) cmd_experiment(o, out);
  } catch (const Error& e) {
    err << e.to_json().dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    Json doc;
    doc["error"] = {{"kind", "internal"}, {"message", e.what()}, {"details", Json::object()}};
    err << doc.dump() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace glt
