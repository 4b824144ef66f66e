#include "glt/io.hpp"

#include "glt/error.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace glt {

namespace {

[[noreturn]] void fail(const std::string& message, Json details = Json::object()) {
  throw Error(ErrorKind::Parse, message, std::move(details));
}

const Json& member(const Json& doc, const char* key) {
  if (!doc.is_object()) fail("expected a JSON object", {{"field", key}});
  const auto it = doc.find(key);
  if (it == doc.end()) fail(std::string("missing field \"") + key + "\"", {{"field", key}});
  return *it;
}

template <typename T>
T as(const Json& value, const char* field) {
  try {
    return value.get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("field \"") + field + "\" has the wrong type", {{"field", field}, {"reason", e.what()}});
  }
}

NodeId node_id(const Json& value, const char* field) {
  if (!value.is_number_integer()) fail(std::string("field \"") + field + "\" must hold integers", {{"field", field}});
  return value.get<NodeId>();
}

Json node_list(const NodeSet& set) {
  Json out = Json::array();
  for (NodeId v : set) out.push_back(v);
  return out;
}

NodeSet node_set(const Json& value, const char* field) {
  if (!value.is_array()) fail(std::string("field \"") + field + "\" must be an array", {{"field", field}});
  std::vector<NodeId> nodes;
  for (const Json& x : value) nodes.push_back(node_id(x, field));
  return NodeSet::from_strict(std::move(nodes));
}

template <typename T, typename Parse>
std::vector<T> parse_lines(std::string_view text, std::string_view source, Parse&& parse) {
  std::vector<T> out;
  std::size_t line = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    ++line;
    std::string_view row = text.substr(pos, end - pos);
    pos = end + 1;
    if (row.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    try {
      out.push_back(parse(nlohmann::ordered_json::parse(row), out.size()));
    } catch (const nlohmann::json::parse_error& e) {
      fail("malformed JSON line", {{"source", source}, {"line", line}, {"column", e.byte}, {"reason", e.what()}});
    } catch (const Error& e) {
      Json details = e.details();
      details["source"] = source;
      details["line"] = line;
      throw Error(e.kind(), e.what(), details);
    }
    if (end == text.size()) break;
  }
  return out;
}

}  // namespace

Json parse_json(std::string_view text, std::string_view source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    fail("malformed JSON document", {{"source", source}, {"line", line}, {"column", column}, {"reason", e.what()}});
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open file for reading", {{"path", path}});
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, std::string_view content) {
  const std::string temp = path + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open file for writing", {{"path", temp}});
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorKind::Io, "write failed", {{"path", temp}});
  }
  std::error_code ec;
  std::filesystem::rename(temp, path, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot move file into place", {{"path", path}, {"reason", ec.message()}});
}

Json read_json_file(const std::string& path) { return parse_json(read_text_file(path), path); }

std::string dump_json(const Json& doc) { return doc.dump(2) + "\n"; }

Json graph_to_json(const Graph& graph) {
  Json edges = Json::array();
  for (const Edge& e : graph.edges()) edges.push_back({e.parent, e.child});
  return {{"n", graph.node_count()}, {"edges", edges}};
}

Graph graph_from_json(const Json& doc) {
  const Json& n = member(doc, "n");
  if (!n.is_number_integer() || n.get<long long>() < 0) fail("field \"n\" must be a nonnegative integer", {{"field", "n"}});
  const Json& list = member(doc, "edges");
  if (!list.is_array()) fail("field \"edges\" must be an array", {{"field", "edges"}});
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const Json& e = list[i];
    if (!e.is_array() || e.size() != 2) fail("each edge must be a [parent, child] pair", {{"field", "edges"}, {"index", i}});
    edges.push_back({node_id(e[0], "edges"), node_id(e[1], "edges")});
  }
  return build_graph(n.get<std::size_t>(), std::move(edges));
}

Json threshold_to_json(const ThresholdSpec& spec) {
  switch (spec.family()) {
    case ThresholdFamily::Uniform: return {{"family", "uniform"}};
    case ThresholdFamily::Exponential: return {{"family", "exponential"}};
    case ThresholdFamily::Beta: return {{"family", "beta"}, {"alpha", spec.alpha()}, {"beta", spec.beta()}};
  }
  return {{"family", "uniform"}};
}

ThresholdSpec threshold_from_json(const Json& doc) {
  const auto family = as<std::string>(member(doc, "family"), "family");
  if (family == "uniform") return make_uniform();
  if (family == "exponential") return make_exponential_unit();
  if (family == "beta") return make_beta(as<double>(member(doc, "alpha"), "alpha"), as<double>(member(doc, "beta"), "beta"));
  fail("unknown threshold family", {{"field", "family"}, {"value", family}});
}

Json model_to_json(const GltModel& model) {
  Json out = graph_to_json(model.graph());
  out["weights"] = Json(std::vector<double>(model.weights().begin(), model.weights().end()));
  Json thresholds = Json::array();
  for (const auto& spec : model.thresholds()) thresholds.push_back(threshold_to_json(spec));
  out["thresholds"] = thresholds;
  return out;
}

GltModel model_from_json(const Json& doc) {
  if (doc.is_object() && doc.contains("model") && doc.contains("nodes")) return model_from_json(doc["model"]);
  Graph graph = graph_from_json(doc);
  const Json& w = member(doc, "weights");
  if (!w.is_array()) fail("field \"weights\" must be an array", {{"field", "weights"}});
  std::vector<double> weights;
  for (const Json& x : w) {
    if (!x.is_number()) fail("weights must be numbers", {{"field", "weights"}});
    weights.push_back(x.get<double>());
  }
  const Json& t = member(doc, "thresholds");
  if (!t.is_array()) fail("field \"thresholds\" must be an array", {{"field", "thresholds"}});
  std::vector<ThresholdSpec> specs;
  for (const Json& x : t) specs.push_back(threshold_from_json(x));
  return GltModel(std::move(graph), std::move(weights), std::move(specs));
}

Json trace_to_json(const Trace& trace) {
  Json steps = Json::array();
  for (const NodeSet& s : trace.steps) steps.push_back(node_list(s));
  return {{"steps", steps}};
}

Trace trace_from_json(const Json& doc) {
  const Json& steps = member(doc, "steps");
  if (!steps.is_array()) fail("field \"steps\" must be an array", {{"field", "steps"}});
  Trace out;
  for (const Json& s : steps) out.steps.push_back(node_set(s, "steps"));
  return out;
}

std::string traces_to_jsonl(const std::vector<Trace>& traces) {
  std::string out;
  for (const Trace& t : traces) out += trace_to_json(t).dump() + "\n";
  return out;
}

std::vector<Trace> traces_from_jsonl(std::string_view text, const Graph* graph, std::string_view source) {
  return parse_lines<Trace>(text, source, [&](const Json& doc, std::size_t) {
    Trace t = trace_from_json(doc);
    if (graph != nullptr) validate_trace(*graph, t);
    return t;
  });
}

Json pseudo_trace_to_json(const PseudoTrace& record) {
  return {{"node", record.node}, {"active_parents", node_list(record.active_parents)}, {"y", record.activated ? 1 : 0}};
}

PseudoTrace pseudo_trace_from_json(const Json& doc) {
  PseudoTrace out;
  out.node = node_id(member(doc, "node"), "node");
  out.active_parents = node_set(member(doc, "active_parents"), "active_parents");
  const Json& y = member(doc, "y");
  if (!(y.is_number_integer() && (y.get<int>() == 0 || y.get<int>() == 1)) && !y.is_boolean()) {
    fail("field \"y\" must be 0 or 1", {{"field", "y"}});
  }
  out.activated = y.is_boolean() ? y.get<bool>() : y.get<int>() == 1;
  return out;
}

std::string pseudo_traces_to_jsonl(const std::vector<PseudoTrace>& records) {
  std::string out;
  for (const PseudoTrace& r : records) out += pseudo_trace_to_json(r).dump() + "\n";
  return out;
}

std::vector<PseudoTrace> pseudo_traces_from_jsonl(std::string_view text, std::string_view source) {
  return parse_lines<PseudoTrace>(text, source, [](const Json& doc, std::size_t) { return pseudo_trace_from_json(doc); });
}

const char* to_string(SeedLaw law) noexcept {
  return law == SeedLaw::SizeThenSubset ? "size-then-subset" : "uniform-over-sets";
}

SeedLaw seed_law_from_string(std::string_view name) {
  if (name == "size-then-subset") return SeedLaw::SizeThenSubset;
  if (name == "uniform-over-sets") return SeedLaw::UniformOverSets;
  throw Error(ErrorKind::InvalidArgument, "unknown seed law", {{"value", name}});
}

Json seed_distribution_to_json(const SeedDistribution& dist) {
  if (!dist.is_explicit()) return {{"s_max", dist.s_max()}, {"law", to_string(dist.law())}};
  Json support = Json::array();
  for (const auto& [set, p] : dist.support()) support.push_back({{"set", node_list(set)}, {"p", p}});
  return {{"support", support}};
}

SeedDistribution seed_distribution_from_json(const Json& doc) {
  if (doc.is_object() && doc.contains("s_max")) {
    const SeedLaw law = doc.contains("law") ? seed_law_from_string(as<std::string>(doc["law"], "law")) : SeedLaw::SizeThenSubset;
    return SeedDistribution::uniform_by_size(as<std::size_t>(doc["s_max"], "s_max"), law);
  }
  const Json& support = member(doc, "support");
  if (!support.is_array()) fail("field \"support\" must be an array", {{"field", "support"}});
  std::vector<std::pair<NodeSet, double>> out;
  for (const Json& item : support) {
    out.emplace_back(node_set(member(item, "set"), "set"), as<double>(member(item, "p"), "p"));
  }
  return SeedDistribution::explicit_support(std::move(out));
}

namespace {

Json node_fit_json(const NodeFitResult& fit) {
  Json out;
  out["parents"] = fit.parents;
  out["weights"] = fit.weights;
  out["loglik"] = fit.log_likelihood;
  out["n_obs"] = fit.n_obs;
  out["n_traces"] = fit.n_traces;
  out["phi"] = threshold_to_json(fit.threshold);
  out["converged"] = fit.converged;
  out["status"] = to_string(fit.status);
  out["kkt_residual"] = fit.kkt_residual;
  out["iterations"] = fit.iterations;
  out["epsilon"] = fit.epsilon;
  out["gamma"] = fit.gamma;
  if (fit.local_only) out["local_only"] = true;
  if (!fit.grid_log_likelihoods.empty()) {
    Json grid = Json::array();
    for (const auto& [spec, ll] : fit.grid_log_likelihoods) grid.push_back({{"phi", threshold_to_json(spec)}, {"loglik", ll}});
    out["grid"] = grid;
  }
  if (!fit.message.empty()) out["message"] = fit.message;
  return out;
}

FitStatus status_from_string(const std::string& s) {
  for (FitStatus st : {FitStatus::Converged, FitStatus::NotConverged, FitStatus::NotEstimated, FitStatus::Failed}) {
    if (s == to_string(st)) return st;
  }
  fail("unknown fit status", {{"field", "status"}, {"value", s}});
}

}  // namespace

Json fit_to_json(const GltModel& assembled, const std::vector<NodeFitResult>& fits) {
  Json nodes = Json::object();
  for (const NodeFitResult& fit : fits) {
    if (fit.parents.empty()) continue;
    nodes[std::to_string(fit.node)] = node_fit_json(fit);
  }
  return {{"model", model_to_json(assembled)}, {"nodes", nodes}};
}

std::vector<NodeFitResult> fits_from_json(const Json& doc) {
  const Json& nodes = member(doc, "nodes");
  if (!nodes.is_object()) fail("field \"nodes\" must be an object", {{"field", "nodes"}});
  std::vector<NodeFitResult> out;
  for (const auto& [key, value] : nodes.items()) {
    NodeFitResult fit;
    try {
      fit.node = static_cast<NodeId>(std::stol(key));
    } catch (const std::exception&) {
      fail("node keys must be integers", {{"field", "nodes"}, {"key", key}});
    }
    for (const Json& p : member(value, "parents")) fit.parents.push_back(node_id(p, "parents"));
    fit.weights = as<std::vector<double>>(member(value, "weights"), "weights");
    if (fit.weights.size() != fit.parents.size()) fail("weights and parents differ in length", {{"node", fit.node}});
    fit.log_likelihood = as<double>(member(value, "loglik"), "loglik");
    fit.n_obs = as<std::size_t>(member(value, "n_obs"), "n_obs");
    fit.threshold = threshold_from_json(member(value, "phi"));
    fit.converged = as<bool>(member(value, "converged"), "converged");
    fit.status = value.contains("status") ? status_from_string(as<std::string>(value["status"], "status"))
                                          : (fit.converged ? FitStatus::Converged : FitStatus::NotConverged);
    if (value.contains("n_traces")) fit.n_traces = as<std::size_t>(value["n_traces"], "n_traces");
    if (value.contains("kkt_residual")) fit.kkt_residual = as<double>(value["kkt_residual"], "kkt_residual");
    if (value.contains("iterations")) fit.iterations = as<int>(value["iterations"], "iterations");
    if (value.contains("epsilon")) fit.epsilon = as<double>(value["epsilon"], "epsilon");
    if (value.contains("gamma")) fit.gamma = as<double>(value["gamma"], "gamma");
    if (value.contains("local_only")) fit.local_only = as<bool>(value["local_only"], "local_only");
    if (value.contains("message")) fit.message = as<std::string>(value["message"], "message");
    if (value.contains("grid")) {
      for (const Json& g : value["grid"]) {
        fit.grid_log_likelihoods.emplace_back(threshold_from_json(member(g, "phi")), as<double>(member(g, "loglik"), "loglik"));
      }
    }
    out.push_back(std::move(fit));
  }
  return out;
}

Json inference_to_json(const GltModel& assembled, const std::vector<NodeInference>& nodes) {
  Json out_nodes = Json::object();
  for (const NodeInference& n : nodes) {
    if (n.fit.parents.empty()) continue;
    Json entry = node_fit_json(n.fit);
    entry["valid"] = n.covariance.valid;
    entry["boundary"] = n.boundary;
    if (n.covariance.valid) {
      entry["stderr"] = standard_errors(n.covariance);
      Json ci = Json::array();
      for (const Interval& iv : n.intervals) ci.push_back({iv.lower, iv.upper});
      entry["ci"] = ci;
      entry["level"] = n.intervals.empty() ? 0.95 : n.intervals.front().level;
      entry["min_eigenvalue"] = n.covariance.min_eigenvalue;
      Json cov = Json::array();
      for (Eigen::Index i = 0; i < n.covariance.covariance.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < n.covariance.covariance.cols(); ++j) row.push_back(n.covariance.covariance(i, j));
        cov.push_back(row);
      }
      entry["covariance"] = cov;
    } else if (!n.covariance.message.empty()) {
      entry["invalid_reason"] = n.covariance.message;
    }
    if (n.boundary) entry["warning"] = "boundary estimate: normal intervals unreliable";
    out_nodes[std::to_string(n.fit.node)] = entry;
  }
  return {{"model", model_to_json(assembled)}, {"nodes", out_nodes}};
}

Json identifiability_to_json(const IdentifiabilityReport& report) {
  Json nodes = Json::object();
  for (const NodeIdentifiability& n : report.nodes) {
    Json entry;
    entry["parents"] = n.parents;
    entry["verdict"] = to_string(n.verdict);
    entry["rank"] = n.rank;
    entry["rank_deficiency"] = n.rank_deficiency;
    Json witnesses = Json::array();
    for (const NodeSet& s : n.witnesses) witnesses.push_back(node_list(s));
    entry["witnesses"] = witnesses;
    if (!n.matrix.empty()) entry["matrix"] = n.matrix;
    Json achievable = Json::array();
    for (const NodeSet& s : n.achievable) achievable.push_back(node_list(s));
    entry["achievable"] = achievable;
    entry["states_explored"] = n.states_explored;
    if (!n.message.empty()) entry["message"] = n.message;
    nodes[std::to_string(n.node)] = entry;
  }
  return {{"all_identifiable", report.all_identifiable()}, {"nodes", nodes}};
}

}  // namespace glt
