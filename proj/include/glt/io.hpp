#pragma once

#include "glt/diagnostics.hpp"
#include "glt/estimation.hpp"
#include "glt/graph.hpp"
#include "glt/inference.hpp"
#include "glt/likelihood.hpp"
#include "glt/model.hpp"
#include "glt/thresholds.hpp"

#include <json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace glt {

using Json = nlohmann::ordered_json;

// Parse failures carry {"line", "column"} (documents) or {"line"} (JSONL)
// plus the source name in the error details.
Json parse_json(std::string_view text, std::string_view source = "<input>");
std::string read_text_file(const std::string& path);
// Writes to a sibling temporary file and renames it into place.
void write_text_file(const std::string& path, std::string_view content);
Json read_json_file(const std::string& path);
std::string dump_json(const Json& doc);  // two-space indent plus a trailing newline

// {"n": int, "edges": [[parent, child], ...]}; edges canonicalised on load.
Json graph_to_json(const Graph& graph);
Graph graph_from_json(const Json& doc);

// {"family": "uniform"} | {"family": "exponential"} | {"family": "beta", "alpha": a, "beta": b}
Json threshold_to_json(const ThresholdSpec& spec);
ThresholdSpec threshold_from_json(const Json& doc);

// Graph fields plus "weights" (canonical edge order) and "thresholds" (per node).
// A fit document is accepted as well; its "model" member is used.
Json model_to_json(const GltModel& model);
GltModel model_from_json(const Json& doc);

// {"steps": [[...], [...], ...]}
Json trace_to_json(const Trace& trace);
Trace trace_from_json(const Json& doc);
std::string traces_to_jsonl(const std::vector<Trace>& traces);
// Blank lines are skipped. With a graph every trace is validated and the
// error names the offending line.
std::vector<Trace> traces_from_jsonl(std::string_view text, const Graph* graph = nullptr,
                                     std::string_view source = "<input>");

// {"node": v, "active_parents": [...], "y": 0|1}
Json pseudo_trace_to_json(const PseudoTrace& record);
PseudoTrace pseudo_trace_from_json(const Json& doc);
std::string pseudo_traces_to_jsonl(const std::vector<PseudoTrace>& records);
std::vector<PseudoTrace> pseudo_traces_from_jsonl(std::string_view text, std::string_view source = "<input>");

// {"support": [{"set": [...], "p": x}, ...]} or {"s_max": k, "law": "size-then-subset" | "uniform-over-sets"}
Json seed_distribution_to_json(const SeedDistribution& dist);
SeedDistribution seed_distribution_from_json(const Json& doc);
const char* to_string(SeedLaw law) noexcept;
SeedLaw seed_law_from_string(std::string_view name);

// {"model": {...}, "nodes": {"v": {...}}} for every node with parents.
Json fit_to_json(const GltModel& assembled, const std::vector<NodeFitResult>& fits);
std::vector<NodeFitResult> fits_from_json(const Json& doc);

struct NodeInference {
  NodeFitResult fit;
  CovarianceResult covariance;
  std::vector<Interval> intervals;  // empty when the covariance is invalid
  bool boundary = false;
};

// Fit document with "stderr", "ci", "valid" and "boundary" added per node.
Json inference_to_json(const GltModel& assembled, const std::vector<NodeInference>& nodes);

Json identifiability_to_json(const IdentifiabilityReport& report);

}  // namespace glt
