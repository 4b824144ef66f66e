#include "glt/error.hpp"
#include "glt/io.hpp"
#include "glt/metrics.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace glt;

namespace {

GltModel small_model() {
  const Graph g = build_graph(4, {{0, 1}, {3, 1}, {0, 2}, {1, 2}, {2, 3}});
  return GltModel(g, {0.3, 0.4, 0.2, 0.5, 0.9},
                  {make_uniform(), make_exponential_unit(), make_beta(2, 3), make_beta(1, 2)});
}

Error capture(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected an Error");
  return Error(ErrorKind::InvalidArgument, "unreachable");
}

}  // namespace

TEST_CASE("rmae") {
  const std::vector<double> y{2, 2};
  CHECK(rmae(y, y) == 0.0);
  CHECK(rmae(y, std::vector<double>{1, 3}) == doctest::Approx(0.5).epsilon(1e-15));
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> t(6), e(6), ct(6), ce(6);
    const double c = 0.1 + 10 * rng.uniform01();
    for (std::size_t i = 0; i < 6; ++i) {
      t[i] = rng.uniform01() - 0.3;
      e[i] = rng.uniform01();
      ct[i] = c * t[i];
      ce[i] = c * e[i];
    }
    CHECK(rmae(ct, ce) == doctest::Approx(rmae(t, e)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(rmae(std::vector<double>{0, 0}, std::vector<double>{1, 1}), Error);
  CHECK_THROWS_AS(rmae(std::vector<double>{1}, std::vector<double>{1, 1}), Error);
}

TEST_CASE("summary statistics") {
  const std::vector<double> v{1, 2, 3, 4};
  CHECK(mean(v) == 2.5);
  CHECK(standard_error(v) == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(median(v) == 2.5);
  CHECK(median({3, 1, 2}) == 2);
  CHECK(standard_error(std::vector<double>{7}) == 0.0);
}

TEST_CASE("graph and model documents round-trip") {
  const GltModel m = small_model();
  const Json doc = model_to_json(m);
  const GltModel back = model_from_json(parse_json(dump_json(doc)));
  CHECK(back.graph().edges().size() == m.graph().edges().size());
  for (std::size_t i = 0; i < m.weights().size(); ++i) CHECK(back.weights()[i] == m.weights()[i]);
  CHECK(back.thresholds() == m.thresholds());
  CHECK(dump_json(model_to_json(back)) == dump_json(doc));
  CHECK(dump_json(graph_to_json(graph_from_json(graph_to_json(m.graph())))) == dump_json(graph_to_json(m.graph())));
}

TEST_CASE("threshold documents") {
  for (const auto& spec : {make_uniform(), make_exponential_unit(), make_beta(0.5, 4)}) {
    CHECK(threshold_from_json(threshold_to_json(spec)) == spec);
  }
  CHECK_THROWS_AS(threshold_from_json(parse_json(R"({"family":"gamma"})")), Error);
  CHECK_THROWS_AS(threshold_from_json(parse_json(R"({"family":"beta","alpha":-1,"beta":2})")), Error);
}

TEST_CASE("model documents are validated") {
  CHECK_THROWS_AS(model_from_json(parse_json(R"({"n":2,"edges":[[0,1]],"weights":[1.5],
      "thresholds":[{"family":"uniform"},{"family":"uniform"}]})")),
                  Error);
  CHECK_THROWS_AS(model_from_json(parse_json(R"({"n":2,"edges":[[0,1]],"weights":[0.5]})")), Error);
  CHECK_THROWS_AS(graph_from_json(parse_json(R"({"n":2,"edges":[[0,0]]})")), Error);
  CHECK_THROWS_AS(graph_from_json(parse_json(R"({"n":2,"edges":[[0,5]]})")), Error);
}

TEST_CASE("parse errors carry positions") {
  const Error e = capture([] { parse_json("{\n  \"n\": 3,\n  oops\n}", "g.json"); });
  CHECK(e.kind() == ErrorKind::Parse);
  CHECK(e.details().at("line") == 3);
  CHECK(e.details().contains("column"));
  CHECK(e.details().at("source") == "g.json");
}

TEST_CASE("trace JSONL round trip and line numbers") {
  const GltModel m = small_model();
  Rng rng(3);
  std::vector<Trace> traces;
  for (int i = 0; i < 10; ++i) traces.push_back(simulate_trace(m, NodeSet{0}, rng));
  const std::string text = traces_to_jsonl(traces);
  CHECK(std::count(text.begin(), text.end(), '\n') == 10);
  CHECK(traces_from_jsonl(text, &m.graph()) == traces);
  CHECK(traces_to_jsonl(traces_from_jsonl(text)) == text);
  CHECK(traces_from_jsonl("\n" + text + "\n\n") == traces);

  const std::string bad_json = text.substr(0, text.find('\n') + 1) + "{\"steps\": [[0]\n";
  const Error e1 = capture([&] { traces_from_jsonl(bad_json, nullptr, "t.jsonl"); });
  CHECK(e1.details().at("line") == 2);
  CHECK(e1.details().at("source") == "t.jsonl");

  // Node 3 has no parent in the seed step.
  const std::string infeasible = text + "{\"steps\":[[0],[3]]}\n";
  const Error e2 = capture([&] { traces_from_jsonl(infeasible, &m.graph(), "t.jsonl"); });
  CHECK(e2.kind() == ErrorKind::InfeasibleTrace);
  CHECK(e2.details().at("line") == 11);
}

TEST_CASE("pseudo-trace JSONL") {
  const std::vector<PseudoTrace> records{{1, NodeSet{0, 3}, true}, {2, NodeSet{1}, false}};
  const std::string text = pseudo_traces_to_jsonl(records);
  const auto back = pseudo_traces_from_jsonl(text);
  REQUIRE(back.size() == 2);
  CHECK(back[0].node == 1);
  CHECK(back[0].active_parents == NodeSet{0, 3});
  CHECK(back[0].activated);
  CHECK_FALSE(back[1].activated);
  CHECK(pseudo_traces_to_jsonl(back) == text);
  const Error e = capture([] { pseudo_traces_from_jsonl("{\"node\":1,\"active_parents\":[0],\"y\":1}\n{\"node\":1}\n"); });
  CHECK(e.details().at("line") == 2);
}

TEST_CASE("seed distribution documents") {
  const auto fixed = SeedDistribution::explicit_support({{NodeSet{0}, 0.25}, {NodeSet{0, 1}, 0.75}});
  const auto back = seed_distribution_from_json(seed_distribution_to_json(fixed));
  CHECK(back.is_explicit());
  CHECK(dump_json(seed_distribution_to_json(back)) == dump_json(seed_distribution_to_json(fixed)));
  const auto by_size = SeedDistribution::uniform_by_size(3, SeedLaw::UniformOverSets);
  const auto back2 = seed_distribution_from_json(seed_distribution_to_json(by_size));
  CHECK(back2.s_max() == 3);
  CHECK(back2.law() == SeedLaw::UniformOverSets);
  CHECK_THROWS_AS(seed_law_from_string("whatever"), Error);
}

TEST_CASE("fit documents round-trip") {
  const GltModel m = small_model();
  const auto traces = simulate_traces(m, SeedDistribution::uniform_by_size(2), 300, 9);
  const std::vector<ThresholdSpec> specs(4, make_uniform());
  const auto fits = fit_all(traces, m.graph(), specs);
  const GltModel assembled = assemble_model(m.graph(), fits, make_uniform());
  const Json doc = fit_to_json(assembled, fits);
  const auto back = fits_from_json(parse_json(dump_json(doc)));
  CHECK(dump_json(fit_to_json(model_from_json(doc), back)) == dump_json(doc));
  CHECK(dump_json(model_to_json(model_from_json(doc))) == dump_json(model_to_json(assembled)));
}

TEST_CASE("atomic file writes") {
  const auto dir = std::filesystem::temp_directory_path() / "glt_io_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "doc.json").string();
  write_text_file(path, "{\"a\": 1}\n");
  write_text_file(path, "{\"a\": 2}\n");
  CHECK(read_json_file(path).at("a") == 2);
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  CHECK_THROWS_AS(read_text_file((dir / "missing.json").string()), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("batch simulation does not depend on the thread count") {
  const GltModel m = small_model();
  const auto dist = SeedDistribution::uniform_by_size(2);
  const auto one = simulate_traces(m, dist, 200, 77, 1);
  CHECK(simulate_traces(m, dist, 200, 77, 4) == one);
  CHECK(simulate_traces(m, dist, 200, 78, 1) != one);
  for (const auto& t : one) CHECK_NOTHROW(validate_trace(m.graph(), t));
}
