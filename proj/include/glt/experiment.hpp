#pragma once

#include "glt/estimation.hpp"
#include "glt/graph.hpp"
#include "glt/io.hpp"
#include "glt/thresholds.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace glt {

// CSV-ready table. Numbers are stored in shortest round-trip form so the
// raw rows reproduce every aggregate exactly.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  std::size_t column_index(std::string_view name) const;
  double number(std::size_t row, std::string_view column) const;
  const std::string& text(std::size_t row, std::string_view column) const;
  std::string to_csv() const;
};

std::string format_number(double value);

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::size_t replications = 10;  // networks for im-comparison
  std::vector<std::size_t> nodes{100};
  std::vector<std::size_t> degrees{10};
  double rewiring = 0.2;
  std::vector<std::size_t> traces{2000};
  std::vector<double> d_max{1.0};
  std::size_t s_max = 5;
  SeedLaw seed_law = SeedLaw::SizeThenSubset;
  ThresholdSpec truth;                    // threshold law of the simulated model
  std::vector<ThresholdSpec> candidates;  // fitted threshold laws
  std::vector<double> beta_grid{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};  // Beta(1, beta) grid for fitted GLT
  std::vector<double> truth_betas{1, 2, 3, 4, 5};                // per-node Beta(1, beta) truth draws
  std::vector<std::size_t> budgets{1, 4, 7, 10, 13};
  std::size_t mc_replicates = 1000;
  std::size_t fits_per_network = 5;
  std::size_t test_size = 500;
  double level = 0.95;
  FitOptions fit;
};

const std::vector<std::string>& experiment_names();
// Defaults of the named study at full scale.
ExperimentConfig default_experiment_config(std::string_view name);
// Overrides fields of `base` present in the document.
ExperimentConfig experiment_config_from_json(const Json& doc, ExperimentConfig base);
Json experiment_config_to_json(const ExperimentConfig& config);

struct ExperimentResult {
  Table raw;
  Table summary;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

// Individual studies.
// rmae-vs-n / rmae-vs-traces: RMAE of the fitted weights over estimated nodes.
ExperimentResult run_rmae_study(const ExperimentConfig& config);
// Per-weight interval coverage; "interior" rows have a valid covariance and
// no estimate on the boundary of the truncated set.
ExperimentResult run_ci_coverage(const ExperimentConfig& config);
ExperimentResult run_activation_prediction(const ExperimentConfig& config);
ExperimentResult run_im_comparison(const ExperimentConfig& config);
ExperimentResult run_spread_comparison(const ExperimentConfig& config);

}  // namespace glt
