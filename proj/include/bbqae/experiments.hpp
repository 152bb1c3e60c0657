// Copyright 2026 The bbqae developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bbqae/io.hpp"
#include "bbqae/trainer.hpp"

namespace bbqae {

enum class ExperimentKind { tolerance_sweep, impedance, cross_test, dataset_stats, entropy_flow };

std::string to_string(ExperimentKind kind);

/// Flat key-value config file: `key = value` lines, `#` comments, optional
/// `[section]` headers. Lists are comma separated at top nesting level, so
/// brainbox lists like (1,1),(2) parse as two entries.
using ConfigSection = std::map<std::string, std::string>;
std::map<std::string, ConfigSection> parse_config_file(const std::string& path);
std::vector<std::string> split_top_level(const std::string& text);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::tolerance_sweep;
  int n_in = 4;
  std::vector<std::vector<int>> brainboxes = {{1}};
  std::vector<double> p_grid;                 // default 0, 0.05, ..., 0.5
  NoiseKind train_channel = NoiseKind::bit_flip;
  double p_train = 0.1;
  std::vector<NoiseKind> test_channels = {NoiseKind::bit_flip, NoiseKind::depolarizing,
                                          NoiseKind::erasure};
  std::vector<double> p_test_grid = {0.1, 0.2, 0.3, 0.4};
  int n_data = 200;
  int n_test = 200;
  int n_seeds = 3;
  TrainerConfig trainer;
  uint64_t seed = 42;
  unsigned threads = 1;
  std::string out_dir = ".";
  std::string checkpoint_in;
  std::string checkpoint_out;
  std::string dataset_in;
  std::string dataset_out;

  /// Merges the file's global section and the section named after `kind`
  /// (missing file keys keep defaults).
  static ExperimentConfig from_file(const std::string& path, ExperimentKind kind);
  static ExperimentConfig from_sections(const std::map<std::string, ConfigSection>& sections,
                                        ExperimentKind kind);

  NetworkTopology topology(std::size_t bb_index = 0) const;
  void validate() const;

  // Documented substream derivation; every run in a result file is
  // reproducible from (seed, these indices) alone.
  uint64_t data_seed(std::size_t p_index, int seed_index) const;
  uint64_t init_seed(int seed_index) const;  // shared across brainboxes and p
  uint64_t test_seed(std::size_t p_index, int seed_index, std::size_t channel_index = 0) const;
};

/// Per-sample test fidelities of a trained map against the target, computed
/// through the adjoint-propagated target observable.
std::vector<double> evaluate_fidelities(const QuantumMap& map, const NoisyDataset& dataset,
                                        const TargetState& target);

struct SweepRun {
  double p = 0.0;
  int seed_index = 0;
  uint64_t data_seed = 0, init_seed = 0, test_seed = 0;
  double mean_test_fidelity = 0.0;
  double std_test_fidelity = 0.0;
  double final_train_fidelity = 0.0;
  std::optional<double> impedance;  // Z(fidelity_target) on the training trace
};

struct SweepCell {
  double p = 0.0;
  std::vector<SweepRun> runs;
  double best_mean = 0.0;
  double median_mean = 0.0;
};

struct SweepResult {
  std::string topology_label;
  std::string brainbox_label;
  std::vector<SweepCell> cells;
  std::optional<double> threshold;  // largest grid p with best mean >= 0.99
};

SweepResult run_tolerance_sweep(const ExperimentConfig& config);

struct ImpedanceCell {
  std::string brainbox_label;
  double p = 0.0;
  std::vector<std::optional<double>> z;  // per seed index
  std::optional<double> best_z;
  std::optional<double> median_z;
};

struct ImpedanceResult {
  std::vector<ImpedanceCell> cells;
};

ImpedanceResult run_impedance_table(const ExperimentConfig& config);

struct CrossTestCell {
  NoiseKind channel = NoiseKind::bit_flip;
  double p_test = 0.0;
  int seed_index = 0;
  double reconstruction_error = 0.0;
};

struct CrossTestResult {
  std::string topology_label;
  std::string brainbox_label;
  NoiseKind train_channel = NoiseKind::bit_flip;
  double p_train = 0.0;
  std::vector<double> train_fidelity;  // per seed index
  std::vector<CrossTestCell> cells;
};

CrossTestResult run_cross_test(const ExperimentConfig& config);

struct DatasetStatsRow {
  double p = 0.0;
  double exact_ideal_weight = 0.0;
  double exact_top_other_weight = 0.0;
};

struct DatasetStatsSample {
  double p = 0.0;
  int seed_index = 0;
  double ideal_frequency = 0.0;
  double top_other_frequency = 0.0;
  bool ideal_strictly_most_frequent = true;
};

struct DatasetStatsResult {
  std::vector<DatasetStatsRow> exact;
  std::vector<DatasetStatsSample> sampled;
};

DatasetStatsResult run_dataset_stats(const ExperimentConfig& config);

struct EntropyFlowResult {
  std::string topology_label;
  double p = 0.0;
  TrainingTrace trace;                       // with per-iteration layer entropies
  std::vector<LayerEntropyRecord> final_entropies;
  double final_train_fidelity = 0.0;
  bool entropy_inversion = false;  // encoder carries more entropy than decoder
};

EntropyFlowResult run_entropy_flow(const ExperimentConfig& config);

// File emission (CSV + manifest.json under config.out_dir).
void write_sweep_result(const ExperimentConfig& config, const SweepResult& result);
void write_impedance_result(const ExperimentConfig& config, const ImpedanceResult& result);
void write_cross_test_result(const ExperimentConfig& config, const CrossTestResult& result);
void write_dataset_stats_result(const ExperimentConfig& config, const DatasetStatsResult& result);
void write_entropy_flow_result(const ExperimentConfig& config, const EntropyFlowResult& result);
void write_trace_csv(const std::string& path, const TrainingTrace& trace, int n_layers);

/// Entry point behind the bbqae binary. Exit codes: 0 success, 1 config or
/// usage error, 2 numeric error.
int cli_main(int argc, char** argv);

}  // namespace bbqae
