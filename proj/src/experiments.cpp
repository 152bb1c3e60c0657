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

#include "bbqae/experiments.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

namespace bbqae {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (trim(value.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "': cannot parse number '" + value + "'");
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (trim(value.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "': cannot parse integer '" + value + "'");
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const std::string& item : split_top_level(value)) out.push_back(parse_double(key, item));
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

double sample_std(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return (n % 2 == 1) ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  return out;
}

json trainer_json(const TrainerConfig& t) {
  json j;
  j["epsilon"] = t.epsilon;
  j["eta"] = t.eta;
  j["n_iterations"] = t.n_iterations;
  j["fidelity_target"] = t.fidelity_target;
  j["checkpoint_every"] = t.checkpoint_every;
  j["target_mode"] = t.target_mode == TrainingTargetMode::dataset_mean ? "dataset_mean"
                     : t.target_mode == TrainingTargetMode::per_sample_input ? "per_sample_input"
                                                                             : "fixed_target";
  j["update_order"] = t.update_order == UpdateOrder::layerwise      ? "layerwise"
                      : t.update_order == UpdateOrder::synchronous ? "synchronous"
                                                                   : "per_neuron";
  return j;
}

json config_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = to_string(c.kind);
  j["n_in"] = c.n_in;
  json bbs = json::array();
  for (const auto& bb : c.brainboxes) bbs.push_back(bb);
  j["brainboxes"] = bbs;
  j["p_grid"] = c.p_grid;
  j["train_channel"] = to_string(c.train_channel);
  j["p_train"] = c.p_train;
  json channels = json::array();
  for (auto ch : c.test_channels) channels.push_back(to_string(ch));
  j["test_channels"] = channels;
  j["p_test_grid"] = c.p_test_grid;
  j["n_data"] = c.n_data;
  j["n_test"] = c.n_test;
  j["n_seeds"] = c.n_seeds;
  j["trainer"] = trainer_json(c.trainer);
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["out_dir"] = c.out_dir;
  if (!c.checkpoint_in.empty()) j["checkpoint_in"] = c.checkpoint_in;
  if (!c.checkpoint_out.empty()) j["checkpoint_out"] = c.checkpoint_out;
  if (!c.dataset_in.empty()) j["dataset_in"] = c.dataset_in;
  if (!c.dataset_out.empty()) j["dataset_out"] = c.dataset_out;
  return j;
}

void write_manifest(const ExperimentConfig& config, json extra,
                    const std::vector<std::string>& outputs) {
  json j;
  j["tool"] = "bbqae";
  j["version"] = "0.1.0";
  j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
               "." + std::to_string(EIGEN_MINOR_VERSION);
  j["config"] = config_json(config);
  j["outputs"] = outputs;
  if (!extra.is_null()) j["results"] = std::move(extra);
  auto out = open_csv(fs::path(config.out_dir) / "manifest.json");
  out << j.dump(2) << "\n";
}

void ensure_out_dir(const ExperimentConfig& config) {
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + config.out_dir + "'");
}

std::string opt_to_string(const std::optional<double>& v) {
  return v ? format_real(*v) : "none";
}

// One trained model plus its held-out evaluation, the unit every experiment
// is made of.
struct TrainedRun {
  QuantumMap map;
  TrainingTrace trace;
  NoisyDataset train_ds;
  double final_train_fidelity = 0.0;
};

TrainedRun train_once(const ExperimentConfig& config, const NetworkTopology& topo,
                      const TargetState& target, double p, uint64_t data_seed,
                      uint64_t init_seed, bool record_entropies = false) {
  NoiseSpec spec{config.train_channel, p, data_seed};
  NoisyDataset ds = config.dataset_in.empty() ? sample_channel(target, spec, config.n_data)
                                              : load_dataset(config.dataset_in);
  TrainerConfig tcfg = config.trainer;
  tcfg.record_entropies = record_entropies;
  auto [map, trace] = train(init_random_map(topo, init_seed), ds, target, tcfg);
  TrainedRun run{std::move(map), std::move(trace), std::move(ds), 0.0};
  run.final_train_fidelity = run.trace.entries.back().fidelity;
  return run;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::tolerance_sweep: return "sweep";
    case ExperimentKind::impedance: return "impedance";
    case ExperimentKind::cross_test: return "crosstest";
    case ExperimentKind::dataset_stats: return "datastats";
    case ExperimentKind::entropy_flow: return "entropy";
  }
  throw ConfigError("unknown experiment kind");
}

std::vector<std::string> split_top_level(const std::string& text) {
  std::vector<std::string> out;
  std::string current;
  int depth = 0;
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      if (!trim(current).empty()) out.push_back(trim(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (!trim(current).empty()) out.push_back(trim(current));
  return out;
}

std::map<std::string, ConfigSection> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::map<std::string, ConfigSection> sections;
  std::string section;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']')
        throw ConfigError(path + ":" + std::to_string(line_no) + ": unterminated section header");
      section = trim(text.substr(1, text.size() - 2));
      sections[section];
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty()) throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key");
    sections[section][key] = value;
  }
  return sections;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path, ExperimentKind kind) {
  return from_sections(parse_config_file(path), kind);
}

ExperimentConfig ExperimentConfig::from_sections(
    const std::map<std::string, ConfigSection>& sections, ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  ConfigSection merged;
  if (auto it = sections.find(""); it != sections.end())
    for (const auto& [k, v] : it->second) merged[k] = v;
  if (auto it = sections.find(to_string(kind)); it != sections.end())
    for (const auto& [k, v] : it->second) merged[k] = v;

  for (const auto& [key, value] : merged) {
    if (key == "n_in") c.n_in = static_cast<int>(parse_int(key, value));
    else if (key == "brainbox") c.brainboxes = {NetworkTopology::parse_layer_list(value)};
    else if (key == "brainboxes") {
      c.brainboxes.clear();
      for (const std::string& item : split_top_level(value))
        c.brainboxes.push_back(NetworkTopology::parse_layer_list(item));
      if (c.brainboxes.empty()) throw ConfigError("config key 'brainboxes': empty list");
    } else if (key == "p_grid") c.p_grid = parse_double_list(key, value);
    else if (key == "p_test_grid") c.p_test_grid = parse_double_list(key, value);
    else if (key == "p" || key == "p_train") c.p_train = parse_double(key, value);
    else if (key == "channel") c.train_channel = noise_kind_from_string(value);
    else if (key == "test_channels") {
      c.test_channels.clear();
      for (const std::string& item : split_top_level(value))
        c.test_channels.push_back(noise_kind_from_string(item));
    } else if (key == "n_data") c.n_data = static_cast<int>(parse_int(key, value));
    else if (key == "n_test") c.n_test = static_cast<int>(parse_int(key, value));
    else if (key == "n_seeds") c.n_seeds = static_cast<int>(parse_int(key, value));
    else if (key == "n_iterations") c.trainer.n_iterations = static_cast<int>(parse_int(key, value));
    else if (key == "epsilon") c.trainer.epsilon = parse_double(key, value);
    else if (key == "eta") c.trainer.eta = parse_double(key, value);
    else if (key == "fidelity_target") c.trainer.fidelity_target = parse_double(key, value);
    else if (key == "checkpoint_every")
      c.trainer.checkpoint_every = static_cast<int>(parse_int(key, value));
    else if (key == "target_mode") {
      if (value == "dataset_mean") c.trainer.target_mode = TrainingTargetMode::dataset_mean;
      else if (value == "per_sample_input")
        c.trainer.target_mode = TrainingTargetMode::per_sample_input;
      else if (value == "fixed_target") c.trainer.target_mode = TrainingTargetMode::fixed_target;
      else throw ConfigError("config key 'target_mode': unknown value '" + value + "'");
    } else if (key == "update_order") {
      if (value == "layerwise") c.trainer.update_order = UpdateOrder::layerwise;
      else if (value == "synchronous") c.trainer.update_order = UpdateOrder::synchronous;
      else if (value == "per_neuron") c.trainer.update_order = UpdateOrder::per_neuron;
      else throw ConfigError("config key 'update_order': unknown value '" + value + "'");
    } else if (key == "seed") c.seed = static_cast<uint64_t>(parse_int(key, value));
    else if (key == "threads") c.threads = static_cast<unsigned>(parse_int(key, value));
    else if (key == "out_dir") c.out_dir = value;
    else if (key == "checkpoint_in") c.checkpoint_in = value;
    else if (key == "checkpoint_out") c.checkpoint_out = value;
    else if (key == "dataset_in") c.dataset_in = value;
    else if (key == "dataset_out") c.dataset_out = value;
    else if (key == "experiment") { /* informational; the subcommand decides */ }
    else throw ConfigError("unknown config key '" + key + "'");
  }
  if (c.p_grid.empty())
    for (int i = 0; i <= 10; ++i) c.p_grid.push_back(static_cast<double>(i) / 20.0);
  return c;
}

NetworkTopology ExperimentConfig::topology(std::size_t bb_index) const {
  if (bb_index >= brainboxes.size()) throw ConfigError("brainbox index out of range");
  return NetworkTopology::autoencoder_shell(n_in, brainboxes[bb_index]);
}

void ExperimentConfig::validate() const {
  try {
    if (n_in < 2) throw ConfigError("n_in must be at least 2");
    if (n_data < 1 || n_test < 1) throw ConfigError("n_data and n_test must be positive");
    if (n_seeds < 1) throw ConfigError("n_seeds must be positive");
    for (std::size_t b = 0; b < brainboxes.size(); ++b) (void)topology(b);
    trainer.validate();
    const double hi = (train_channel == NoiseKind::bit_flip) ? 0.5 : 1.0;
    for (double p : p_grid)
      if (!(p >= 0.0 && p <= hi))
        throw ConfigError("p_grid value " + format_real(p) + " outside [0, " + format_real(hi) +
                          "]");
    if (!(p_train >= 0.0 && p_train <= hi))
      throw ConfigError("p_train outside the channel's valid range");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

uint64_t ExperimentConfig::data_seed(std::size_t p_index, int seed_index) const {
  return derive_seed(seed, 0xDA7A, p_index, static_cast<uint64_t>(seed_index));
}

uint64_t ExperimentConfig::init_seed(int seed_index) const {
  return derive_seed(seed, 0x1217, static_cast<uint64_t>(seed_index));
}

uint64_t ExperimentConfig::test_seed(std::size_t p_index, int seed_index,
                                     std::size_t channel_index) const {
  return derive_seed(seed, 0x7E57 + channel_index, p_index, static_cast<uint64_t>(seed_index));
}

std::vector<double> evaluate_fidelities(const QuantumMap& map, const NoisyDataset& dataset,
                                        const TargetState& target) {
  const Matrix pulled = pullback_observable(map, target.projector);
  std::vector<double> out;
  out.reserve(dataset.samples.size());
  for (const NoiseRealization& s : dataset.samples) {
    const double f = std::real(s.state.dot(pulled * s.state));
    out.push_back(std::clamp(f, 0.0, 1.0));
  }
  return out;
}

SweepResult run_tolerance_sweep(const ExperimentConfig& config) {
  config.validate();
  if (config.train_channel != NoiseKind::bit_flip)
    throw ConfigError("tolerance sweeps are defined for the bit-flip channel");
  const NetworkTopology topo = config.topology();
  const TargetState target = make_ghz(config.n_in);

  SweepResult result;
  result.topology_label = topo.label();
  result.brainbox_label = topo.brainbox_label();
  result.cells.resize(config.p_grid.size());

  const std::size_t n_runs = config.p_grid.size() * static_cast<std::size_t>(config.n_seeds);
  std::vector<SweepRun> runs(n_runs);
  parallel_for(n_runs, config.threads, [&](std::size_t idx) {
    const std::size_t pi = idx / static_cast<std::size_t>(config.n_seeds);
    const int s = static_cast<int>(idx % static_cast<std::size_t>(config.n_seeds));
    const double p = config.p_grid[pi];
    SweepRun run;
    run.p = p;
    run.seed_index = s;
    run.data_seed = config.data_seed(pi, s);
    run.init_seed = config.init_seed(s);
    run.test_seed = config.test_seed(pi, s);
    TrainedRun trained =
        train_once(config, topo, target, p, run.data_seed, run.init_seed);
    run.final_train_fidelity = trained.final_train_fidelity;
    run.impedance = training_impedance(trained.trace, config.trainer.fidelity_target,
                                       config.trainer.n_iterations);
    const NoisyDataset test_ds =
        sample_channel(target, NoiseSpec{config.train_channel, p, run.test_seed}, config.n_test);
    const std::vector<double> fs = evaluate_fidelities(trained.map, test_ds, target);
    run.mean_test_fidelity =
        pairwise_sum(std::vector<double>(fs)) / static_cast<double>(fs.size());
    run.std_test_fidelity = sample_std(fs, run.mean_test_fidelity);
    runs[idx] = std::move(run);
  });

  for (std::size_t pi = 0; pi < config.p_grid.size(); ++pi) {
    SweepCell& cell = result.cells[pi];
    cell.p = config.p_grid[pi];
    std::vector<double> means;
    for (int s = 0; s < config.n_seeds; ++s) {
      cell.runs.push_back(runs[pi * static_cast<std::size_t>(config.n_seeds) +
                               static_cast<std::size_t>(s)]);
      means.push_back(cell.runs.back().mean_test_fidelity);
    }
    cell.best_mean = *std::max_element(means.begin(), means.end());
    cell.median_mean = median(means);
    if (cell.best_mean >= config.trainer.fidelity_target)
      result.threshold = cell.p;  // grid is ascending; keeps the largest such p
  }
  // A threshold only counts if every smaller grid point also qualifies is NOT
  // required: the paper reads the largest qualifying p off the grid.
  return result;
}

ImpedanceResult run_impedance_table(const ExperimentConfig& config) {
  config.validate();
  const TargetState target = make_ghz(config.n_in);
  ImpedanceResult result;
  const std::size_t n_cells = config.brainboxes.size() * config.p_grid.size();
  result.cells.resize(n_cells);
  const std::size_t n_runs = n_cells * static_cast<std::size_t>(config.n_seeds);
  std::vector<std::optional<double>> zs(n_runs);
  parallel_for(n_runs, config.threads, [&](std::size_t idx) {
    const std::size_t cell = idx / static_cast<std::size_t>(config.n_seeds);
    const int s = static_cast<int>(idx % static_cast<std::size_t>(config.n_seeds));
    const std::size_t bi = cell / config.p_grid.size();
    const std::size_t pi = cell % config.p_grid.size();
    // Shared data and init streams across brainboxes make the comparison
    // paired: same datasets, same draws for same-shaped unitaries.
    TrainedRun trained = train_once(config, config.topology(bi), target, config.p_grid[pi],
                                    config.data_seed(pi, s), config.init_seed(s));
    zs[idx] = training_impedance(trained.trace, config.trainer.fidelity_target,
                                 config.trainer.n_iterations);
  });
  for (std::size_t cell = 0; cell < n_cells; ++cell) {
    const std::size_t bi = cell / config.p_grid.size();
    const std::size_t pi = cell % config.p_grid.size();
    ImpedanceCell& out = result.cells[cell];
    out.brainbox_label = config.topology(bi).brainbox_label();
    out.p = config.p_grid[pi];
    std::vector<double> reached;
    for (int s = 0; s < config.n_seeds; ++s) {
      out.z.push_back(zs[cell * static_cast<std::size_t>(config.n_seeds) +
                         static_cast<std::size_t>(s)]);
      if (out.z.back()) reached.push_back(*out.z.back());
    }
    if (!reached.empty()) {
      out.best_z = *std::min_element(reached.begin(), reached.end());
      out.median_z = median(reached);
    }
  }
  return result;
}

CrossTestResult run_cross_test(const ExperimentConfig& config) {
  config.validate();
  const NetworkTopology topo = config.topology();
  const TargetState target = make_ghz(config.n_in);

  CrossTestResult result;
  result.topology_label = topo.label();
  result.brainbox_label = topo.brainbox_label();
  result.train_channel = config.train_channel;
  result.p_train = config.p_train;

  // Either evaluate a stored checkpoint (one pseudo-seed) or train fresh maps.
  std::vector<QuantumMap> maps;
  if (!config.checkpoint_in.empty()) {
    maps.push_back(load_checkpoint(config.checkpoint_in).map);
    result.train_fidelity.push_back(std::nan(""));
  } else {
    maps.resize(static_cast<std::size_t>(config.n_seeds));
    result.train_fidelity.resize(static_cast<std::size_t>(config.n_seeds));
    parallel_for(static_cast<std::size_t>(config.n_seeds), config.threads, [&](std::size_t s) {
      TrainedRun trained =
          train_once(config, topo, target, config.p_train,
                     derive_seed(config.seed, 0xC0DA, s), config.init_seed(static_cast<int>(s)));
      maps[s] = std::move(trained.map);
      result.train_fidelity[s] = trained.final_train_fidelity;
    });
  }

  for (std::size_t s = 0; s < maps.size(); ++s) {
    for (std::size_t ci = 0; ci < config.test_channels.size(); ++ci) {
      const NoiseKind channel = config.test_channels[ci];
      for (std::size_t pi = 0; pi < config.p_test_grid.size(); ++pi) {
        const double p_test = config.p_test_grid[pi];
        const NoiseSpec spec{channel, p_test,
                             config.test_seed(pi, static_cast<int>(s), ci + 1)};
        const NoisyDataset test_ds = sample_channel(target, spec, config.n_test);
        const std::vector<double> fs = evaluate_fidelities(maps[s], test_ds, target);
        CrossTestCell cell;
        cell.channel = channel;
        cell.p_test = p_test;
        cell.seed_index = static_cast<int>(s);
        cell.reconstruction_error =
            1.0 - pairwise_sum(std::vector<double>(fs)) / static_cast<double>(fs.size());
        result.cells.push_back(cell);
      }
    }
  }
  return result;
}

DatasetStatsResult run_dataset_stats(const ExperimentConfig& config) {
  config.validate();
  if (config.train_channel != NoiseKind::bit_flip)
    throw ConfigError("dataset statistics are defined for the bit-flip channel");
  const TargetState target = make_ghz(config.n_in);
  DatasetStatsResult result;
  for (std::size_t pi = 0; pi < config.p_grid.size(); ++pi) {
    const double p = config.p_grid[pi];
    const DistributionReport exact = distribution_report(enumerate_bit_flip(target, p));
    result.exact.push_back(
        DatasetStatsRow{p, exact.target_frequency, exact.top_other_frequency});
    for (int s = 0; s < config.n_seeds; ++s) {
      const DistributionReport sampled = distribution_report(
          sample_bit_flip(target, p, config.n_data, config.data_seed(pi, s)));
      DatasetStatsSample row;
      row.p = p;
      row.seed_index = s;
      row.ideal_frequency = sampled.target_frequency;
      row.top_other_frequency = sampled.top_other_frequency;
      row.ideal_strictly_most_frequent = sampled.target_strictly_most_frequent;
      result.sampled.push_back(row);
    }
  }
  return result;
}

EntropyFlowResult run_entropy_flow(const ExperimentConfig& config) {
  config.validate();
  const NetworkTopology topo = config.topology();
  if (topo.total_qubits() > 14)
    throw LimitError("entropy flow needs the global register, capped at 14 qubits (topology " +
                     topo.label() + " has " + std::to_string(topo.total_qubits()) + ")");
  const TargetState target = make_ghz(config.n_in);

  EntropyFlowResult result;
  result.topology_label = topo.label();
  result.p = config.p_train;
  TrainedRun trained = train_once(config, topo, target, config.p_train, config.data_seed(0, 0),
                                  config.init_seed(0), /*record_entropies=*/true);
  result.final_train_fidelity = trained.final_train_fidelity;
  result.final_entropies =
      layer_entropies(trained.map, trained.train_ds.consolidated(), EntropyMode::channel_averaged);
  result.trace = std::move(trained.trace);

  // Inversion: encoder layers (before the brainbox) hold more entropy than
  // decoder layers (after it), and the output lies below the input.
  const int L = topo.num_layers();
  double encoder = 0.0, decoder = 0.0;
  int n_enc = 0, n_dec = 0;
  for (const LayerEntropyRecord& r : result.final_entropies) {
    if (r.layer_index <= topo.brainbox_begin) {
      encoder += r.entropy;
      ++n_enc;
    } else if (r.layer_index > topo.brainbox_end) {
      decoder += r.entropy;
      ++n_dec;
    }
  }
  const double s_in = result.final_entropies.front().entropy;
  const double s_out = result.final_entropies[static_cast<std::size_t>(L - 1)].entropy;
  result.entropy_inversion =
      n_enc > 0 && n_dec > 0 && (encoder / n_enc > decoder / n_dec) && (s_out < s_in);
  return result;
}

void write_trace_csv(const std::string& path, const TrainingTrace& trace, int n_layers) {
  auto out = open_csv(path);
  out << "iteration,fidelity";
  for (int l = 1; l <= n_layers; ++l) out << ",entropy_layer_" << l;
  out << ",elapsed_ms\n";
  for (const TraceEntry& e : trace.entries) {
    out << e.iteration << "," << format_real(e.fidelity);
    for (int l = 0; l < n_layers; ++l) {
      out << ",";
      if (l < static_cast<int>(e.layer_entropies.size()))
        out << format_real(e.layer_entropies[static_cast<std::size_t>(l)]);
    }
    out << "," << format_real(e.elapsed_ms) << "\n";
  }
}

void write_sweep_result(const ExperimentConfig& config, const SweepResult& result) {
  ensure_out_dir(config);
  {
    auto out = open_csv(fs::path(config.out_dir) / "runs.csv");
    out << "topology,brainbox,p,seed_index,data_seed,init_seed,test_seed,mean_test_fidelity,"
           "std_test_fidelity,final_train_fidelity,impedance\n";
    for (const SweepCell& cell : result.cells)
      for (const SweepRun& run : cell.runs)
        out << result.topology_label << "," << result.brainbox_label << ","
            << format_real(run.p) << "," << run.seed_index << "," << run.data_seed << ","
            << run.init_seed << "," << run.test_seed << ","
            << format_real(run.mean_test_fidelity) << "," << format_real(run.std_test_fidelity)
            << "," << format_real(run.final_train_fidelity) << ","
            << opt_to_string(run.impedance) << "\n";
  }
  {
    auto out = open_csv(fs::path(config.out_dir) / "sweep.csv");
    out << "p,best_mean_fidelity,median_mean_fidelity,best_run_std\n";
    for (const SweepCell& cell : result.cells) {
      double best_std = 0.0;
      for (const SweepRun& run : cell.runs)
        if (run.mean_test_fidelity == cell.best_mean) best_std = run.std_test_fidelity;
      out << format_real(cell.p) << "," << format_real(cell.best_mean) << ","
          << format_real(cell.median_mean) << "," << format_real(best_std) << "\n";
    }
  }
  json extra;
  extra["topology"] = result.topology_label;
  extra["threshold"] =
      result.threshold ? json(*result.threshold) : json(nullptr);
  write_manifest(config, extra, {"sweep.csv", "runs.csv"});
}

void write_impedance_result(const ExperimentConfig& config, const ImpedanceResult& result) {
  ensure_out_dir(config);
  {
    auto out = open_csv(fs::path(config.out_dir) / "impedance.csv");
    out << "brainbox,p,best_z,median_z";
    for (int s = 0; s < config.n_seeds; ++s) out << ",z_seed" << s;
    out << "\n";
    for (const ImpedanceCell& cell : result.cells) {
      out << "\"" << cell.brainbox_label << "\"," << format_real(cell.p) << ","
          << opt_to_string(cell.best_z) << "," << opt_to_string(cell.median_z);
      for (const auto& z : cell.z) out << "," << opt_to_string(z);
      out << "\n";
    }
  }
  write_manifest(config, json(), {"impedance.csv"});
}

void write_cross_test_result(const ExperimentConfig& config, const CrossTestResult& result) {
  ensure_out_dir(config);
  {
    auto out = open_csv(fs::path(config.out_dir) / "crosstest.csv");
    out << "topology,brainbox,train_channel,p_train,seed_index,test_channel,p_test,"
           "reconstruction_error\n";
    for (const CrossTestCell& cell : result.cells)
      out << result.topology_label << ",\"" << result.brainbox_label << "\","
          << to_string(result.train_channel) << "," << format_real(result.p_train) << ","
          << cell.seed_index << "," << to_string(cell.channel) << "," << format_real(cell.p_test)
          << "," << format_real(cell.reconstruction_error) << "\n";
  }
  json extra;
  extra["train_fidelity"] = result.train_fidelity;
  write_manifest(config, extra, {"crosstest.csv"});
}

void write_dataset_stats_result(const ExperimentConfig& config,
                                const DatasetStatsResult& result) {
  ensure_out_dir(config);
  {
    auto out = open_csv(fs::path(config.out_dir) / "datastats_exact.csv");
    out << "p,ideal_weight,top_other_weight\n";
    for (const DatasetStatsRow& row : result.exact)
      out << format_real(row.p) << "," << format_real(row.exact_ideal_weight) << ","
          << format_real(row.exact_top_other_weight) << "\n";
  }
  {
    auto out = open_csv(fs::path(config.out_dir) / "datastats_sampled.csv");
    out << "p,seed_index,ideal_frequency,top_other_frequency,ideal_strictly_most_frequent\n";
    for (const DatasetStatsSample& row : result.sampled)
      out << format_real(row.p) << "," << row.seed_index << ","
          << format_real(row.ideal_frequency) << "," << format_real(row.top_other_frequency)
          << "," << (row.ideal_strictly_most_frequent ? 1 : 0) << "\n";
  }
  write_manifest(config, json(), {"datastats_exact.csv", "datastats_sampled.csv"});
}

void write_entropy_flow_result(const ExperimentConfig& config, const EntropyFlowResult& result) {
  ensure_out_dir(config);
  const int n_layers = static_cast<int>(result.final_entropies.size());
  write_trace_csv((fs::path(config.out_dir) / "entropy_flow.csv").string(), result.trace,
                  n_layers);
  {
    auto out = open_csv(fs::path(config.out_dir) / "entropy_final.csv");
    out << "layer,entropy\n";
    for (const LayerEntropyRecord& r : result.final_entropies)
      out << r.layer_index << "," << format_real(r.entropy) << "\n";
  }
  json extra;
  extra["topology"] = result.topology_label;
  extra["p"] = result.p;
  extra["final_train_fidelity"] = result.final_train_fidelity;
  extra["entropy_inversion"] = result.entropy_inversion;
  write_manifest(config, extra, {"entropy_flow.csv", "entropy_final.csv"});
}

namespace {

void run_train_command(const ExperimentConfig& config) {
  ExperimentConfig cfg = config;
  cfg.validate();
  const NetworkTopology topo = cfg.topology();
  const TargetState target = make_ghz(cfg.n_in);
  ensure_out_dir(cfg);

  NoiseSpec spec{cfg.train_channel, cfg.p_train, cfg.data_seed(0, 0)};
  NoisyDataset ds = cfg.dataset_in.empty() ? sample_channel(target, spec, cfg.n_data)
                                           : load_dataset(cfg.dataset_in);
  if (!cfg.dataset_out.empty()) save_dataset(cfg.dataset_out, ds);

  CheckpointCallback on_checkpoint;
  if (cfg.trainer.checkpoint_every > 0)
    on_checkpoint = [&cfg](int n, const QuantumMap& m) {
      save_checkpoint(
          (fs::path(cfg.out_dir) / ("checkpoint_" + std::to_string(n) + ".bbqc")).string(), m,
          static_cast<uint64_t>(n));
    };
  auto [map, trace] =
      train(init_random_map(topo, cfg.init_seed(0)), ds, target, cfg.trainer, on_checkpoint);
  if (!cfg.checkpoint_out.empty())
    save_checkpoint(cfg.checkpoint_out, map,
                    static_cast<uint64_t>(cfg.trainer.n_iterations));
  write_trace_csv((fs::path(cfg.out_dir) / "trace.csv").string(), trace, topo.num_layers());
  json extra;
  extra["topology"] = topo.label();
  extra["final_train_fidelity"] = trace.entries.back().fidelity;
  const auto z =
      training_impedance(trace, cfg.trainer.fidelity_target, cfg.trainer.n_iterations);
  extra["impedance"] = z ? json(*z) : json(nullptr);
  write_manifest(cfg, extra, {"trace.csv"});
  std::cout << "trained " << topo.label() << " at p=" << format_real(cfg.p_train)
            << ": final training fidelity " << format_real(trace.entries.back().fidelity)
            << "\n";
}

void run_test_command(const ExperimentConfig& config) {
  ExperimentConfig cfg = config;
  if (cfg.checkpoint_in.empty()) throw ConfigError("test: --checkpoint-in is required");
  const Checkpoint ck = load_checkpoint(cfg.checkpoint_in);
  const TargetState target = make_ghz(ck.map.topology.layer_size(1));
  ensure_out_dir(cfg);

  NoisyDataset ds;
  if (!cfg.dataset_in.empty()) {
    ds = load_dataset(cfg.dataset_in);
  } else {
    NoiseSpec spec{cfg.train_channel, cfg.p_train, cfg.test_seed(0, 0)};
    ds = sample_channel(target, spec, cfg.n_test);
  }
  if (!cfg.dataset_out.empty()) save_dataset(cfg.dataset_out, ds);
  const std::vector<double> fs = evaluate_fidelities(ck.map, ds, target);
  const double mean = pairwise_sum(std::vector<double>(fs)) / static_cast<double>(fs.size());
  {
    auto out = open_csv(fs::path(cfg.out_dir) / "test_fidelities.csv");
    out << "sample_index,fidelity\n";
    for (std::size_t i = 0; i < fs.size(); ++i)
      out << i << "," << format_real(fs[i]) << "\n";
  }
  json extra;
  extra["mean_fidelity"] = mean;
  extra["std_fidelity"] = sample_std(fs, mean);
  extra["reconstruction_error"] = 1.0 - mean;
  write_manifest(cfg, extra, {"test_fidelities.csv"});
  std::cout << "mean fidelity " << format_real(mean) << " (reconstruction error "
            << format_real(1.0 - mean) << ") over " << fs.size() << " states\n";
}

struct CliOverrides {
  std::string config_file;
  std::optional<uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<unsigned> threads;
  std::optional<std::string> checkpoint_in, checkpoint_out, dataset_in, dataset_out;
  std::optional<std::string> brainbox;
  std::optional<int> n_in, n_data, n_test, n_seeds, n_iterations;
  std::optional<double> p;
  std::optional<std::string> channel;

  ExperimentConfig resolve(ExperimentKind kind) const {
    ExperimentConfig cfg =
        config_file.empty()
            ? ExperimentConfig::from_sections({}, kind)
            : ExperimentConfig::from_file(config_file, kind);
    cfg.kind = kind;
    if (seed) cfg.seed = *seed;
    if (out_dir) cfg.out_dir = *out_dir;
    if (threads) cfg.threads = *threads;
    if (checkpoint_in) cfg.checkpoint_in = *checkpoint_in;
    if (checkpoint_out) cfg.checkpoint_out = *checkpoint_out;
    if (dataset_in) cfg.dataset_in = *dataset_in;
    if (dataset_out) cfg.dataset_out = *dataset_out;
    if (brainbox) cfg.brainboxes = {NetworkTopology::parse_layer_list(*brainbox)};
    if (n_in) cfg.n_in = *n_in;
    if (n_data) cfg.n_data = *n_data;
    if (n_test) cfg.n_test = *n_test;
    if (n_seeds) cfg.n_seeds = *n_seeds;
    if (n_iterations) cfg.trainer.n_iterations = *n_iterations;
    if (p) cfg.p_train = *p;
    if (channel) cfg.train_channel = noise_kind_from_string(*channel);
    return cfg;
  }
};

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"brainbox quantum autoencoder simulator and trainer"};
  app.require_subcommand(1);
  app.fallthrough();

  CliOverrides o;
  app.add_option("--config", o.config_file, "experiment config file");
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--out-dir", o.out_dir, "output directory");
  app.add_option("--threads", o.threads, "worker threads for independent cells");
  app.add_option("--checkpoint-in", o.checkpoint_in, "checkpoint to load");
  app.add_option("--checkpoint-out", o.checkpoint_out, "checkpoint to write");
  app.add_option("--dataset-in", o.dataset_in, "dataset file to load");
  app.add_option("--dataset-out", o.dataset_out, "dataset file to write");
  app.add_option("--bb", o.brainbox, "brainbox label, e.g. (1,2)");
  app.add_option("--n-in", o.n_in, "input/output layer size");
  app.add_option("--n-data", o.n_data, "training set size");
  app.add_option("--n-test", o.n_test, "test set size");
  app.add_option("--n-seeds", o.n_seeds, "seeds per cell");
  app.add_option("--n-it", o.n_iterations, "training iterations");
  app.add_option("--p", o.p, "noise probability (train/test/crosstest/entropy)");
  app.add_option("--channel", o.channel, "noise channel (bit_flip, depolarizing, erasure)");

  auto* sweep = app.add_subcommand("sweep", "tolerance-threshold sweep over the p grid");
  auto* impedance = app.add_subcommand("impedance", "training-impedance table over brainboxes");
  auto* crosstest = app.add_subcommand("crosstest", "cross-test a trained map on other channels");
  auto* datastats = app.add_subcommand("datastats", "exact vs sampled dataset distributions");
  auto* entropy = app.add_subcommand("entropy", "layerwise entropy flow during training");
  auto* train_cmd = app.add_subcommand("train", "train a single network");
  auto* test_cmd = app.add_subcommand("test", "evaluate a checkpoint on noisy states");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sweep->parsed()) {
      const ExperimentConfig cfg = o.resolve(ExperimentKind::tolerance_sweep);
      const SweepResult result = run_tolerance_sweep(cfg);
      write_sweep_result(cfg, result);
      std::cout << "sweep of " << result.topology_label << ": threshold "
                << (result.threshold ? format_real(*result.threshold) : std::string("none"))
                << "\n";
    } else if (impedance->parsed()) {
      const ExperimentConfig cfg = o.resolve(ExperimentKind::impedance);
      write_impedance_result(cfg, run_impedance_table(cfg));
      std::cout << "impedance table written\n";
    } else if (crosstest->parsed()) {
      const ExperimentConfig cfg = o.resolve(ExperimentKind::cross_test);
      write_cross_test_result(cfg, run_cross_test(cfg));
      std::cout << "cross-test table written\n";
    } else if (datastats->parsed()) {
      const ExperimentConfig cfg = o.resolve(ExperimentKind::dataset_stats);
      write_dataset_stats_result(cfg, run_dataset_stats(cfg));
      std::cout << "dataset statistics written\n";
    } else if (entropy->parsed()) {
      const ExperimentConfig cfg = o.resolve(ExperimentKind::entropy_flow);
      const EntropyFlowResult result = run_entropy_flow(cfg);
      write_entropy_flow_result(cfg, result);
      std::cout << "entropy flow of " << result.topology_label << ": inversion "
                << (result.entropy_inversion ? "yes" : "no") << "\n";
    } else if (train_cmd->parsed()) {
      run_train_command(o.resolve(ExperimentKind::tolerance_sweep));
    } else if (test_cmd->parsed()) {
      run_test_command(o.resolve(ExperimentKind::tolerance_sweep));
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace bbqae
