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
//
// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line; the
// process exits nonzero if any criterion fails. Training cells follow the
// experiment harness protocol (200 samples, 200 test states, 200 iterations,
// best of 3 seeds) with the same seed-substream derivation the CLI uses.

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "bbqae/experiments.hpp"
#include "oracles.hpp"

using namespace bbqae;
namespace fs = std::filesystem;

namespace {

struct CriterionResult {
  bool pass = false;
  std::string detail;
};

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream ss;
  ss.precision(digits);
  ss << v;
  return ss.str();
}

// ---------------------------------------------------------------------------
// Shared training runs (the expensive part), keyed by (n_in, bb, p, seed).

struct Run {
  QuantumMap map;
  TrainingTrace trace;
  NoisyDataset train_ds;
  double mean_test_fidelity = 0.0;
};

struct RunKey {
  int n_in;
  std::vector<int> bb;
  double p;
  int seed_index;
  bool operator<(const RunKey& o) const {
    return std::tie(n_in, bb, p, seed_index) < std::tie(o.n_in, o.bb, o.p, o.seed_index);
  }
};

class RunCache {
 public:
  explicit RunCache(unsigned threads) : threads_(threads) {
    config_ = ExperimentConfig::from_sections({}, ExperimentKind::tolerance_sweep);
  }

  // Trains (or reuses) best-of-3 cells; returns seed-indexed runs.
  const std::vector<Run>& cell(int n_in, const std::vector<int>& bb, double p,
                               const std::vector<double>& p_list) {
    const auto key = std::make_tuple(n_in, bb, p);
    auto it = cells_.find(key);
    if (it != cells_.end()) return it->second;

    ExperimentConfig cfg = config_;
    cfg.n_in = n_in;
    cfg.brainboxes = {bb};
    cfg.p_grid = p_list;
    const std::size_t pi = static_cast<std::size_t>(
        std::find(p_list.begin(), p_list.end(), p) - p_list.begin());
    const NetworkTopology topo = cfg.topology();
    const TargetState target = make_ghz(n_in);

    std::vector<Run> runs(static_cast<std::size_t>(cfg.n_seeds));
    parallel_for(runs.size(), threads_, [&](std::size_t s) {
      const NoiseSpec spec{NoiseKind::bit_flip, p, cfg.data_seed(pi, static_cast<int>(s))};
      NoisyDataset ds = sample_channel(target, spec, cfg.n_data);
      auto [map, trace] =
          train(init_random_map(topo, cfg.init_seed(static_cast<int>(s))), ds, target,
                cfg.trainer);
      const NoiseSpec test_spec{NoiseKind::bit_flip, p,
                                cfg.test_seed(pi, static_cast<int>(s))};
      const NoisyDataset test_ds = sample_channel(target, test_spec, cfg.n_test);
      const std::vector<double> fs = evaluate_fidelities(map, test_ds, target);
      Run run{std::move(map), std::move(trace), std::move(ds), 0.0};
      run.mean_test_fidelity =
          pairwise_sum(std::vector<double>(fs)) / static_cast<double>(fs.size());
      runs[s] = std::move(run);
    });
    return cells_.emplace(key, std::move(runs)).first->second;
  }

  double best_fidelity(const std::vector<Run>& runs) const {
    double best = 0.0;
    for (const Run& r : runs) best = std::max(best, r.mean_test_fidelity);
    return best;
  }

  const Run& best_run(const std::vector<Run>& runs) const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < runs.size(); ++i)
      if (runs[i].mean_test_fidelity > runs[best].mean_test_fidelity) best = i;
    return runs[best];
  }

  const ExperimentConfig& config() const { return config_; }

 private:
  unsigned threads_;
  ExperimentConfig config_;
  std::map<std::tuple<int, std::vector<int>, double>, std::vector<Run>> cells_;
};

// ---------------------------------------------------------------------------

CriterionResult criterion1_partial_trace() {
  Timer timer;
  Rng rng(101);
  double max_dev = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + trial % 3;
    const Matrix rho = oracles::random_density_matrix(n, rng);
    QubitIndexSet traced;
    for (int q = 0; q < n; ++q)
      if (rng.uniform() < 0.5) traced.push_back(q);
    if (static_cast<int>(traced.size()) == n) traced.pop_back();
    const Matrix got = partial_trace(rho, traced);
    const Matrix want = oracles::partial_trace_index_sum(rho, traced);
    max_dev = std::max(max_dev, max_abs(got - want));
  }
  const double secs = timer.seconds();
  return {max_dev < 1e-12 && secs < 10.0,
          "max deviation " + fmt(max_dev, 2) + ", " + fmt(secs, 2) + " s"};
}

CriterionResult criterion2_deferred_trace() {
  Timer timer;
  Rng rng(202);
  double max_dev = 0.0;
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const NetworkTopology topo = (trial % 2 == 0) ? NetworkTopology({2, 1, 2}, 1, 2)
                                                  : NetworkTopology({3, 2, 1, 2, 3}, 2, 3);
    const QuantumMap map = init_random_map(topo, derive_seed(900, trial));
    const Vector psi = oracles::random_pure_state(topo.layer_size(1), rng);
    const LayerStateCache cache = feedforward(map, psi * psi.adjoint());
    const std::vector<Matrix> marginals = global_layer_marginals(map, psi);
    for (int l = 1; l <= topo.num_layers(); ++l)
      max_dev = std::max(
          max_dev, max_abs(marginals[static_cast<std::size_t>(l - 1)] - cache.layer(l)));
    ++checked;
  }
  const double secs = timer.seconds();
  return {max_dev < 1e-10 && secs < 60.0 && checked == 100,
          "100 maps, max marginal deviation " + fmt(max_dev, 2) + ", " + fmt(secs, 2) + " s"};
}

CriterionResult criterion3_gradient_check() {
  Timer timer;
  double worst_fixed = 0.0, worst_mean = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const NetworkTopology topo = (trial % 2 == 0) ? NetworkTopology({2, 1, 2}, 1, 2)
                                                  : NetworkTopology({3, 1, 3}, 1, 2);
    const QuantumMap map = init_random_map(topo, derive_seed(301, trial));
    const NoisyDataset ds = sample_bit_flip(make_ghz(topo.layer_size(1)), 0.25, 40,
                                            derive_seed(302, trial));
    const Matrix avg = ds.average_state();

    // The stated construction: shared ideal-target observable.
    const auto ks_fixed =
        compute_parameter_matrices(map, ds, ds.target, 1.0, TrainingTargetMode::fixed_target);
    const double a_fixed = predicted_ascent_rate(ks_fixed, 1.0);
    const double n_fixed = oracles::finite_difference_slope(map, ks_fixed, avg, ds.target, 1e-5);
    worst_fixed = std::max(worst_fixed,
                           std::abs(n_fixed - a_fixed) / std::max(std::abs(a_fixed), 1e-8));

    // The production (unsupervised) observable.
    const auto ks_mean =
        compute_parameter_matrices(map, ds, ds.target, 1.0, TrainingTargetMode::dataset_mean);
    const double a_mean = predicted_ascent_rate(ks_mean, 1.0);
    const double n_mean =
        oracles::finite_difference_slope_of(map, ks_mean, 1e-5, [&](const QuantumMap& m) {
          return training_objective(m, ds, ds.target, TrainingTargetMode::dataset_mean);
        });
    worst_mean =
        std::max(worst_mean, std::abs(n_mean - a_mean) / std::max(std::abs(a_mean), 1e-8));
  }
  const double secs = timer.seconds();
  return {worst_fixed < 1e-4 && worst_mean < 1e-4 && secs < 120.0,
          "max relative error: fixed-target " + fmt(worst_fixed, 2) + ", dataset-mean " +
              fmt(worst_mean, 2) + ", " + fmt(secs, 2) + " s"};
}

CriterionResult criterion4_desk_scale(RunCache& cache) {
  const std::vector<double> grid1 = {0.1, 0.3, 0.45};
  const double f03 = cache.best_fidelity(cache.cell(4, {1}, 0.3, grid1));
  const double f045 = cache.best_fidelity(cache.cell(4, {1}, 0.45, grid1));
  const double f04 = cache.best_fidelity(cache.cell(4, {2}, 0.4, {0.4}));
  const bool pass = f03 >= 0.99 && f045 < 0.9 && f04 >= 0.99;
  return {pass, "(1)-QAE best F: p=0.3 -> " + fmt(f03) + " (>=0.99), p=0.45 -> " + fmt(f045) +
                    " (<0.9); (2)-QAE p=0.4 -> " + fmt(f04) + " (>=0.99)"};
}

CriterionResult criterion5_six_qubit_threshold(RunCache& cache) {
  const std::vector<double> grid = {0.2, 0.25};
  const double f20 = cache.best_fidelity(cache.cell(6, {1}, 0.2, grid));
  const double f25 = cache.best_fidelity(cache.cell(6, {1}, 0.25, grid));
  const bool pass = f20 >= 0.99 && f25 < 0.99;
  return {pass, "(6,2,1,2,6) best F: p=0.2 -> " + fmt(f20) + " (>=0.99), p=0.25 -> " +
                    fmt(f25) + " (<0.99)"};
}

CriterionResult criterion6_distribution() {
  Timer timer;
  const TargetState g4 = make_ghz(4);
  double max_dev = 0.0;
  for (int i = 0; i <= 10; ++i) {
    const double p = static_cast<double>(i) / 20.0;
    const auto report = distribution_report(enumerate_bit_flip(g4, p));
    const double expect = std::pow(1 - p, 4) + std::pow(p, 4);
    max_dev = std::max(max_dev, std::abs(report.target_frequency - expect));
  }
  const ExperimentConfig cfg =
      ExperimentConfig::from_sections({}, ExperimentKind::dataset_stats);
  int demoted = 0;
  for (int s = 0; s < 10; ++s) {
    const auto report =
        distribution_report(sample_bit_flip(g4, 0.4, 200, cfg.data_seed(8, s)));
    if (!report.target_strictly_most_frequent) ++demoted;
  }
  const double secs = timer.seconds();
  return {max_dev < 1e-12 && demoted >= 1 && secs < 10.0,
          "exact-curve deviation " + fmt(max_dev, 2) + ", ideal state demoted in " +
              std::to_string(demoted) + "/10 seeds at p=0.4, " + fmt(secs, 2) + " s"};
}

CriterionResult criterion7_impedance_ordering(RunCache& cache) {
  const std::vector<double> grid1 = {0.1, 0.3, 0.45};
  const auto z_of = [&](const std::vector<Run>& runs) {
    std::optional<double> best;
    for (const Run& r : runs) {
      const auto z = training_impedance(r.trace, 0.99, 200);
      if (z && (!best || *z < *best)) best = z;
    }
    return best;
  };
  const auto z1 = z_of(cache.cell(4, {1}, 0.1, grid1));
  const auto z11 = z_of(cache.cell(4, {1, 1}, 0.1, {0.1}));
  if (!z1 || !z11) return {false, "Z(0.99) not reached within the budget"};
  const bool pass = *z11 < *z1 && *z11 <= 0.5 && *z1 <= 0.5;
  return {pass, "best Z(0.99) at p=0.1: (1,1) -> " + fmt(*z11) + " < (1) -> " + fmt(*z1) +
                    ", both <= 0.5"};
}

CriterionResult criterion8_cross_test(RunCache& cache) {
  const TargetState g4 = make_ghz(4);
  const std::vector<double> p_tests = {0.1, 0.2, 0.3, 0.4};
  const std::vector<NoiseKind> channels = {NoiseKind::bit_flip, NoiseKind::depolarizing,
                                           NoiseKind::erasure};
  const ExperimentConfig& cfg = cache.config();

  const auto errors = [&](const QuantumMap& map, int seed_index) {
    std::map<std::pair<int, int>, double> r;  // (channel idx, p idx) -> R
    for (std::size_t ci = 0; ci < channels.size(); ++ci)
      for (std::size_t pi = 0; pi < p_tests.size(); ++pi) {
        const NoiseSpec spec{channels[ci], p_tests[pi],
                             cfg.test_seed(pi, seed_index, ci + 1)};
        const NoisyDataset ds = sample_channel(g4, spec, cfg.n_test);
        const auto fs = evaluate_fidelities(map, ds, g4);
        r[{static_cast<int>(ci), static_cast<int>(pi)}] =
            1.0 - pairwise_sum(std::vector<double>(fs)) / static_cast<double>(fs.size());
      }
    return r;
  };

  // (2,1)-QAE trained at 0.3: some seed keeps R < 0.01 everywhere.
  const auto& runs21 = cache.cell(4, {2, 1}, 0.3, {0.3});
  bool wide_ok = false;
  double wide_best_max = 1.0;
  for (std::size_t s = 0; s < runs21.size(); ++s) {
    const auto r = errors(runs21[s].map, static_cast<int>(s));
    double worst = 0.0;
    for (const auto& [k, v] : r) worst = std::max(worst, v);
    wide_best_max = std::min(wide_best_max, worst);
    if (worst < 0.01) wide_ok = true;
  }

  // (1)-QAE trained at 0.3: overfitting signature at p_test = 0.3.
  const auto& runs1 = cache.cell(4, {1}, 0.3, {0.1, 0.3, 0.45});
  bool narrow_ok = false;
  std::string narrow_detail;
  for (std::size_t s = 0; s < runs1.size(); ++s) {
    const auto r = errors(runs1[s].map, static_cast<int>(s));
    const double bf = r.at({0, 2}), dep = r.at({1, 2}), era = r.at({2, 2});
    if (bf < dep && bf < era) {
      narrow_ok = true;
      narrow_detail = "R(bit_flip)=" + fmt(bf, 3) + " < R(depolarizing)=" + fmt(dep, 3) +
                      ", R(erasure)=" + fmt(era, 3);
    }
  }
  const bool pass = wide_ok && narrow_ok;
  return {pass, "(2,1)-QAE best worst-case R " + fmt(wide_best_max, 3) + " (<0.01); (1)-QAE " +
                    (narrow_ok ? narrow_detail : "overfitting signature absent")};
}

CriterionResult criterion9_entropy_inversion(RunCache& cache) {
  const std::vector<double> grid1 = {0.1, 0.3, 0.45};
  const Run& good = cache.best_run(cache.cell(4, {1}, 0.1, grid1));
  const Run& bad = cache.best_run(cache.cell(4, {1}, 0.45, grid1));

  const auto entropies = [](const Run& run) {
    std::vector<double> s;
    for (const auto& r : layer_entropies(run.map, run.train_ds.consolidated(),
                                         EntropyMode::channel_averaged))
      s.push_back(r.entropy);
    return s;
  };
  const std::vector<double> sg = entropies(good);
  const std::vector<double> sb = entropies(bad);
  const double out_good = sg.back(), in_good = sg.front();
  const double out_bad = sb.back(), bottleneck_bad = sb[2];  // layer 3 of (4,2,1,2,4)

  const bool small = out_good < 1e-3;
  const bool inverted = out_good < in_good;
  const bool leaking = out_bad > bottleneck_bad;
  return {small && inverted && leaking,
          "p=0.1: S_out=" + fmt(out_good, 3) + (small ? " (<1e-3)" : " (FAIL: >=1e-3)") +
              ", S_in=" + fmt(in_good, 3) + (inverted ? " (inverted)" : " (not inverted)") +
              "; p=0.45: S_out=" + fmt(out_bad, 3) + " vs S_bottleneck=" +
              fmt(bottleneck_bad, 3) + (leaking ? " (leaking)" : " (FAIL: not leaking)")};
}

CriterionResult criterion10_invariant_suites() {
  Timer timer;
  std::string detail;
  bool pass = true;

  // Unitarity after 1000 training steps.
  {
    const NetworkTopology topo({2, 1, 2}, 1, 2);
    const NoisyDataset ds = sample_bit_flip(make_ghz(2), 0.2, 50, 17);
    TrainerConfig tcfg;
    tcfg.n_iterations = 1000;
    auto [map, trace] = train(init_random_map(topo, 5), ds, ds.target, tcfg);
    double drift = 0.0;
    for (int l = 2; l <= 3; ++l)
      for (int j = 1; j <= topo.layer_size(l); ++j) {
        Matrix gram = map.unitary(l, j).adjoint() * map.unitary(l, j);
        gram -= Matrix::Identity(gram.rows(), gram.cols());
        drift = std::max(drift, max_abs(gram));
      }
    pass = pass && drift < 1e-8 && trace.reunitarizations == 0;
    detail += "unitarity drift after 1000 steps " + fmt(drift, 2);
  }

  // Trace preservation through every layer.
  {
    Rng rng(404);
    double dev = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const NetworkTopology topo({3, 2, 1, 2, 3}, 2, 3);
      const QuantumMap map = init_random_map(topo, derive_seed(405, trial));
      const LayerStateCache cache = feedforward(map, oracles::random_density_matrix(3, rng));
      for (int l = 1; l <= topo.num_layers(); ++l)
        dev = std::max(dev, std::abs(cache.layer(l).trace().real() - 1.0));
    }
    pass = pass && dev < 1e-10;
    detail += "; trace deviation " + fmt(dev, 2);
  }

  // Renyi additivity and unitary invariance.
  {
    Rng rng(406);
    double dev = 0.0;
    for (int trial = 0; trial < 25; ++trial) {
      const Matrix a = oracles::random_density_matrix(1, rng);
      const Matrix b = oracles::random_density_matrix(2, rng);
      dev = std::max(dev, std::abs(renyi2_entropy(kron(a, b)) - renyi2_entropy(a) -
                                   renyi2_entropy(b)));
      const Matrix u = haar_unitary(4, rng);
      dev = std::max(dev,
                     std::abs(renyi2_entropy(Matrix(u * b * u.adjoint())) - renyi2_entropy(b)));
    }
    pass = pass && dev < 1e-10;
    detail += "; Renyi property deviation " + fmt(dev, 2);
  }

  // Dataset determinism, byte for byte.
  {
    const fs::path dir = fs::temp_directory_path() / "bbqae_acceptance_det";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const TargetState g4 = make_ghz(4);
    bool identical = true;
    for (const NoiseKind kind :
         {NoiseKind::bit_flip, NoiseKind::depolarizing, NoiseKind::erasure}) {
      const auto path_a = dir / (to_string(kind) + "_a.ds");
      const auto path_b = dir / (to_string(kind) + "_b.ds");
      save_dataset(path_a.string(), sample_channel(g4, NoiseSpec{kind, 0.3, 99}, 50));
      save_dataset(path_b.string(), sample_channel(g4, NoiseSpec{kind, 0.3, 99}, 50));
      std::ifstream a(path_a, std::ios::binary), b(path_b, std::ios::binary);
      std::stringstream sa, sb;
      sa << a.rdbuf();
      sb << b.rdbuf();
      identical = identical && sa.str() == sb.str();
    }
    pass = pass && identical;
    detail += std::string("; dataset re-runs ") + (identical ? "byte-identical" : "DIFFER");
  }

  const double secs = timer.seconds();
  pass = pass && secs < 300.0;
  return {pass, detail + ", " + fmt(secs, 1) + " s"};
}

}  // namespace

int main(int argc, char** argv) {
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg.rfind("--threads=", 0) == 0) threads = static_cast<unsigned>(std::stoul(arg.substr(10)));
    if (arg.rfind("--only=", 0) == 0)
      for (const std::string& tok : split_top_level(arg.substr(7)))
        only.push_back(std::stoi(tok));
  }
  const auto wanted = [&](int id) {
    return only.empty() || std::find(only.begin(), only.end(), id) != only.end();
  };

  RunCache cache(threads);
  struct Entry {
    int id;
    std::string name;
    std::function<CriterionResult()> fn;
  };
  const std::vector<Entry> criteria = {
      {1, "partial-trace oracle equivalence", [&] { return criterion1_partial_trace(); }},
      {2, "deferred-trace equivalence", [&] { return criterion2_deferred_trace(); }},
      {3, "gradient finite-difference check", [&] { return criterion3_gradient_check(); }},
      {4, "4-qubit tolerance thresholds", [&] { return criterion4_desk_scale(cache); }},
      {5, "6-qubit threshold drop", [&] { return criterion5_six_qubit_threshold(cache); }},
      {6, "training-set distribution", [&] { return criterion6_distribution(); }},
      {7, "impedance ordering", [&] { return criterion7_impedance_ordering(cache); }},
      {8, "cross-test generalization", [&] { return criterion8_cross_test(cache); }},
      {9, "entropy inversion", [&] { return criterion9_entropy_inversion(cache); }},
      {10, "invariant suites", [&] { return criterion10_invariant_suites(); }},
  };

  int failures = 0;
  for (const Entry& entry : criteria) {
    if (!wanted(entry.id)) continue;
    Timer timer;
    CriterionResult result;
    try {
      result = entry.fn();
    } catch (const std::exception& e) {
      result = {false, std::string("exception: ") + e.what()};
    }
    if (!result.pass) ++failures;
    std::cout << (result.pass ? "[PASS]" : "[FAIL]") << " criterion " << entry.id << " ("
              << entry.name << "): " << result.detail << " [" << fmt(timer.seconds(), 1)
              << " s]" << std::endl;
  }
  if (failures == 0) {
    std::cout << "all acceptance criteria passed" << std::endl;
    return 0;
  }
  std::cout << failures << " criterion(s) failed" << std::endl;
  return 1;
}
