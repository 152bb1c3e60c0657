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

#include <functional>
#include <optional>

#include "bbqae/network.hpp"

namespace bbqae {

/// What the backward observable sigma^L of each sample is. The denoiser
/// setting is unsupervised: no clean states are assumed available and outputs
/// are scored against the training data itself.
///
///  - dataset_mean: sigma^L is the weighted mean input state. Its optimum
///    prepares the mean's dominant eigenstate, so the network locks onto
///    whichever state holds the majority of the (finite) data; this is what
///    gives the tolerance thresholds their meaning.
///  - per_sample_input: sigma_x^L is sample x's own input (strict
///    self-reconstruction; kept for sensitivity studies).
///  - fixed_target: sigma^L is the ideal target projector (supervised
///    reference mode; with it the objective equals the recorded fidelity).
enum class TrainingTargetMode { dataset_mean, per_sample_input, fixed_target };

/// How the per-iteration update is swept across the network. Layerwise
/// Gauss-Seidel sweeps (each layer's parameter matrices computed from the
/// already-updated earlier layers) keep large steps stable; synchronous
/// updates (all K from the pre-update map) are retained for comparison, as is
/// a fully sequential per-neuron sweep.
enum class UpdateOrder { layerwise, synchronous, per_neuron };

struct TrainerConfig {
  double epsilon = 0.1;        // step size of the exp(i*eps*K) update
  double eta = 8.0;            // gradient scale inside K
  int n_iterations = 200;
  double fidelity_target = 0.99;
  uint64_t seed = 0;
  int checkpoint_every = 0;    // 0 = never
  TrainingTargetMode target_mode = TrainingTargetMode::dataset_mean;
  UpdateOrder update_order = UpdateOrder::layerwise;
  bool record_entropies = false;    // channel-averaged layer entropies per iteration

  void validate() const;
};

/// Hermitian update generator for one neuron.
struct ParameterMatrix {
  int layer = 0;
  int neuron = 0;
  Matrix k;
};

struct TraceEntry {
  int iteration = 0;
  double fidelity = 0.0;
  std::vector<double> layer_entropies;  // empty unless recorded
  double elapsed_ms = 0.0;
};

struct TrainingTrace {
  std::vector<TraceEntry> entries;
  int reunitarizations = 0;

  /// Smallest recorded iteration with fidelity >= f_target.
  std::optional<int> first_hit(double f_target) const;
};

/// K(l,j) = eta * (i/N) * sum_x Tr_rest([A(l,j,x), B(l,j,x)]), where A is the
/// in-layer forward state after neurons 1..j and B is the sample's backward
/// observable pulled back through the later layers and the neurons j+1..N_l.
/// Each K is symmetrized before use. When the backward observable is shared
/// (dataset_mean, fixed_target), linearity of the channel collapses the sum
/// onto the weighted mean input state; the result equals the per-sample sum
/// exactly.
std::vector<ParameterMatrix> compute_parameter_matrices(
    const QuantumMap& map, const NoisyDataset& dataset, const TargetState& target, double eta,
    TrainingTargetMode mode = TrainingTargetMode::dataset_mean);

/// Value of the trained functional: mean overlap of each sample's output with
/// that sample's backward observable (its own input, or the fixed target).
double training_objective(const QuantumMap& map, const NoisyDataset& dataset,
                          const TargetState& target, TrainingTargetMode mode);

/// Analytic directional derivative of the trained functional at eps = 0 when
/// every neuron moves along its parameter matrix: sum of ||K||_F^2 / eta.
double predicted_ascent_rate(const std::vector<ParameterMatrix>& ks, double eta);

/// One synchronous update: all K computed from the pre-update map, then every
/// unitary replaced by exp(i*eps*K) U. Unitarity drift beyond 1e-8 triggers
/// re-unitarization (polar projection) and is logged.
QuantumMap training_step(const QuantumMap& map, const NoisyDataset& dataset,
                         const TargetState& target, const TrainerConfig& config);

using CheckpointCallback = std::function<void(int iteration, const QuantumMap&)>;

/// Runs config.n_iterations updates, recording the training-set fidelity at
/// every iteration (entry 0 is the initial map). Entropy entries follow the
/// after-layer-unitary reading; entry 0 holds the pre-evolution baseline
/// (fresh layers in |0..0>, so layers 2..L start at zero entropy).
std::pair<QuantumMap, TrainingTrace> train(QuantumMap map, const NoisyDataset& dataset,
                                           const TargetState& target, const TrainerConfig& config,
                                           const CheckpointCallback& on_checkpoint = {});

/// Z(F) = n(F) / n_iterations for the first recorded n with fidelity >=
/// f_target; nullopt when the target is never reached.
std::optional<double> training_impedance(const TrainingTrace& trace, double f_target,
                                         int n_iterations);

}  // namespace bbqae
