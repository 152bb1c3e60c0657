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

#include <string>
#include <vector>

#include "bbqae/channels.hpp"
#include "bbqae/states.hpp"
#include "bbqae/tensor.hpp"

namespace bbqae {

/// Layer-size list (N_1, ..., N_L) with an optional brainbox span marking the
/// bottleneck sub-network as a half-open 0-based layer range.
///
/// The base constructor admits any chain of at least two layers (small chains
/// are useful on their own and in tests); the autoencoder constraints
/// (L >= 3, symmetric ends, every brainbox layer smaller than the ends) are
/// enforced by require_autoencoder(), which every experiment preset calls.
struct NetworkTopology {
  std::vector<int> layer_sizes;
  int brainbox_begin = 0;
  int brainbox_end = 0;

  NetworkTopology() = default;
  explicit NetworkTopology(std::vector<int> sizes, int bb_begin = 0, int bb_end = 0);

  int num_layers() const { return static_cast<int>(layer_sizes.size()); }
  int layer_size(int layer) const { return layer_sizes[static_cast<std::size_t>(layer - 1)]; }
  int total_qubits() const;
  bool has_brainbox() const { return brainbox_end > brainbox_begin; }

  void require_autoencoder() const;
  std::string label() const;
  std::string brainbox_label() const;

  /// (n_io, 2, brainbox..., 2, n_io) with the brainbox span marked.
  static NetworkTopology autoencoder_shell(int n_io, const std::vector<int>& brainbox);

  /// Parses "(a,b,...)" into a size list.
  static std::vector<int> parse_layer_list(const std::string& text);
};

/// The full ordered collection of per-neuron unitaries. U(l, j) acts on all
/// of layer l-1 plus qubit j of layer l and has dimension 2^(N_{l-1}+1).
/// Within a layer, neurons are applied in ascending j; this order is part of
/// the checkpoint format.
struct QuantumMap {
  NetworkTopology topology;
  std::vector<std::vector<Matrix>> unitaries;  // [l-2][j-1]

  const Matrix& unitary(int layer, int neuron) const {
    return unitaries[static_cast<std::size_t>(layer - 2)][static_cast<std::size_t>(neuron - 1)];
  }
  Matrix& unitary(int layer, int neuron) {
    return unitaries[static_cast<std::size_t>(layer - 2)][static_cast<std::size_t>(neuron - 1)];
  }

  /// Verifies stored dimensions and unitarity (1e-10).
  void require_valid() const;
};

/// Every U(l, j) Haar-random; substream keyed by (seed, l, j) so maps of
/// different depths share draws at matching positions.
QuantumMap init_random_map(const NetworkTopology& topology, uint64_t seed);

/// Per-layer density matrices of one feedforward pass; layer(l) is the state
/// of layer l, layer(1) being the input and layer(L) the network output.
struct LayerStateCache {
  std::vector<Matrix> layers;
  const Matrix& layer(int l) const { return layers[static_cast<std::size_t>(l - 1)]; }
  const Matrix& output() const { return layers.back(); }
};

/// One dissipative layer step: tensor the fresh layer in |0..0>, apply the
/// layer's neurons, trace out layer `layer`-1.
Matrix layer_transition(const QuantumMap& map, int layer, const Matrix& rho_prev);

/// Hilbert-Schmidt adjoint of layer_transition, propagating an observable on
/// layer `layer` back to layer `layer`-1.
Matrix adjoint_layer_transition(const QuantumMap& map, int layer, const Matrix& sigma);

LayerStateCache feedforward(const QuantumMap& map, const Matrix& input);

/// Evolves the concatenated register of all layers (later layers start in
/// |0..0>) with no intermediate traces; valid because each layer unitary only
/// touches adjacent layers. Requires total qubits <= 14.
Vector feedforward_global(const QuantumMap& map, const Vector& input);

/// Marginal of layer l from the global pure-state evolution, read right
/// after that layer's unitaries (layer 1 is read at input time). Equals the
/// layerwise feedforward cache entry for pure inputs.
std::vector<Matrix> global_layer_marginals(const QuantumMap& map, const Vector& input);

/// Adjoint-propagates an output-layer observable through the whole network;
/// Tr(obs * feedforward(rho).output()) == Tr(pullback_observable(obs) * rho).
Matrix pullback_observable(const QuantumMap& map, const Matrix& observable);

enum class EntropyMode { per_realization, channel_averaged };

/// Renyi-2 entropy of each layer over a dataset: the channel_averaged mode
/// mixes the per-realization marginals before taking entropies, the
/// per_realization mode averages per-sample entropies. Never materializes a
/// global density matrix.
std::vector<LayerEntropyRecord> layer_entropies(const QuantumMap& map,
                                                const NoisyDataset& dataset, EntropyMode mode);

}  // namespace bbqae
