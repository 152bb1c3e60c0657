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

#include "bbqae/network.hpp"

#include <cctype>
#include <numeric>
#include <sstream>

namespace bbqae {
namespace {

QubitIndexSet neuron_qubits(int n_prev, int neuron) {
  QubitIndexSet qubits(static_cast<std::size_t>(n_prev));
  std::iota(qubits.begin(), qubits.end(), 0);
  qubits.push_back(n_prev + neuron - 1);
  return qubits;
}

std::string join_sizes(const std::vector<int>& sizes) {
  std::string out = "(";
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(sizes[i]);
  }
  return out + ")";
}

}  // namespace

NetworkTopology::NetworkTopology(std::vector<int> sizes, int bb_begin, int bb_end)
    : layer_sizes(std::move(sizes)), brainbox_begin(bb_begin), brainbox_end(bb_end) {
  if (layer_sizes.size() < 2)
    throw std::invalid_argument("topology needs at least two layers");
  for (int s : layer_sizes)
    if (s < 1) throw std::invalid_argument("layer sizes must be positive");
  for (std::size_t l = 1; l < layer_sizes.size(); ++l)
    if (layer_sizes[l - 1] + layer_sizes[l] > 14)
      throw LimitError("adjacent layers " + std::to_string(layer_sizes[l - 1]) + "+" +
                       std::to_string(layer_sizes[l]) + " exceed the 14-qubit register cap");
  if (brainbox_begin < 0 || brainbox_end < brainbox_begin ||
      brainbox_end > static_cast<int>(layer_sizes.size()))
    throw std::invalid_argument("invalid brainbox span");
}

int NetworkTopology::total_qubits() const {
  return std::accumulate(layer_sizes.begin(), layer_sizes.end(), 0);
}

void NetworkTopology::require_autoencoder() const {
  if (num_layers() < 3)
    throw std::invalid_argument("autoencoder topology needs at least three layers");
  if (layer_sizes.front() != layer_sizes.back())
    throw std::invalid_argument("autoencoder topology must have matching input/output layers");
  if (!has_brainbox()) throw std::invalid_argument("autoencoder topology needs a brainbox span");
  for (int l = brainbox_begin; l < brainbox_end; ++l)
    if (layer_sizes[static_cast<std::size_t>(l)] >= layer_sizes.front())
      throw std::invalid_argument("brainbox layers must be smaller than the input layer");
}

std::string NetworkTopology::label() const { return join_sizes(layer_sizes); }

std::string NetworkTopology::brainbox_label() const {
  if (!has_brainbox()) return "";
  return join_sizes(std::vector<int>(layer_sizes.begin() + brainbox_begin,
                                     layer_sizes.begin() + brainbox_end));
}

NetworkTopology NetworkTopology::autoencoder_shell(int n_io, const std::vector<int>& brainbox) {
  if (brainbox.empty()) throw std::invalid_argument("autoencoder_shell: empty brainbox");
  std::vector<int> sizes;
  sizes.push_back(n_io);
  sizes.push_back(2);
  sizes.insert(sizes.end(), brainbox.begin(), brainbox.end());
  sizes.push_back(2);
  sizes.push_back(n_io);
  NetworkTopology topo(std::move(sizes), 2, 2 + static_cast<int>(brainbox.size()));
  topo.require_autoencoder();
  return topo;
}

std::vector<int> NetworkTopology::parse_layer_list(const std::string& text) {
  std::string body = text;
  if (!body.empty() && body.front() == '(') {
    if (body.back() != ')') throw ConfigError("unbalanced parentheses in '" + text + "'");
    body = body.substr(1, body.size() - 2);
  }
  std::vector<int> sizes;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used != item.size()) throw std::invalid_argument("");
      sizes.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse layer size '" + item + "' in '" + text + "'");
    }
  }
  if (sizes.empty()) throw ConfigError("empty layer list '" + text + "'");
  return sizes;
}

void QuantumMap::require_valid() const {
  const int L = topology.num_layers();
  if (static_cast<int>(unitaries.size()) != L - 1)
    throw ShapeError("quantum map layer count does not match topology");
  for (int l = 2; l <= L; ++l) {
    const auto& layer = unitaries[static_cast<std::size_t>(l - 2)];
    if (static_cast<int>(layer.size()) != topology.layer_size(l))
      throw ShapeError("quantum map neuron count mismatch in layer " + std::to_string(l));
    const Index dim = Index{1} << (topology.layer_size(l - 1) + 1);
    for (const Matrix& u : layer) {
      if (u.rows() != dim || u.cols() != dim)
        throw ShapeError("unitary dimension mismatch in layer " + std::to_string(l));
      if (!is_unitary(u, 1e-10))
        throw NormalizationError("stored unitary fails the 1e-10 unitarity check");
    }
  }
}

QuantumMap init_random_map(const NetworkTopology& topology, uint64_t seed) {
  QuantumMap map;
  map.topology = topology;
  const Rng root(seed);
  const int L = topology.num_layers();
  map.unitaries.resize(static_cast<std::size_t>(L - 1));
  for (int l = 2; l <= L; ++l) {
    auto& layer = map.unitaries[static_cast<std::size_t>(l - 2)];
    layer.reserve(static_cast<std::size_t>(topology.layer_size(l)));
    const Index dim = Index{1} << (topology.layer_size(l - 1) + 1);
    for (int j = 1; j <= topology.layer_size(l); ++j) {
      Rng sub = root.fork((static_cast<uint64_t>(l) << 32) | static_cast<uint64_t>(j));
      layer.push_back(haar_unitary(dim, sub));
    }
  }
  return map;
}

Matrix layer_transition(const QuantumMap& map, int layer, const Matrix& rho_prev) {
  const int n_prev = map.topology.layer_size(layer - 1);
  const int n_cur = map.topology.layer_size(layer);
  const Index d_prev = Index{1} << n_prev;
  const Index d_cur = Index{1} << n_cur;
  if (rho_prev.rows() != d_prev || rho_prev.cols() != d_prev)
    throw ShapeError("layer_transition: input dimension does not match layer " +
                     std::to_string(layer - 1));
  Matrix big = Matrix::Zero(d_prev * d_cur, d_prev * d_cur);
  for (Index j = 0; j < d_prev; ++j)
    for (Index i = 0; i < d_prev; ++i) big(i * d_cur, j * d_cur) = rho_prev(i, j);
  for (int j = 1; j <= n_cur; ++j)
    conjugate_unitary_inplace(big, map.unitary(layer, j), neuron_qubits(n_prev, j));
  Matrix out = Matrix::Zero(d_cur, d_cur);
  for (Index a = 0; a < d_prev; ++a) out += big.block(a * d_cur, a * d_cur, d_cur, d_cur);
  return out;
}

Matrix adjoint_layer_transition(const QuantumMap& map, int layer, const Matrix& sigma) {
  const int n_prev = map.topology.layer_size(layer - 1);
  const int n_cur = map.topology.layer_size(layer);
  const Index d_prev = Index{1} << n_prev;
  const Index d_cur = Index{1} << n_cur;
  if (sigma.rows() != d_cur || sigma.cols() != d_cur)
    throw ShapeError("adjoint_layer_transition: observable dimension does not match layer " +
                     std::to_string(layer));
  Matrix big = Matrix::Zero(d_prev * d_cur, d_prev * d_cur);
  for (Index a = 0; a < d_prev; ++a) big.block(a * d_cur, a * d_cur, d_cur, d_cur) = sigma;
  for (int j = n_cur; j >= 1; --j)
    conjugate_unitary_inplace(big, map.unitary(layer, j), neuron_qubits(n_prev, j),
                              /*adjoint=*/true);
  // <0..0| block of the fresh layer.
  Matrix out(d_prev, d_prev);
  for (Index j = 0; j < d_prev; ++j)
    for (Index i = 0; i < d_prev; ++i) out(i, j) = big(i * d_cur, j * d_cur);
  return out;
}

LayerStateCache feedforward(const QuantumMap& map, const Matrix& input) {
  const Index d_in = Index{1} << map.topology.layer_size(1);
  if (input.rows() != d_in || input.cols() != d_in)
    throw ShapeError("feedforward: input dimension does not match the input layer");
  LayerStateCache cache;
  cache.layers.reserve(static_cast<std::size_t>(map.topology.num_layers()));
  cache.layers.push_back(input);
  for (int l = 2; l <= map.topology.num_layers(); ++l)
    cache.layers.push_back(layer_transition(map, l, cache.layers.back()));
  return cache;
}

namespace {

// Shared driver for the global pure-state evolution: runs the full register,
// invoking `snapshot(l)` right after layer l's unitaries (and for l = 1 at
// input time).
template <typename Snapshot>
Vector run_global(const QuantumMap& map, const Vector& input, Snapshot&& snapshot) {
  const NetworkTopology& topo = map.topology;
  const int total = topo.total_qubits();
  if (total > 14)
    throw LimitError("global simulation needs " + std::to_string(total) +
                     " qubits, above the 14-qubit cap");
  const Index d_in = Index{1} << topo.layer_size(1);
  if (input.size() != d_in)
    throw ShapeError("feedforward_global: input dimension does not match the input layer");
  Vector psi = Vector::Zero(Index{1} << total);
  const int rest = total - topo.layer_size(1);
  for (Index x = 0; x < d_in; ++x) psi(x << rest) = input(x);
  snapshot(1, psi);
  int offset_prev = 0;
  for (int l = 2; l <= topo.num_layers(); ++l) {
    const int n_prev = topo.layer_size(l - 1);
    for (int j = 1; j <= topo.layer_size(l); ++j) {
      QubitIndexSet qubits;
      qubits.reserve(static_cast<std::size_t>(n_prev + 1));
      for (int q = 0; q < n_prev; ++q) qubits.push_back(offset_prev + q);
      qubits.push_back(offset_prev + n_prev + j - 1);
      apply_unitary_inplace(psi, map.unitary(l, j), qubits);
    }
    snapshot(l, psi);
    offset_prev += n_prev;
  }
  return psi;
}

QubitIndexSet layer_positions(const NetworkTopology& topo, int layer) {
  int offset = 0;
  for (int l = 1; l < layer; ++l) offset += topo.layer_size(l);
  QubitIndexSet out(static_cast<std::size_t>(topo.layer_size(layer)));
  std::iota(out.begin(), out.end(), offset);
  return out;
}

}  // namespace

Vector feedforward_global(const QuantumMap& map, const Vector& input) {
  return run_global(map, input, [](int, const Vector&) {});
}

std::vector<Matrix> global_layer_marginals(const QuantumMap& map, const Vector& input) {
  std::vector<Matrix> marginals(static_cast<std::size_t>(map.topology.num_layers()));
  run_global(map, input, [&](int l, const Vector& psi) {
    marginals[static_cast<std::size_t>(l - 1)] =
        reduced_density(psi, layer_positions(map.topology, l));
  });
  return marginals;
}

Matrix pullback_observable(const QuantumMap& map, const Matrix& observable) {
  Matrix sigma = observable;
  for (int l = map.topology.num_layers(); l >= 2; --l)
    sigma = adjoint_layer_transition(map, l, sigma);
  return sigma;
}

std::vector<LayerEntropyRecord> layer_entropies(const QuantumMap& map,
                                                const NoisyDataset& dataset, EntropyMode mode) {
  if (dataset.samples.empty()) throw std::invalid_argument("layer_entropies: empty dataset");
  const int L = map.topology.num_layers();
  std::vector<std::vector<Matrix>> marginal_terms(static_cast<std::size_t>(L));
  std::vector<std::vector<double>> entropy_terms(static_cast<std::size_t>(L));
  for (const NoiseRealization& s : dataset.samples) {
    const std::vector<Matrix> marginals = global_layer_marginals(map, s.state);
    for (int l = 1; l <= L; ++l) {
      const auto& m = marginals[static_cast<std::size_t>(l - 1)];
      if (mode == EntropyMode::channel_averaged)
        marginal_terms[static_cast<std::size_t>(l - 1)].push_back(s.weight * m);
      else
        entropy_terms[static_cast<std::size_t>(l - 1)].push_back(s.weight * renyi2_entropy(m));
    }
  }
  std::vector<LayerEntropyRecord> records;
  records.reserve(static_cast<std::size_t>(L));
  for (int l = 1; l <= L; ++l) {
    LayerEntropyRecord rec;
    rec.layer_index = l;
    if (mode == EntropyMode::channel_averaged)
      rec.entropy = renyi2_entropy(pairwise_sum(std::move(marginal_terms[static_cast<std::size_t>(l - 1)])));
    else
      rec.entropy = pairwise_sum(std::move(entropy_terms[static_cast<std::size_t>(l - 1)]));
    records.push_back(rec);
  }
  return records;
}

}  // namespace bbqae
