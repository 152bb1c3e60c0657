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

#include "bbqae/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <iostream>
#include <map>

namespace bbqae {
namespace {

QubitIndexSet neuron_qubits(int n_prev, int neuron) {
  QubitIndexSet qubits;
  qubits.reserve(static_cast<std::size_t>(n_prev + 1));
  for (int q = 0; q < n_prev; ++q) qubits.push_back(q);
  qubits.push_back(n_prev + neuron - 1);
  return qubits;
}

// rho (x) |0..0><0..0| on the two-layer register (fresh layer least
// significant).
Matrix attach_ground_layer(const Matrix& rho, Index d_cur) {
  Matrix big = Matrix::Zero(rho.rows() * d_cur, rho.cols() * d_cur);
  for (Index j = 0; j < rho.cols(); ++j)
    for (Index i = 0; i < rho.rows(); ++i) big(i * d_cur, j * d_cur) = rho(i, j);
  return big;
}

Matrix identity_tensor(const Matrix& sigma, Index d_prev) {
  Matrix big = Matrix::Zero(d_prev * sigma.rows(), d_prev * sigma.cols());
  for (Index a = 0; a < d_prev; ++a)
    big.block(a * sigma.rows(), a * sigma.cols(), sigma.rows(), sigma.cols()) = sigma;
  return big;
}

// Distinct realized input states with accumulated weights. Realizations that
// produce the same state contribute identical gradient terms, so they are
// merged here (purely an evaluation-cost reduction).
struct InputClass {
  Vector psi;
  double weight = 0.0;
};

std::vector<InputClass> state_classes(const NoisyDataset& dataset) {
  if (dataset.samples.empty()) throw std::invalid_argument("trainer: empty dataset");
  std::vector<InputClass> classes;
  std::map<std::string, std::size_t> slots;
  for (const NoiseRealization& s : dataset.samples) {
    const std::string key(reinterpret_cast<const char*>(s.state.data()),
                          static_cast<std::size_t>(s.state.size()) * sizeof(Complex));
    auto [it, fresh] = slots.try_emplace(key, classes.size());
    if (fresh)
      classes.push_back(InputClass{s.state, s.weight});
    else
      classes[it->second].weight += s.weight;
  }
  return classes;
}

struct GradientWork {
  std::vector<InputClass> classes;
  Matrix average;
};

GradientWork make_work(const NoisyDataset& dataset) {
  GradientWork w;
  w.classes = state_classes(dataset);
  std::vector<Matrix> terms;
  terms.reserve(w.classes.size());
  for (const InputClass& c : w.classes) terms.push_back(c.weight * (c.psi * c.psi.adjoint()));
  w.average = pairwise_sum(std::move(terms));
  return w;
}

// One independently propagated (input state, backward observable) pair. The
// shared-observable modes collapse the whole dataset into a single entry via
// channel linearity.
struct GradientClass {
  Matrix rho;       // advanced forward during a sweep; starts as the input state
  Matrix sigma_out;
  double weight = 1.0;
};

std::vector<GradientClass> gradient_classes(const GradientWork& work, const TargetState& target,
                                            TrainingTargetMode mode) {
  std::vector<GradientClass> out;
  switch (mode) {
    case TrainingTargetMode::fixed_target:
      out.push_back(GradientClass{work.average, target.projector, 1.0});
      break;
    case TrainingTargetMode::dataset_mean:
      out.push_back(GradientClass{work.average, work.average, 1.0});
      break;
    case TrainingTargetMode::per_sample_input:
      out.reserve(work.classes.size());
      for (const InputClass& c : work.classes) {
        const Matrix rho = c.psi * c.psi.adjoint();
        out.push_back(GradientClass{rho, rho, c.weight});
      }
      break;
  }
  return out;
}

// Backward observables sigma^(l) for l = 2..L (index l-1), one chain per
// class, evaluated on the current map.
std::vector<std::vector<Matrix>> sigma_chains(const QuantumMap& map,
                                              const std::vector<GradientClass>& classes) {
  const int L = map.topology.num_layers();
  std::vector<std::vector<Matrix>> chains(classes.size());
  for (std::size_t c = 0; c < classes.size(); ++c) {
    auto& sigma = chains[c];
    sigma.assign(static_cast<std::size_t>(L), Matrix());
    sigma[static_cast<std::size_t>(L - 1)] = classes[c].sigma_out;
    for (int l = L; l >= 3; --l)
      sigma[static_cast<std::size_t>(l - 2)] =
          adjoint_layer_transition(map, l, sigma[static_cast<std::size_t>(l - 1)]);
  }
  return chains;
}

// In-layer state of class c on the two-layer register after neurons 1..j.
struct LayerSweepState {
  std::vector<Matrix> a;        // per class
  std::vector<std::vector<Matrix>> b;  // per class, b[j] for j = 1..N_l
};

// Prepares A(0) and the backward ladder B(N_l)..B(1) for one layer from the
// current unitaries. B(j) must be built before any neuron of this layer is
// updated; A advances during the sweep.
LayerSweepState prepare_layer(const QuantumMap& map, int l,
                              const std::vector<GradientClass>& classes,
                              const std::vector<std::vector<Matrix>>& sigmas) {
  const int n_prev = map.topology.layer_size(l - 1);
  const int n_cur = map.topology.layer_size(l);
  const Index d_prev = Index{1} << n_prev;
  const Index d_cur = Index{1} << n_cur;
  LayerSweepState state;
  state.a.reserve(classes.size());
  state.b.resize(classes.size());
  for (std::size_t c = 0; c < classes.size(); ++c) {
    state.a.push_back(attach_ground_layer(classes[c].rho, d_cur));
    auto& b = state.b[c];
    b.assign(static_cast<std::size_t>(n_cur + 1), Matrix());
    b[static_cast<std::size_t>(n_cur)] =
        identity_tensor(sigmas[c][static_cast<std::size_t>(l - 1)], d_prev);
    for (int j = n_cur - 1; j >= 1; --j) {
      Matrix m = b[static_cast<std::size_t>(j + 1)];
      conjugate_unitary_inplace(m, map.unitary(l, j + 1), neuron_qubits(n_prev, j + 1),
                                /*adjoint=*/true);
      b[static_cast<std::size_t>(j)] = std::move(m);
    }
  }
  return state;
}

// K for neuron (l, j) from the prepared sweep state; advances every class's A
// through U(l, j) first. For Hermitian A and B, Tr_rest([A, B]) = T - T^dag
// with T = Tr_rest(A B).
Matrix neuron_k(const QuantumMap& map, int l, int j, const std::vector<GradientClass>& classes,
                LayerSweepState& state, double eta) {
  const int n_prev = map.topology.layer_size(l - 1);
  const int n_cur = map.topology.layer_size(l);
  QubitIndexSet traced;
  for (int q = 0; q < n_cur; ++q)
    if (q != j - 1) traced.push_back(n_prev + q);
  const double scale = eta * std::ldexp(1.0, -n_prev);
  Matrix acc = Matrix::Zero(Index{1} << (n_prev + 1), Index{1} << (n_prev + 1));
  for (std::size_t c = 0; c < classes.size(); ++c) {
    conjugate_unitary_inplace(state.a[c], map.unitary(l, j), neuron_qubits(n_prev, j));
    const Matrix t =
        partial_trace(state.a[c] * state.b[c][static_cast<std::size_t>(j)], traced);
    acc += classes[c].weight * (t - t.adjoint().eval());
  }
  Matrix k = Complex(0, scale) * acc;
  k = 0.5 * (k + k.adjoint().eval());
  return k;
}

// Closest unitary (polar projection), used only when drift is detected.
Matrix reunitarize(const Matrix& u) {
  Eigen::JacobiSVD<Matrix> svd(u, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

int apply_update(Matrix& u, const Matrix& k, double epsilon, int layer, int neuron) {
  u = expm_hermitian_generator(k, epsilon) * u;
  Matrix gram = u.adjoint() * u;
  gram -= Matrix::Identity(u.rows(), u.cols());
  if (max_abs(gram) > 1e-8) {
    u = reunitarize(u);
    std::cerr << "trainer: re-unitarized U(" << layer << "," << neuron << ") after drift\n";
    return 1;
  }
  return 0;
}

// One full training iteration. Layerwise and per-neuron orders update in a
// Gauss-Seidel sweep: each layer's parameter matrices see the already-updated
// earlier layers through the advanced forward states, while the backward
// observables (which depend only on later, not-yet-updated layers) are frozen
// at sweep start. The synchronous order computes every K from the pre-update
// map.
int sweep_update(QuantumMap& map, const GradientWork& work, const TargetState& target,
                 const TrainerConfig& cfg) {
  const NetworkTopology& topo = map.topology;
  const int L = topo.num_layers();
  std::vector<GradientClass> classes = gradient_classes(work, target, cfg.target_mode);
  const auto sigmas = sigma_chains(map, classes);

  int fixes = 0;
  if (cfg.update_order == UpdateOrder::synchronous) {
    std::vector<ParameterMatrix> ks;
    for (int l = 2; l <= L; ++l) {
      LayerSweepState state = prepare_layer(map, l, classes, sigmas);
      for (int j = 1; j <= topo.layer_size(l); ++j)
        ks.push_back(ParameterMatrix{l, j, neuron_k(map, l, j, classes, state, cfg.eta)});
      for (std::size_t c = 0; c < classes.size(); ++c)
        classes[c].rho = layer_transition(map, l, classes[c].rho);
    }
    for (const ParameterMatrix& pm : ks)
      fixes += apply_update(map.unitary(pm.layer, pm.neuron), pm.k, cfg.epsilon, pm.layer,
                            pm.neuron);
    return fixes;
  }

  for (int l = 2; l <= L; ++l) {
    LayerSweepState state = prepare_layer(map, l, classes, sigmas);
    if (cfg.update_order == UpdateOrder::layerwise) {
      std::vector<ParameterMatrix> ks;
      for (int j = 1; j <= topo.layer_size(l); ++j)
        ks.push_back(ParameterMatrix{l, j, neuron_k(map, l, j, classes, state, cfg.eta)});
      for (const ParameterMatrix& pm : ks)
        fixes += apply_update(map.unitary(pm.layer, pm.neuron), pm.k, cfg.epsilon, pm.layer,
                              pm.neuron);
    } else {  // per_neuron: re-advance A through each freshly updated unitary
      for (int j = 1; j <= topo.layer_size(l); ++j) {
        const Matrix k = neuron_k(map, l, j, classes, state, cfg.eta);
        const Matrix before = map.unitary(l, j);
        fixes += apply_update(map.unitary(l, j), k, cfg.epsilon, l, j);
        // neuron_k advanced A through the old unitary; redo with the new one.
        const int n_prev = topo.layer_size(l - 1);
        for (std::size_t c = 0; c < classes.size(); ++c) {
          conjugate_unitary_inplace(state.a[c], before, neuron_qubits(n_prev, j),
                                    /*adjoint=*/true);
          conjugate_unitary_inplace(state.a[c], map.unitary(l, j), neuron_qubits(n_prev, j));
        }
      }
    }
    for (std::size_t c = 0; c < classes.size(); ++c)
      classes[c].rho = layer_transition(map, l, classes[c].rho);
  }
  return fixes;
}

std::vector<double> entropy_row(const QuantumMap& map, const NoisyDataset& dataset) {
  const auto records = layer_entropies(map, dataset, EntropyMode::channel_averaged);
  std::vector<double> row;
  row.reserve(records.size());
  for (const auto& r : records) row.push_back(r.entropy);
  return row;
}

}  // namespace

void TrainerConfig::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("trainer: epsilon must be positive");
  if (!(eta > 0.0)) throw std::invalid_argument("trainer: eta must be positive");
  if (n_iterations < 0) throw std::invalid_argument("trainer: n_iterations must be >= 0");
  if (!(fidelity_target > 0.0 && fidelity_target <= 1.0))
    throw std::invalid_argument("trainer: fidelity_target must lie in (0, 1]");
  if (checkpoint_every < 0) throw std::invalid_argument("trainer: checkpoint_every must be >= 0");
}

std::optional<int> TrainingTrace::first_hit(double f_target) const {
  for (const TraceEntry& e : entries)
    if (e.fidelity >= f_target) return e.iteration;
  return std::nullopt;
}

std::vector<ParameterMatrix> compute_parameter_matrices(const QuantumMap& map,
                                                        const NoisyDataset& dataset,
                                                        const TargetState& target, double eta,
                                                        TrainingTargetMode mode) {
  const GradientWork work = make_work(dataset);
  const NetworkTopology& topo = map.topology;
  if (target.vector.size() != (Index{1} << topo.layer_size(topo.num_layers())))
    throw ShapeError("trainer: target dimension does not match the output layer");
  if (work.average.rows() != (Index{1} << topo.layer_size(1)))
    throw ShapeError("trainer: dataset dimension does not match the input layer");

  std::vector<GradientClass> classes = gradient_classes(work, target, mode);
  const auto sigmas = sigma_chains(map, classes);
  std::vector<ParameterMatrix> out;
  for (int l = 2; l <= topo.num_layers(); ++l) {
    LayerSweepState state = prepare_layer(map, l, classes, sigmas);
    for (int j = 1; j <= topo.layer_size(l); ++j)
      out.push_back(ParameterMatrix{l, j, neuron_k(map, l, j, classes, state, eta)});
    for (std::size_t c = 0; c < classes.size(); ++c)
      classes[c].rho = layer_transition(map, l, classes[c].rho);
  }
  return out;
}

double training_objective(const QuantumMap& map, const NoisyDataset& dataset,
                          const TargetState& target, TrainingTargetMode mode) {
  const GradientWork work = make_work(dataset);
  switch (mode) {
    case TrainingTargetMode::fixed_target:
      return fidelity(feedforward(map, work.average).output(), target);
    case TrainingTargetMode::dataset_mean: {
      const Matrix mean_out = feedforward(map, work.average).output();
      return std::real((work.average * mean_out).trace());
    }
    case TrainingTargetMode::per_sample_input: {
      std::vector<double> terms;
      terms.reserve(work.classes.size());
      for (const InputClass& c : work.classes) {
        const Matrix out = feedforward(map, Matrix(c.psi * c.psi.adjoint())).output();
        terms.push_back(c.weight * std::real(c.psi.dot(out * c.psi)));
      }
      return pairwise_sum(std::move(terms));
    }
  }
  throw std::invalid_argument("unknown training target mode");
}

double predicted_ascent_rate(const std::vector<ParameterMatrix>& ks, double eta) {
  double rate = 0.0;
  for (const ParameterMatrix& pm : ks) rate += pm.k.squaredNorm() / eta;
  return rate;
}

QuantumMap training_step(const QuantumMap& map, const NoisyDataset& dataset,
                         const TargetState& target, const TrainerConfig& config) {
  config.validate();
  QuantumMap next = map;
  sweep_update(next, make_work(dataset), target, config);
  return next;
}

std::pair<QuantumMap, TrainingTrace> train(QuantumMap map, const NoisyDataset& dataset,
                                           const TargetState& target, const TrainerConfig& config,
                                           const CheckpointCallback& on_checkpoint) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed_ms = [&t0] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  const GradientWork work = make_work(dataset);
  const NoisyDataset entropy_ds =
      config.record_entropies ? dataset.consolidated() : NoisyDataset{};

  TrainingTrace trace;
  trace.entries.reserve(static_cast<std::size_t>(config.n_iterations + 1));

  // The recorded fidelity is always measured against the ideal target over
  // the training set; by linearity that is the fidelity of the mean state.
  const auto trace_fidelity = [&] {
    return fidelity(feedforward(map, work.average).output(), target);
  };

  TraceEntry first;
  first.iteration = 0;
  first.fidelity = trace_fidelity();
  if (config.record_entropies) {
    // Baseline before any unitary: fresh layers sit in |0..0>, only the input
    // layer carries the channel mixture.
    first.layer_entropies.assign(static_cast<std::size_t>(map.topology.num_layers()), 0.0);
    first.layer_entropies[0] = renyi2_entropy(work.average);
  }
  first.elapsed_ms = elapsed_ms();
  trace.entries.push_back(std::move(first));

  for (int n = 1; n <= config.n_iterations; ++n) {
    trace.reunitarizations += sweep_update(map, work, target, config);
    TraceEntry entry;
    entry.iteration = n;
    entry.fidelity = trace_fidelity();
    if (config.record_entropies) entry.layer_entropies = entropy_row(map, entropy_ds);
    entry.elapsed_ms = elapsed_ms();
    trace.entries.push_back(std::move(entry));
    if (on_checkpoint && config.checkpoint_every > 0 &&
        (n % config.checkpoint_every == 0 || n == config.n_iterations))
      on_checkpoint(n, map);
  }
  return {std::move(map), std::move(trace)};
}

std::optional<double> training_impedance(const TrainingTrace& trace, double f_target,
                                         int n_iterations) {
  if (trace.entries.empty()) throw std::invalid_argument("training_impedance: empty trace");
  if (n_iterations <= 0)
    throw std::invalid_argument("training_impedance: n_iterations must be positive");
  const auto hit = trace.first_hit(f_target);
  if (!hit) return std::nullopt;
  return static_cast<double>(*hit) / static_cast<double>(n_iterations);
}

}  // namespace bbqae
