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

#include <cmath>

#include "doctest.h"
#include "oracles.hpp"

using namespace bbqae;

namespace {

QuantumMap identity_map(const NetworkTopology& topo) {
  QuantumMap map;
  map.topology = topo;
  map.unitaries.resize(static_cast<std::size_t>(topo.num_layers() - 1));
  for (int l = 2; l <= topo.num_layers(); ++l) {
    const Index dim = Index{1} << (topo.layer_size(l - 1) + 1);
    for (int j = 1; j <= topo.layer_size(l); ++j)
      map.unitaries[static_cast<std::size_t>(l - 2)].push_back(Matrix::Identity(dim, dim));
  }
  return map;
}

Matrix ground_projector(int n_qubits) {
  const Index dim = Index{1} << n_qubits;
  Matrix m = Matrix::Zero(dim, dim);
  m(0, 0) = 1.0;
  return m;
}

}  // namespace

TEST_CASE("topology validation and labels") {
  const NetworkTopology topo({4, 2, 1, 2, 4}, 2, 3);
  CHECK(topo.label() == "(4,2,1,2,4)");
  CHECK(topo.brainbox_label() == "(1)");
  CHECK(topo.total_qubits() == 13);
  CHECK_NOTHROW(topo.require_autoencoder());

  const NetworkTopology shell = NetworkTopology::autoencoder_shell(4, {2, 1});
  CHECK(shell.label() == "(4,2,2,1,2,4)");
  CHECK(shell.brainbox_label() == "(2,1)");

  CHECK_THROWS_AS(NetworkTopology({4}), std::invalid_argument);
  CHECK_THROWS_AS(NetworkTopology({8, 8}), LimitError);
  CHECK_THROWS_AS(NetworkTopology({2, 1, 3}, 1, 2).require_autoencoder(),
                  std::invalid_argument);
  CHECK_THROWS_AS(NetworkTopology::autoencoder_shell(2, {3}), std::invalid_argument);

  CHECK(NetworkTopology::parse_layer_list("(4,2,1,2,4)") == std::vector<int>({4, 2, 1, 2, 4}));
  CHECK_THROWS_AS(NetworkTopology::parse_layer_list("(4,x)"), ConfigError);
}

TEST_CASE("random map initialization") {
  const NetworkTopology topo({2, 1, 2}, 1, 2);
  const QuantumMap a = init_random_map(topo, 5);
  const QuantumMap b = init_random_map(topo, 5);
  const QuantumMap c = init_random_map(topo, 6);
  CHECK_NOTHROW(a.require_valid());
  for (int l = 2; l <= 3; ++l)
    for (int j = 1; j <= topo.layer_size(l); ++j) {
      CHECK(max_abs(a.unitary(l, j) - b.unitary(l, j)) == 0.0);
      CHECK(max_abs(a.unitary(l, j) - c.unitary(l, j)) > 1e-3);
    }
}

TEST_CASE("haar first moment of 4x4 draws") {
  Rng rng(1717);
  double mean = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    Rng sub = rng.fork(static_cast<uint64_t>(i));
    mean += std::norm(haar_unitary(4, sub)(0, 0)) / n;
  }
  // |U00|^2 ~ Beta(1, 3): mean 1/4, var 3/80.
  const double sigma = std::sqrt(3.0 / 80.0 / n);
  CHECK(std::abs(mean - 0.25) < 3 * sigma);
}

TEST_CASE("feedforward with identity unitaries discards the input") {
  const NetworkTopology topo({2, 1, 2}, 1, 2);
  const QuantumMap map = identity_map(topo);
  Rng rng(7);
  const Matrix rho = oracles::random_density_matrix(2, rng);
  const LayerStateCache cache = feedforward(map, rho);
  CHECK(max_abs(cache.output() - ground_projector(2)) < 1e-14);
  CHECK(max_abs(cache.layer(2) - ground_projector(1)) < 1e-14);
}

TEST_CASE("single-qubit swap layer teleports the input") {
  // Topology (1,1) with the only unitary being SWAP: the traced-out input
  // qubit hands its state to the fresh layer.
  const NetworkTopology topo({1, 1});
  QuantumMap map;
  map.topology = topo;
  Matrix swap = Matrix::Zero(4, 4);
  swap(0, 0) = swap(1, 2) = swap(2, 1) = swap(3, 3) = 1.0;
  map.unitaries.push_back({swap});
  Rng rng(8);
  const Matrix rho = oracles::random_density_matrix(1, rng);
  CHECK(max_abs(feedforward(map, rho).output() - rho) < 1e-14);
}

TEST_CASE("feedforward preserves trace at every layer") {
  Rng rng(9);
  const NetworkTopology topo({2, 2, 1, 2}, 2, 3);
  const QuantumMap map = init_random_map(topo, 42);
  const Matrix rho = oracles::random_density_matrix(2, rng);
  const LayerStateCache cache = feedforward(map, rho);
  for (int l = 1; l <= topo.num_layers(); ++l)
    CHECK(std::abs(cache.layer(l).trace().real() - 1.0) < 1e-10);
}

TEST_CASE("feedforward is linear in the input") {
  Rng rng(10);
  const NetworkTopology topo({2, 1, 2}, 1, 2);
  const QuantumMap map = init_random_map(topo, 1);
  const Matrix r1 = oracles::random_density_matrix(2, rng);
  const Matrix r2 = oracles::random_density_matrix(2, rng);
  const double alpha = 0.3;
  const Matrix mixed = feedforward(map, alpha * r1 + (1 - alpha) * r2).output();
  const Matrix parts =
      alpha * feedforward(map, r1).output() + (1 - alpha) * feedforward(map, r2).output();
  CHECK(max_abs(mixed - parts) < 1e-10);
}

TEST_CASE("global simulation basics") {
  const NetworkTopology topo({2, 1, 2}, 1, 2);

  SUBCASE("identity map leaves input (x) ground") {
    const QuantumMap map = identity_map(topo);
    Rng rng(11);
    const Vector psi_in = oracles::random_pure_state(2, rng);
    const Vector psi = feedforward_global(map, psi_in);
    Vector expect = Vector::Zero(1 << 5);
    for (Index x = 0; x < 4; ++x) expect(x << 3) = psi_in(x);
    CHECK(max_abs(Matrix(psi - expect)) < 1e-14);
  }

  SUBCASE("norm stays one") {
    const QuantumMap map = init_random_map(topo, 77);
    Rng rng(12);
    const Vector psi = feedforward_global(map, oracles::random_pure_state(2, rng));
    CHECK(std::abs(psi.norm() - 1.0) < 1e-10);
  }

  SUBCASE("register cap enforced") {
    const NetworkTopology wide({6, 2, 1, 2, 6}, 2, 3);
    const QuantumMap map = init_random_map(wide, 1);
    Vector in = Vector::Zero(64);
    in(0) = 1.0;
    CHECK_THROWS_AS((void)feedforward_global(map, in), LimitError);
  }
}

TEST_CASE("deferred-trace marginals equal layerwise feedforward") {
  Rng rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const NetworkTopology topo({2, 1, 2}, 1, 2);
    const QuantumMap map = init_random_map(topo, 100 + trial);
    const Vector psi = oracles::random_pure_state(2, rng);
    const LayerStateCache cache = feedforward(map, psi * psi.adjoint());
    const std::vector<Matrix> marginals = global_layer_marginals(map, psi);
    for (int l = 1; l <= topo.num_layers(); ++l)
      CHECK(max_abs(marginals[static_cast<std::size_t>(l - 1)] - cache.layer(l)) < 1e-10);
  }
}

TEST_CASE("pullback observable reproduces output overlaps") {
  Rng rng(14);
  const NetworkTopology topo({2, 2, 1, 2, 2}, 2, 3);
  const QuantumMap map = init_random_map(topo, 21);
  const TargetState target = make_ghz(2);
  const Matrix sigma1 = pullback_observable(map, target.projector);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector psi = oracles::random_pure_state(2, rng);
    const double direct = fidelity(feedforward(map, psi * psi.adjoint()).output(), target);
    const double pulled = std::real(psi.dot(sigma1 * psi));
    CHECK(std::abs(direct - pulled) < 1e-10);
  }
}

TEST_CASE("layer entropies") {
  SUBCASE("identity map on a noiseless input is pure everywhere") {
    const NetworkTopology topo({2, 1, 2}, 1, 2);
    const QuantumMap map = identity_map(topo);
    const TargetState g2 = make_ghz(2);
    const NoisyDataset ds = enumerate_bit_flip(g2, 0.0);
    for (const auto mode : {EntropyMode::channel_averaged, EntropyMode::per_realization}) {
      const auto records = layer_entropies(map, ds, mode);
      REQUIRE(records.size() == 3);
      for (const auto& r : records) CHECK(r.entropy < 1e-10);
    }
  }

  SUBCASE("input layer of a p = 0.5 bit-flip GHZ2 mixture carries ln 2") {
    const NetworkTopology topo({2, 1, 2}, 1, 2);
    const QuantumMap map = init_random_map(topo, 3);
    const NoisyDataset ds = enumerate_bit_flip(make_ghz(2), 0.5);
    const auto records = layer_entropies(map, ds, EntropyMode::channel_averaged);
    CHECK(records[0].layer_index == 1);
    CHECK(records[0].entropy == doctest::Approx(std::log(2.0)).epsilon(1e-10));
    // Per realization the inputs are pure.
    const auto per = layer_entropies(map, ds, EntropyMode::per_realization);
    CHECK(per[0].entropy == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("per-realization layer entropy equals its complement") {
    const NetworkTopology topo({2, 1, 2}, 1, 2);
    const QuantumMap map = init_random_map(topo, 4);
    Rng rng(15);
    const Vector psi_in = oracles::random_pure_state(2, rng);
    const Vector psi = feedforward_global(map, psi_in);
    // Layer 3 occupies the last two qubits of the 5-qubit register.
    const double s_layer = renyi2_entropy(reduced_density(psi, {3, 4}));
    const double s_rest = renyi2_entropy(reduced_density(psi, {0, 1, 2}));
    CHECK(std::abs(s_layer - s_rest) < 1e-10);
  }
}
