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

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bbqae/states.hpp"

namespace bbqae {

enum class NoiseKind { bit_flip, depolarizing, erasure };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);

/// Channel description. For bit_flip p must lie in [0, 0.5] (the sweep range
/// everything else is calibrated against); the other channels accept [0, 1].
struct NoiseSpec {
  NoiseKind kind = NoiseKind::bit_flip;
  double p = 0.0;
  uint64_t seed = 0;

  void validate() const;
};

/// Flip subset, stored qubit-indexed: bit q set means qubit q was flipped.
struct BitFlipDescriptor {
  uint32_t mask = 0;
};

/// Per-qubit Pauli labels, one of I/X/Y/Z per character, qubit 0 first.
struct PauliDescriptor {
  std::string labels;
};

/// Single-qubit replacement. When applied, the erased qubit carries
/// alpha|0> + beta|1> and the remaining qubits collapse to one of the two
/// computational branches of the target (branch 0 = all zeros). Averaged over
/// branches this realizes |phi><phi| (x) Tr_i(rho_target).
struct ErasureDescriptor {
  bool applied = false;
  int qubit = -1;
  Complex alpha{1, 0};
  Complex beta{0, 0};
  int branch = 0;
};

using NoiseDescriptor = std::variant<BitFlipDescriptor, PauliDescriptor, ErasureDescriptor>;

/// One discrete outcome of a channel: a pure input state with a weight.
struct NoiseRealization {
  NoiseDescriptor descriptor;
  Vector state;
  double weight = 1.0;
};

enum class DatasetMode { sampled, exact };

/// Finite multiset of noise realizations of a target state. In sampled mode
/// every weight is 1/n; in exact mode the realizations enumerate the channel
/// and carry its probabilities.
struct NoisyDataset {
  TargetState target;
  NoiseSpec spec;
  DatasetMode mode = DatasetMode::sampled;
  std::vector<NoiseRealization> samples;

  /// Channel-average sum w_x |psi_x><psi_x| (pairwise reduction, fixed
  /// sample order).
  Matrix average_state() const;

  /// Merges samples with identical descriptors, summing weights. Complement
  /// flip subsets are NOT merged; they stay separate realizations.
  NoisyDataset consolidated() const;
};

/// Independent per-qubit X with probability p on every sample.
NoisyDataset sample_bit_flip(const TargetState& target, double p, int n_samples, uint64_t seed);

/// All 2^n flip subsets with weights p^|S| (1-p)^(n-|S|); exact zero-weight
/// entries are dropped. Requires n_qubits <= 12.
NoisyDataset enumerate_bit_flip(const TargetState& target, double p);

/// One Kraus-sampled depolarizing realization: per qubit, I with probability
/// 1-3p/4 and each of X, Y, Z with probability p/4.
NoiseRealization apply_depolarizing(const Vector& state, double p, uint64_t seed);

/// One erasure realization: with probability p a uniformly chosen qubit is
/// replaced by a Haar-random pure qubit state (see ErasureDescriptor).
NoiseRealization apply_erasure(const TargetState& target, double p, uint64_t seed);

/// n_samples realizations of the given channel (dispatch on spec.kind).
NoisyDataset sample_channel(const TargetState& target, const NoiseSpec& spec, int n_samples);

/// Histogram over distinct realized states. Flip subsets that realize the
/// same state (S and its complement, for GHZ targets) land in one bin.
struct DistributionReport {
  struct Bin {
    double weight = 0.0;
    bool is_target = false;
    std::vector<uint32_t> masks;  // contributing flip subsets, ascending
  };
  std::vector<Bin> bins;  // sorted by weight descending, ties by first mask
  double target_frequency = 0.0;
  double top_other_frequency = 0.0;
  bool target_strictly_most_frequent = false;
};

DistributionReport distribution_report(const NoisyDataset& dataset);

}  // namespace bbqae
