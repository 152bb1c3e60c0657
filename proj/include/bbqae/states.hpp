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

#include "bbqae/common.hpp"

namespace bbqae {

/// Pure reference state to denoise toward, kept both as an amplitude vector
/// and as its rank-1 projector.
struct TargetState {
  int n_qubits = 0;
  Vector vector;
  Matrix projector;
};

/// (|0...0> + |1...1>)/sqrt(2) on n_qubits >= 2.
TargetState make_ghz(int n_qubits);

/// <psi_target| rho |psi_target>, clamped to [0, 1].
double fidelity(const Matrix& rho_out, const TargetState& target);

/// Arithmetic mean of per-sample fidelities (the training objective).
double average_fidelity(const std::vector<Matrix>& outputs, const TargetState& target);

/// Second-order Renyi entropy -ln(Tr(rho^2)), natural log. Values in
/// [-1e-10, 0) coming from a purity within 1e-12 of 1 are clamped to 0.
double renyi2_entropy(const Matrix& rho);

/// 1 - average_fidelity.
double reconstruction_error(const std::vector<Matrix>& outputs, const TargetState& target);

/// One layer-entropy reading (layer_index is 1-based, matching the network
/// labeling used in result files).
struct LayerEntropyRecord {
  int iteration = 0;
  int layer_index = 0;
  double entropy = 0.0;
};

}  // namespace bbqae
