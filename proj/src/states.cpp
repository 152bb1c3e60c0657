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

#include "bbqae/states.hpp"

#include <cmath>

#include "bbqae/tensor.hpp"

namespace bbqae {

TargetState make_ghz(int n_qubits) {
  if (n_qubits < 2) throw std::invalid_argument("make_ghz: need at least 2 qubits");
  const Index dim = Index{1} << n_qubits;
  if (dim > kMaxRegisterDim) throw LimitError("make_ghz: register dimension exceeds cap");
  Vector v = Vector::Zero(dim);
  const double amp = 1.0 / std::sqrt(2.0);
  v(0) = amp;
  v(dim - 1) = amp;
  TargetState t;
  t.n_qubits = n_qubits;
  t.vector = v;
  t.projector = v * v.adjoint();
  return t;
}

double fidelity(const Matrix& rho_out, const TargetState& target) {
  if (rho_out.rows() != rho_out.cols() || rho_out.rows() != target.vector.size())
    throw ShapeError("fidelity: state dimension does not match target");
  const double f = target.vector.dot(rho_out * target.vector).real();
  return std::clamp(f, 0.0, 1.0);
}

double average_fidelity(const std::vector<Matrix>& outputs, const TargetState& target) {
  if (outputs.empty()) throw std::invalid_argument("average_fidelity: empty output list");
  std::vector<double> fs;
  fs.reserve(outputs.size());
  for (const Matrix& rho : outputs) fs.push_back(fidelity(rho, target));
  return pairwise_sum(std::move(fs)) / static_cast<double>(outputs.size());
}

double renyi2_entropy(const Matrix& rho) {
  if (rho.rows() != rho.cols()) throw ShapeError("renyi2_entropy: operator must be square");
  const Complex tr = rho.trace();
  if (std::abs(tr - Complex(1, 0)) > 1e-8)
    throw NormalizationError("renyi2_entropy: trace deviates from 1 beyond 1e-8");
  // Tr(rho^2) = ||rho||_F^2 for Hermitian rho.
  const double purity = rho.squaredNorm();
  double s = -std::log(purity);
  if (std::abs(purity - 1.0) < 1e-12) s = std::max(s, 0.0);
  return s;
}

double reconstruction_error(const std::vector<Matrix>& outputs, const TargetState& target) {
  return 1.0 - average_fidelity(outputs, target);
}

}  // namespace bbqae
