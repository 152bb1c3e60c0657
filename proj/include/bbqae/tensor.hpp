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
#include "bbqae/rng.hpp"

namespace bbqae {

/// Ordered list of distinct 0-based qubit positions. When a set addresses the
/// factors of a small operator, entry i of the set is qubit i of that
/// operator's own register (qubit 0 = most significant, as everywhere).
using QubitIndexSet = std::vector<int>;

/// Number of qubits for a register of dimension `dim`; throws ShapeError if
/// dim is not a positive power of two.
int qubit_count(Index dim);

inline bool is_power_of_two(Index d) { return d > 0 && (d & (d - 1)) == 0; }

double max_abs(const Matrix& m);
bool is_hermitian(const Matrix& m, double tol = 1e-12);
bool is_unitary(const Matrix& m, double tol = 1e-10);

/// Checks the density-matrix tag: Hermitian within 1e-12 entrywise, trace
/// within 1e-10 of 1, eigenvalues >= -1e-10. Throws on violation.
void require_density_matrix(const Matrix& m);

/// Kronecker product, factor order (a then b): a owns the most significant
/// qubits of the result.
template <typename DerivedA, typename DerivedB>
Matrix kron(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  const Index rows = a.rows() * b.rows();
  const Index cols = a.cols() * b.cols();
  if (rows > kMaxRegisterDim || cols > kMaxRegisterDim)
    throw LimitError("kron: result dimension " + std::to_string(rows) + " exceeds cap " +
                     std::to_string(kMaxRegisterDim));
  Matrix out(rows, cols);
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Traces out the listed qubits of a square operator; the remaining qubits
/// keep their relative order.
Matrix partial_trace(const Matrix& m, const QubitIndexSet& traced);

/// Marginal of a pure state on the kept qubits (in the order listed),
/// computed without materializing the full outer product.
Matrix reduced_density(const Vector& psi, const QubitIndexSet& kept);

/// exp(i*epsilon*k) for Hermitian k, via eigendecomposition so the result is
/// unitary to floating-point accuracy even after thousands of updates.
Matrix expm_hermitian_generator(const Matrix& k, double epsilon);

/// Lifts u (acting on the listed qubits, entry i of the set = factor i of u)
/// to the full register, identity elsewhere.
Matrix embed_unitary(const Matrix& u, const QubitIndexSet& acting_on, int total_qubits);

/// psi <- embed(u) * psi without building the embedded matrix.
void apply_unitary_inplace(Vector& psi, const Matrix& u, const QubitIndexSet& acting_on);

/// m <- U m U^dag (or U^dag m U when `adjoint`), with U = embed(u). Only
/// touches the listed axes, so the cost is O(dim^2 * dim(u)).
void conjugate_unitary_inplace(Matrix& m, const Matrix& u, const QubitIndexSet& acting_on,
                               bool adjoint = false);

/// Haar-random unitary: QR of a complex Ginibre matrix with the R diagonal
/// phase correction.
Matrix haar_unitary(Index dim, Rng& rng);

Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();

}  // namespace bbqae
