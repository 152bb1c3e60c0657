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

#include "bbqae/tensor.hpp"

#include <algorithm>

namespace bbqae {
namespace {

// Index bit for qubit q in an n-qubit register (qubit 0 = MSB).
inline Index bit_of(int qubit, int n) { return Index{1} << (n - 1 - qubit); }

void check_qubit_set(const QubitIndexSet& qubits, int n, const char* what) {
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int q : qubits) {
    if (q < 0 || q >= n)
      throw IndexError(std::string(what) + ": qubit index " + std::to_string(q) +
                       " out of range for " + std::to_string(n) + " qubits");
    if (seen[static_cast<std::size_t>(q)])
      throw IndexError(std::string(what) + ": duplicate qubit index " + std::to_string(q));
    seen[static_cast<std::size_t>(q)] = true;
  }
}

// Offsets of all bit patterns over the given qubit positions, ordered so that
// entry i of `qubits` is the most significant bit of the pattern index.
std::vector<Index> pattern_offsets(const QubitIndexSet& qubits, int n) {
  const int k = static_cast<int>(qubits.size());
  std::vector<Index> out(std::size_t{1} << k, 0);
  for (Index a = 0; a < static_cast<Index>(out.size()); ++a) {
    Index off = 0;
    for (int i = 0; i < k; ++i)
      if ((a >> (k - 1 - i)) & 1) off |= bit_of(qubits[static_cast<std::size_t>(i)], n);
    out[static_cast<std::size_t>(a)] = off;
  }
  return out;
}

QubitIndexSet complement_set(const QubitIndexSet& qubits, int n) {
  std::vector<bool> in(static_cast<std::size_t>(n), false);
  for (int q : qubits) in[static_cast<std::size_t>(q)] = true;
  QubitIndexSet rest;
  for (int q = 0; q < n; ++q)
    if (!in[static_cast<std::size_t>(q)]) rest.push_back(q);
  return rest;
}

// u applied to the listed axes of every column: m <- embed(u) * m.
void apply_rows(Matrix& m, const Matrix& u, const std::vector<Index>& sub,
                const std::vector<Index>& rest) {
  const Index du = u.rows();
  Vector buf(du), out(du);
  for (Index col = 0; col < m.cols(); ++col) {
    auto column = m.col(col);
    for (Index r : rest) {
      for (Index a = 0; a < du; ++a) buf(a) = column(r + sub[static_cast<std::size_t>(a)]);
      out.noalias() = u * buf;
      for (Index a = 0; a < du; ++a) column(r + sub[static_cast<std::size_t>(a)]) = out(a);
    }
  }
}

}  // namespace

int qubit_count(Index dim) {
  if (!is_power_of_two(dim))
    throw ShapeError("register dimension " + std::to_string(dim) + " is not a power of two");
  int n = 0;
  while ((Index{1} << n) < dim) ++n;
  return n;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

bool is_hermitian(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m - m.adjoint().eval()) <= tol;
}

bool is_unitary(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  Matrix gram = m.adjoint() * m;
  gram -= Matrix::Identity(m.rows(), m.cols());
  return max_abs(gram) < tol;
}

void require_density_matrix(const Matrix& m) {
  if (m.rows() != m.cols()) throw ShapeError("density matrix must be square");
  if (!is_hermitian(m, 1e-12)) throw SymmetryError("density matrix not Hermitian within 1e-12");
  if (std::abs(m.trace().real() - 1.0) > 1e-10 || std::abs(m.trace().imag()) > 1e-10)
    throw NormalizationError("density matrix trace deviates from 1 beyond 1e-10");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()));
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw NormalizationError("density matrix has eigenvalue below -1e-10");
}

Matrix partial_trace(const Matrix& m, const QubitIndexSet& traced) {
  if (m.rows() != m.cols()) throw ShapeError("partial_trace: operator must be square");
  const int n = qubit_count(m.rows());
  check_qubit_set(traced, n, "partial_trace");
  const QubitIndexSet kept = complement_set(traced, n);
  const auto kept_off = pattern_offsets(kept, n);
  const auto traced_off = pattern_offsets(traced, n);
  const Index dk = static_cast<Index>(kept_off.size());
  Matrix out = Matrix::Zero(dk, dk);
  for (Index b = 0; b < dk; ++b)
    for (Index a = 0; a < dk; ++a) {
      Complex acc(0, 0);
      for (Index t : traced_off)
        acc += m(kept_off[static_cast<std::size_t>(a)] + t,
                 kept_off[static_cast<std::size_t>(b)] + t);
      out(a, b) = acc;
    }
  return out;
}

Matrix reduced_density(const Vector& psi, const QubitIndexSet& kept) {
  const int n = qubit_count(psi.size());
  check_qubit_set(kept, n, "reduced_density");
  const auto kept_off = pattern_offsets(kept, n);
  const auto rest_off = pattern_offsets(complement_set(kept, n), n);
  const Index dk = static_cast<Index>(kept_off.size());
  Matrix out = Matrix::Zero(dk, dk);
  for (Index r : rest_off)
    for (Index b = 0; b < dk; ++b) {
      const Complex cb = std::conj(psi(r + kept_off[static_cast<std::size_t>(b)]));
      for (Index a = 0; a < dk; ++a)
        out(a, b) += psi(r + kept_off[static_cast<std::size_t>(a)]) * cb;
    }
  return out;
}

Matrix expm_hermitian_generator(const Matrix& k, double epsilon) {
  if (k.rows() != k.cols()) throw ShapeError("expm_hermitian_generator: matrix must be square");
  if (!is_hermitian(k, 1e-10))
    throw SymmetryError("expm_hermitian_generator: generator not Hermitian within 1e-10");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (k + k.adjoint()));
  if (es.info() != Eigen::Success)
    throw Error("expm_hermitian_generator: eigendecomposition failed");
  const Eigen::ArrayXcd phases =
      (Complex(0, 1) * epsilon * es.eigenvalues().array().cast<Complex>()).exp();
  return es.eigenvectors() * phases.matrix().asDiagonal() * es.eigenvectors().adjoint();
}

Matrix embed_unitary(const Matrix& u, const QubitIndexSet& acting_on, int total_qubits) {
  if (u.rows() != u.cols()) throw ShapeError("embed_unitary: operator must be square");
  const Index dim = Index{1} << total_qubits;
  if (dim > kMaxRegisterDim)
    throw LimitError("embed_unitary: register dimension exceeds cap");
  if (u.rows() != (Index{1} << acting_on.size()))
    throw ShapeError("embed_unitary: operator dimension does not match qubit count");
  check_qubit_set(acting_on, total_qubits, "embed_unitary");
  const auto sub = pattern_offsets(acting_on, total_qubits);
  const auto rest = pattern_offsets(complement_set(acting_on, total_qubits), total_qubits);
  Matrix out = Matrix::Zero(dim, dim);
  const Index du = u.rows();
  for (Index r : rest)
    for (Index b = 0; b < du; ++b)
      for (Index a = 0; a < du; ++a)
        out(r + sub[static_cast<std::size_t>(a)], r + sub[static_cast<std::size_t>(b)]) = u(a, b);
  return out;
}

void apply_unitary_inplace(Vector& psi, const Matrix& u, const QubitIndexSet& acting_on) {
  const int n = qubit_count(psi.size());
  if (u.rows() != u.cols() || u.rows() != (Index{1} << acting_on.size()))
    throw ShapeError("apply_unitary_inplace: operator/qubit-set mismatch");
  check_qubit_set(acting_on, n, "apply_unitary_inplace");
  const auto sub = pattern_offsets(acting_on, n);
  const auto rest = pattern_offsets(complement_set(acting_on, n), n);
  const Index du = u.rows();
  Vector buf(du), out(du);
  for (Index r : rest) {
    for (Index a = 0; a < du; ++a) buf(a) = psi(r + sub[static_cast<std::size_t>(a)]);
    out.noalias() = u * buf;
    for (Index a = 0; a < du; ++a) psi(r + sub[static_cast<std::size_t>(a)]) = out(a);
  }
}

void conjugate_unitary_inplace(Matrix& m, const Matrix& u, const QubitIndexSet& acting_on,
                               bool adjoint) {
  const int n = qubit_count(m.rows());
  if (m.rows() != m.cols()) throw ShapeError("conjugate_unitary_inplace: operator must be square");
  if (u.rows() != u.cols() || u.rows() != (Index{1} << acting_on.size()))
    throw ShapeError("conjugate_unitary_inplace: operator/qubit-set mismatch");
  check_qubit_set(acting_on, n, "conjugate_unitary_inplace");
  const Matrix op = adjoint ? Matrix(u.adjoint()) : u;
  const auto sub = pattern_offsets(acting_on, n);
  const auto rest = pattern_offsets(complement_set(acting_on, n), n);
  apply_rows(m, op, sub, rest);        // m <- U m
  m = m.adjoint().eval();
  apply_rows(m, op, sub, rest);        // (U m)^dag <- U (U m)^dag
  m = m.adjoint().eval();              // = U m U^dag
}

Matrix haar_unitary(Index dim, Rng& rng) {
  Matrix g(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) g(i, j) = rng.complex_normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix& r = qr.matrixQR();
  for (Index i = 0; i < dim; ++i) {
    const Complex d = r(i, i);
    const double a = std::abs(d);
    q.col(i) *= (a > 0) ? d / a : Complex(1, 0);
  }
  return q;
}

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

}  // namespace bbqae
