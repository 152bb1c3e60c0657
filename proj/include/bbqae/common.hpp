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

#include <atomic>
#include <complex>
#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace bbqae {

using Real = double;
using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Register convention used throughout the library: qubit 0 is the MOST
/// significant tensor factor, so the basis index of an n-qubit register
/// reads b = b_0 b_1 ... b_{n-1} in binary with b_0 belonging to qubit 0.
/// Layers of a network are concatenated in network order (layer 1 first).
inline constexpr Index kMaxRegisterDim = Index{1} << 14;

// Error taxonomy. The CLI maps ConfigError to exit code 1 and every other
// Error subclass (numeric failures) to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix/register dimensions disagree with what an operation requires.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A qubit index is out of range or repeated.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// A hard cap was exceeded (register dimension, enumeration size).
class LimitError : public Error {
 public:
  using Error::Error;
};

/// An input violated a symmetry requirement (e.g. non-Hermitian generator).
class SymmetryError : public Error {
 public:
  using Error::Error;
};

/// A state failed a normalization requirement (trace or 2-norm).
class NormalizationError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration, CLI arguments, or input files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Left-to-right pairwise reduction. The result depends only on the element
/// order, never on thread count, so weighted sums stay bit-stable.
template <typename T>
T pairwise_sum(std::vector<T> terms) {
  if (terms.empty()) throw std::invalid_argument("pairwise_sum: empty input");
  std::size_t n = terms.size();
  while (n > 1) {
    const std::size_t half = n / 2;
    for (std::size_t i = 0; i < half; ++i) terms[i] = terms[2 * i] + terms[2 * i + 1];
    if (n % 2 == 1) {
      terms[half] = terms[n - 1];
      n = half + 1;
    } else {
      n = half;
    }
  }
  return terms[0];
}

/// Runs fn(i) for i in [0, n) on up to n_threads workers. Each index owns its
/// output slot, so scheduling order cannot affect results.
template <typename Fn>
void parallel_for(std::size_t n, unsigned n_threads, Fn&& fn) {
  if (n == 0) return;
  if (n_threads <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(n_threads, n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace bbqae
