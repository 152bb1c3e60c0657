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

#include "bbqae/channels.hpp"
#include "bbqae/tensor.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bbqae;

TEST_CASE("ghz construction") {
  const TargetState g2 = make_ghz(2);
  const double amp = 1.0 / std::sqrt(2.0);
  CHECK(g2.vector(0).real() == doctest::Approx(amp));
  CHECK(g2.vector(3).real() == doctest::Approx(amp));
  CHECK(std::abs(g2.vector(1)) == 0.0);
  CHECK(std::abs(g2.vector(2)) == 0.0);

  const TargetState g4 = make_ghz(4);
  int nonzero = 0;
  for (Index i = 0; i < 16; ++i)
    for (Index j = 0; j < 16; ++j)
      if (std::abs(g4.projector(i, j)) > 0) {
        ++nonzero;
        CHECK(g4.projector(i, j).real() == doctest::Approx(0.5));
        CHECK((i == 0 || i == 15));
        CHECK((j == 0 || j == 15));
      }
  CHECK(nonzero == 4);

  // Pure state: purity of the projector is 1.
  const TargetState g3 = make_ghz(3);
  CHECK(renyi2_entropy(g3.projector) == doctest::Approx(0.0).epsilon(1e-12));

  CHECK_THROWS_AS((void)make_ghz(1), std::invalid_argument);
}

TEST_CASE("fidelity basics") {
  const TargetState g4 = make_ghz(4);
  CHECK(fidelity(g4.projector, g4) == doctest::Approx(1.0));

  // Flipping qubit 0 moves the support to indices {8, 7}, orthogonal to {0, 15}.
  const Matrix x0 = embed_unitary(pauli_x(), {0}, 4);
  const Matrix flipped = x0 * g4.projector * x0.adjoint();
  CHECK(std::abs(flipped(8, 8).real() - 0.5) < 1e-15);
  CHECK(std::abs(flipped(7, 7).real() - 0.5) < 1e-15);
  CHECK(fidelity(flipped, g4) == doctest::Approx(0.0));

  const double q = 0.3;
  const Matrix mixture = (1 - q) * g4.projector + q * flipped;
  CHECK(fidelity(mixture, g4) == doctest::Approx(1 - q));

  CHECK_THROWS_AS((void)fidelity(Matrix::Identity(4, 4), g4), ShapeError);
}

TEST_CASE("fidelity is linear in the state") {
  Rng rng(101);
  const TargetState g3 = make_ghz(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix r1 = oracles::random_density_matrix(3, rng);
    const Matrix r2 = oracles::random_density_matrix(3, rng);
    const double alpha = rng.uniform();
    const double mixed = fidelity(alpha * r1 + (1 - alpha) * r2, g3);
    const double parts = alpha * fidelity(r1, g3) + (1 - alpha) * fidelity(r2, g3);
    CHECK(std::abs(mixed - parts) < 1e-12);
  }
}

TEST_CASE("average fidelity") {
  const TargetState g4 = make_ghz(4);
  CHECK(average_fidelity({g4.projector, g4.projector}, g4) == doctest::Approx(1.0));

  const Matrix x0 = embed_unitary(pauli_x(), {0}, 4);
  const Matrix flipped = x0 * g4.projector * x0.adjoint();
  CHECK(average_fidelity({g4.projector, flipped}, g4) == doctest::Approx(0.5));

  CHECK_THROWS_AS((void)average_fidelity({}, g4), std::invalid_argument);
}

TEST_CASE("average fidelity of an undenoised bit-flip batch") {
  // Enumeration gives the exact survival weight (1-p)^4 + p^4; the sampled
  // batch must agree within a 3-sigma binomial interval.
  const TargetState g4 = make_ghz(4);
  const double p = 0.1;
  const NoisyDataset exact = enumerate_bit_flip(g4, p);
  double survival = 0.0;
  for (const auto& s : exact.samples)
    if (fidelity(s.state * s.state.adjoint(), g4) > 0.5) survival += s.weight;
  CHECK(survival == doctest::Approx(std::pow(0.9, 4) + std::pow(0.1, 4)).epsilon(1e-12));

  const int n = 200;
  const NoisyDataset batch = sample_bit_flip(g4, p, n, 424242);
  std::vector<Matrix> outputs;
  for (const auto& s : batch.samples) outputs.push_back(s.state * s.state.adjoint());
  const double mean = average_fidelity(outputs, g4);
  const double sigma = std::sqrt(survival * (1 - survival) / n);
  CHECK(std::abs(mean - survival) < 3 * sigma + 1e-12);
}

TEST_CASE("renyi2 entropy") {
  CHECK(renyi2_entropy(0.5 * Matrix::Identity(2, 2)) == doctest::Approx(std::log(2.0)));
  CHECK(renyi2_entropy(0.25 * Matrix::Identity(4, 4)) == doctest::Approx(std::log(4.0)));
  CHECK_THROWS_AS((void)renyi2_entropy(Matrix::Identity(2, 2)), NormalizationError);
}

TEST_CASE("renyi2 additivity and unitary invariance") {
  Rng rng(202);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = oracles::random_density_matrix(1, rng);
    const Matrix b = oracles::random_density_matrix(2, rng);
    CHECK(std::abs(renyi2_entropy(kron(a, b)) - renyi2_entropy(a) - renyi2_entropy(b)) < 1e-10);

    const Matrix u = haar_unitary(4, rng);
    CHECK(std::abs(renyi2_entropy(Matrix(u * b * u.adjoint())) - renyi2_entropy(b)) < 1e-10);
  }
}

TEST_CASE("subsystem entropies of a pure state match their complements") {
  Rng rng(303);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector psi = oracles::random_pure_state(5, rng);
    const Matrix rho = psi * psi.adjoint();
    const double sa = renyi2_entropy(partial_trace(rho, {3, 4}));
    const double sb = renyi2_entropy(partial_trace(rho, {0, 1, 2}));
    CHECK(std::abs(sa - sb) < 1e-10);
  }
}

TEST_CASE("reconstruction error") {
  const TargetState g4 = make_ghz(4);
  CHECK(reconstruction_error({g4.projector}, g4) == doctest::Approx(0.0));
  const Matrix x0 = embed_unitary(pauli_x(), {0}, 4);
  const Matrix flipped = x0 * g4.projector * x0.adjoint();
  CHECK(reconstruction_error({flipped}, g4) == doctest::Approx(1.0));
}
