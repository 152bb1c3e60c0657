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

#include <iosfwd>
#include <string>

#include "bbqae/channels.hpp"
#include "bbqae/network.hpp"

namespace bbqae {

/// Shortest round-trip exact representation (17 significant digits).
std::string format_real(double v);

/// CMAT block: 16-byte header (magic "CMAT", u16 version, u32 dim, 6 reserved
/// bytes), then dim^2 row-major (re, im) little-endian doubles.
void write_cmat(std::ostream& out, const Matrix& m);
Matrix read_cmat(std::istream& in);

/// Checkpoint: magic "BBQC", u16 version, u16 application-order tag (1 =
/// neurons applied in ascending j), u32 layer count, u32 brainbox span,
/// u64 iteration, u32 layer sizes, then one CMAT per unitary ordered by
/// (layer ascending, neuron ascending).
void save_checkpoint(const std::string& path, const QuantumMap& map, uint64_t iteration);

struct Checkpoint {
  QuantumMap map;
  uint64_t iteration = 0;
};

Checkpoint load_checkpoint(const std::string& path);

/// Dataset files are line-oriented text: a fixed header, then one record per
/// realization carrying the kind descriptor, the weight, and the amplitude
/// list as re/im pairs with 17 significant digits.
void save_dataset(const std::string& path, const NoisyDataset& dataset);
NoisyDataset load_dataset(const std::string& path);

}  // namespace bbqae
