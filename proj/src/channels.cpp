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

#include "bbqae/channels.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <map>

#include "bbqae/rng.hpp"
#include "bbqae/tensor.hpp"

namespace bbqae {
namespace {

// Index-space mask for a qubit-indexed flip mask (qubit 0 = MSB).
Index index_mask(uint32_t qubit_mask, int n) {
  Index m = 0;
  for (int q = 0; q < n; ++q)
    if ((qubit_mask >> q) & 1) m |= Index{1} << (n - 1 - q);
  return m;
}

Vector apply_flip_mask(const Vector& in, uint32_t qubit_mask, int n) {
  const Index m = index_mask(qubit_mask, n);
  Vector out(in.size());
  for (Index x = 0; x < in.size(); ++x) out(x) = in(x ^ m);
  return out;
}

void apply_pauli_inplace(Vector& psi, int qubit, char label, int n) {
  if (label == 'I') return;
  const Index bit = Index{1} << (n - 1 - qubit);
  for (Index x = 0; x < psi.size(); ++x) {
    if (x & bit) continue;
    const Index y = x | bit;
    const Complex a0 = psi(x), a1 = psi(y);
    switch (label) {
      case 'X':
        psi(x) = a1;
        psi(y) = a0;
        break;
      case 'Y':
        psi(x) = Complex(0, -1) * a1;
        psi(y) = Complex(0, 1) * a0;
        break;
      case 'Z':
        psi(y) = -a1;
        break;
      default:
        throw std::invalid_argument("unknown Pauli label");
    }
  }
}

std::string descriptor_key(const NoiseDescriptor& d) {
  struct Visitor {
    std::string operator()(const BitFlipDescriptor& b) const {
      return "f" + std::to_string(b.mask);
    }
    std::string operator()(const PauliDescriptor& p) const { return "p" + p.labels; }
    std::string operator()(const ErasureDescriptor& e) const {
      if (!e.applied) return "e-";
      std::string key = "e" + std::to_string(e.qubit) + "b" + std::to_string(e.branch);
      double parts[4] = {e.alpha.real(), e.alpha.imag(), e.beta.real(), e.beta.imag()};
      key.append(reinterpret_cast<const char*>(parts), sizeof(parts));
      return key;
    }
  };
  return std::visit(Visitor{}, d);
}

std::string state_key(const Vector& v) {
  return std::string(reinterpret_cast<const char*>(v.data()),
                     static_cast<std::size_t>(v.size()) * sizeof(Complex));
}

}  // namespace

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::bit_flip: return "bit_flip";
    case NoiseKind::depolarizing: return "depolarizing";
    case NoiseKind::erasure: return "erasure";
  }
  throw std::invalid_argument("unknown noise kind");
}

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "bit_flip") return NoiseKind::bit_flip;
  if (name == "depolarizing") return NoiseKind::depolarizing;
  if (name == "erasure") return NoiseKind::erasure;
  throw ConfigError("unknown noise channel '" + name + "'");
}

void NoiseSpec::validate() const {
  const double hi = (kind == NoiseKind::bit_flip) ? 0.5 : 1.0;
  if (!(p >= 0.0 && p <= hi))
    throw std::invalid_argument("noise probability " + std::to_string(p) + " outside [0, " +
                                std::to_string(hi) + "] for " + to_string(kind));
}

Matrix NoisyDataset::average_state() const {
  if (samples.empty()) throw std::invalid_argument("average_state: empty dataset");
  std::vector<Matrix> terms;
  terms.reserve(samples.size());
  for (const NoiseRealization& s : samples)
    terms.push_back(s.weight * (s.state * s.state.adjoint()));
  return pairwise_sum(std::move(terms));
}

NoisyDataset NoisyDataset::consolidated() const {
  NoisyDataset out;
  out.target = target;
  out.spec = spec;
  out.mode = mode;
  std::map<std::string, std::size_t> slot;
  for (const NoiseRealization& s : samples) {
    const std::string key = descriptor_key(s.descriptor);
    auto [it, fresh] = slot.try_emplace(key, out.samples.size());
    if (fresh)
      out.samples.push_back(s);
    else
      out.samples[it->second].weight += s.weight;
  }
  return out;
}

NoisyDataset sample_bit_flip(const TargetState& target, double p, int n_samples, uint64_t seed) {
  if (!(p >= 0.0 && p <= 0.5))
    throw std::invalid_argument("sample_bit_flip: p outside [0, 0.5]");
  if (n_samples < 1) throw std::invalid_argument("sample_bit_flip: need at least one sample");
  const int n = target.n_qubits;
  NoisyDataset ds;
  ds.target = target;
  ds.spec = {NoiseKind::bit_flip, p, seed};
  ds.mode = DatasetMode::sampled;
  ds.samples.resize(static_cast<std::size_t>(n_samples));
  const Rng root(seed);
  const double w = 1.0 / static_cast<double>(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    Rng rng = root.fork(static_cast<uint64_t>(i));
    uint32_t mask = 0;
    for (int q = 0; q < n; ++q)
      if (rng.uniform() < p) mask |= uint32_t{1} << q;
    NoiseRealization& r = ds.samples[static_cast<std::size_t>(i)];
    r.descriptor = BitFlipDescriptor{mask};
    r.state = apply_flip_mask(target.vector, mask, n);
    r.weight = w;
  }
  return ds;
}

NoisyDataset enumerate_bit_flip(const TargetState& target, double p) {
  if (!(p >= 0.0 && p <= 0.5))
    throw std::invalid_argument("enumerate_bit_flip: p outside [0, 0.5]");
  const int n = target.n_qubits;
  if (n > 12)
    throw LimitError("enumerate_bit_flip: " + std::to_string(n) +
                     " qubits exceeds the 12-qubit enumeration cap");
  NoisyDataset ds;
  ds.target = target;
  ds.spec = {NoiseKind::bit_flip, p, 0};
  ds.mode = DatasetMode::exact;
  const uint32_t count = uint32_t{1} << n;
  for (uint32_t mask = 0; mask < count; ++mask) {
    const int flips = std::popcount(mask);
    const double w = std::pow(p, flips) * std::pow(1.0 - p, n - flips);
    if (w == 0.0) continue;
    NoiseRealization r;
    r.descriptor = BitFlipDescriptor{mask};
    r.state = apply_flip_mask(target.vector, mask, n);
    r.weight = w;
    ds.samples.push_back(std::move(r));
  }
  return ds;
}

NoiseRealization apply_depolarizing(const Vector& state, double p, uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("apply_depolarizing: p outside [0, 1]");
  const int n = qubit_count(state.size());
  Rng rng(seed);
  std::string labels(static_cast<std::size_t>(n), 'I');
  Vector psi = state;
  for (int q = 0; q < n; ++q) {
    const double u = rng.uniform();
    char label = 'I';
    if (u >= 1.0 - 3.0 * p / 4.0) {
      const double r = u - (1.0 - 3.0 * p / 4.0);
      label = (r < p / 4.0) ? 'X' : (r < p / 2.0) ? 'Y' : 'Z';
    }
    labels[static_cast<std::size_t>(q)] = label;
    apply_pauli_inplace(psi, q, label, n);
  }
  NoiseRealization out;
  out.descriptor = PauliDescriptor{std::move(labels)};
  out.state = std::move(psi);
  out.weight = 1.0;
  return out;
}

NoiseRealization apply_erasure(const TargetState& target, double p, uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("apply_erasure: p outside [0, 1]");
  Rng rng(seed);
  NoiseRealization out;
  out.weight = 1.0;
  if (rng.uniform() >= p) {
    out.descriptor = ErasureDescriptor{};
    out.state = target.vector;
    return out;
  }
  const int n = target.n_qubits;
  int qubit = static_cast<int>(rng.uniform() * n);
  qubit = std::min(qubit, n - 1);
  // Haar-uniform qubit state from two complex normals.
  Complex alpha, beta;
  double norm;
  do {
    alpha = rng.complex_normal();
    beta = rng.complex_normal();
    norm = std::sqrt(std::norm(alpha) + std::norm(beta));
  } while (norm < 1e-12);
  alpha /= norm;
  beta /= norm;
  const int branch = (rng.uniform() < 0.5) ? 0 : 1;

  const Index dim = target.vector.size();
  Vector psi = Vector::Zero(dim);
  const Index rest_bits = (branch == 0) ? 0 : (dim - 1) & ~(Index{1} << (n - 1 - qubit));
  psi(rest_bits) = alpha;
  psi(rest_bits | (Index{1} << (n - 1 - qubit))) = beta;

  out.descriptor = ErasureDescriptor{true, qubit, alpha, beta, branch};
  out.state = std::move(psi);
  return out;
}

NoisyDataset sample_channel(const TargetState& target, const NoiseSpec& spec, int n_samples) {
  spec.validate();
  if (spec.kind == NoiseKind::bit_flip)
    return sample_bit_flip(target, spec.p, n_samples, spec.seed);
  if (n_samples < 1) throw std::invalid_argument("sample_channel: need at least one sample");
  NoisyDataset ds;
  ds.target = target;
  ds.spec = spec;
  ds.mode = DatasetMode::sampled;
  ds.samples.reserve(static_cast<std::size_t>(n_samples));
  const double w = 1.0 / static_cast<double>(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    const uint64_t sub = derive_seed(spec.seed, static_cast<uint64_t>(i));
    NoiseRealization r = (spec.kind == NoiseKind::depolarizing)
                             ? apply_depolarizing(target.vector, spec.p, sub)
                             : apply_erasure(target, spec.p, sub);
    r.weight = w;
    ds.samples.push_back(std::move(r));
  }
  return ds;
}

DistributionReport distribution_report(const NoisyDataset& dataset) {
  if (dataset.spec.kind != NoiseKind::bit_flip)
    throw std::invalid_argument("distribution_report: requires a bit-flip dataset");
  // Realized states come from exact permutations of the target amplitudes, so
  // identical states are bitwise identical and can be keyed directly.
  std::map<std::string, DistributionReport::Bin> bins;
  for (const NoiseRealization& s : dataset.samples) {
    DistributionReport::Bin& bin = bins[state_key(s.state)];
    bin.weight += s.weight;
    bin.masks.push_back(std::get<BitFlipDescriptor>(s.descriptor).mask);
  }
  const std::string target_bin = state_key(dataset.target.vector);
  DistributionReport report;
  for (auto& [key, bin] : bins) {
    std::sort(bin.masks.begin(), bin.masks.end());
    bin.masks.erase(std::unique(bin.masks.begin(), bin.masks.end()), bin.masks.end());
    bin.is_target = (key == target_bin);
    if (bin.is_target)
      report.target_frequency = bin.weight;
    else
      report.top_other_frequency = std::max(report.top_other_frequency, bin.weight);
    report.bins.push_back(std::move(bin));
  }
  std::sort(report.bins.begin(), report.bins.end(), [](const auto& a, const auto& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.masks < b.masks;
  });
  report.target_strictly_most_frequent = report.target_frequency > report.top_other_frequency;
  return report;
}

}  // namespace bbqae
