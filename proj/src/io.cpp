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

#include "bbqae/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

namespace bbqae {
namespace {

constexpr uint16_t kCmatVersion = 1;
constexpr uint16_t kCheckpointVersion = 1;
constexpr uint16_t kAscendingNeuronOrder = 1;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ConfigError("unexpected end of binary stream");
  return v;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw ConfigError("cannot open '" + path + "' for reading");
  return in;
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_cmat(std::ostream& out, const Matrix& m) {
  if (m.rows() != m.cols()) throw ShapeError("write_cmat: matrix must be square");
  out.write("CMAT", 4);
  write_pod(out, kCmatVersion);
  write_pod(out, static_cast<uint32_t>(m.rows()));
  const char reserved[6] = {};
  out.write(reserved, sizeof(reserved));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) {
      write_pod(out, m(i, j).real());
      write_pod(out, m(i, j).imag());
    }
}

Matrix read_cmat(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "CMAT", 4) != 0)
    throw ConfigError("bad CMAT magic");
  if (read_pod<uint16_t>(in) != kCmatVersion) throw ConfigError("unsupported CMAT version");
  const auto dim = static_cast<Index>(read_pod<uint32_t>(in));
  if (dim <= 0 || dim > kMaxRegisterDim) throw ConfigError("CMAT dimension out of range");
  char reserved[6];
  in.read(reserved, sizeof(reserved));
  Matrix m(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) {
      const double re = read_pod<double>(in);
      const double im = read_pod<double>(in);
      m(i, j) = Complex(re, im);
    }
  return m;
}

void save_checkpoint(const std::string& path, const QuantumMap& map, uint64_t iteration) {
  map.require_valid();
  auto out = open_out(path, std::ios::binary);
  out.write("BBQC", 4);
  write_pod(out, kCheckpointVersion);
  write_pod(out, kAscendingNeuronOrder);
  write_pod(out, static_cast<uint32_t>(map.topology.num_layers()));
  write_pod(out, static_cast<uint32_t>(map.topology.brainbox_begin));
  write_pod(out, static_cast<uint32_t>(map.topology.brainbox_end));
  write_pod(out, iteration);
  for (int size : map.topology.layer_sizes) write_pod(out, static_cast<uint32_t>(size));
  for (int l = 2; l <= map.topology.num_layers(); ++l)
    for (int j = 1; j <= map.topology.layer_size(l); ++j) write_cmat(out, map.unitary(l, j));
  if (!out) throw ConfigError("failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  auto in = open_in(path, std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "BBQC", 4) != 0)
    throw ConfigError("'" + path + "' is not a checkpoint file");
  if (read_pod<uint16_t>(in) != kCheckpointVersion)
    throw ConfigError("unsupported checkpoint version in '" + path + "'");
  if (read_pod<uint16_t>(in) != kAscendingNeuronOrder)
    throw ConfigError("unsupported neuron application order in '" + path + "'");
  const auto n_layers = read_pod<uint32_t>(in);
  const auto bb_begin = read_pod<uint32_t>(in);
  const auto bb_end = read_pod<uint32_t>(in);
  Checkpoint ck;
  ck.iteration = read_pod<uint64_t>(in);
  std::vector<int> sizes(n_layers);
  for (auto& s : sizes) s = static_cast<int>(read_pod<uint32_t>(in));
  NetworkTopology topo(sizes, static_cast<int>(bb_begin), static_cast<int>(bb_end));
  ck.map.topology = topo;
  ck.map.unitaries.resize(n_layers - 1);
  for (int l = 2; l <= topo.num_layers(); ++l)
    for (int j = 1; j <= topo.layer_size(l); ++j)
      ck.map.unitaries[static_cast<std::size_t>(l - 2)].push_back(read_cmat(in));
  ck.map.require_valid();
  return ck;
}

void save_dataset(const std::string& path, const NoisyDataset& dataset) {
  auto out = open_out(path, std::ios::out);
  out << "bbqae-dataset v1\n";
  out << "target ghz " << dataset.target.n_qubits << "\n";
  out << "kind " << to_string(dataset.spec.kind) << "\n";
  out << "p " << format_real(dataset.spec.p) << "\n";
  out << "seed " << dataset.spec.seed << "\n";
  out << "mode " << (dataset.mode == DatasetMode::sampled ? "sampled" : "exact") << "\n";
  out << "samples " << dataset.samples.size() << "\n";
  for (const NoiseRealization& s : dataset.samples) {
    struct Visitor {
      std::ostream& out;
      void operator()(const BitFlipDescriptor& d) const { out << "flip " << d.mask; }
      void operator()(const PauliDescriptor& d) const { out << "pauli " << d.labels; }
      void operator()(const ErasureDescriptor& d) const {
        if (!d.applied) {
          out << "keep";
          return;
        }
        out << "erase " << d.qubit << " " << d.branch << " " << format_real(d.alpha.real())
            << " " << format_real(d.alpha.imag()) << " " << format_real(d.beta.real()) << " "
            << format_real(d.beta.imag());
      }
    };
    std::visit(Visitor{out}, s.descriptor);
    out << " " << format_real(s.weight);
    for (Index i = 0; i < s.state.size(); ++i)
      out << " " << format_real(s.state(i).real()) << " " << format_real(s.state(i).imag());
    out << "\n";
  }
  if (!out) throw ConfigError("failed writing dataset '" + path + "'");
}

NoisyDataset load_dataset(const std::string& path) {
  auto in = open_in(path, std::ios::in);
  std::string line;
  auto next_line = [&]() -> std::string& {
    if (!std::getline(in, line)) throw ConfigError("truncated dataset file '" + path + "'");
    return line;
  };
  if (next_line() != "bbqae-dataset v1")
    throw ConfigError("'" + path + "' is not a bbqae dataset file");

  NoisyDataset ds;
  std::string word, kind_name, target_kind, mode_name;
  int n_qubits = 0;
  std::size_t n_samples = 0;
  {
    std::istringstream ss(next_line());
    ss >> word >> target_kind >> n_qubits;
    if (word != "target" || target_kind != "ghz" || n_qubits < 2)
      throw ConfigError("unsupported dataset target in '" + path + "'");
    ds.target = make_ghz(n_qubits);
  }
  {
    std::istringstream ss(next_line());
    ss >> word >> kind_name;
    if (word != "kind") throw ConfigError("missing dataset kind in '" + path + "'");
    ds.spec.kind = noise_kind_from_string(kind_name);
  }
  {
    std::istringstream ss(next_line());
    ss >> word >> ds.spec.p;
    if (word != "p" || !ss) throw ConfigError("missing dataset p in '" + path + "'");
  }
  {
    std::istringstream ss(next_line());
    ss >> word >> ds.spec.seed;
    if (word != "seed" || !ss) throw ConfigError("missing dataset seed in '" + path + "'");
  }
  {
    std::istringstream ss(next_line());
    ss >> word >> mode_name;
    if (word != "mode") throw ConfigError("missing dataset mode in '" + path + "'");
    if (mode_name == "sampled")
      ds.mode = DatasetMode::sampled;
    else if (mode_name == "exact")
      ds.mode = DatasetMode::exact;
    else
      throw ConfigError("unknown dataset mode '" + mode_name + "'");
  }
  {
    std::istringstream ss(next_line());
    ss >> word >> n_samples;
    if (word != "samples" || !ss) throw ConfigError("missing sample count in '" + path + "'");
  }

  const Index dim = Index{1} << n_qubits;
  ds.samples.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    std::istringstream ss(next_line());
    std::string tag;
    ss >> tag;
    NoiseRealization r;
    if (tag == "flip") {
      uint32_t mask = 0;
      ss >> mask;
      r.descriptor = BitFlipDescriptor{mask};
    } else if (tag == "pauli") {
      PauliDescriptor d;
      ss >> d.labels;
      r.descriptor = std::move(d);
    } else if (tag == "keep") {
      r.descriptor = ErasureDescriptor{};
    } else if (tag == "erase") {
      ErasureDescriptor d;
      d.applied = true;
      double are, aim, bre, bim;
      ss >> d.qubit >> d.branch >> are >> aim >> bre >> bim;
      d.alpha = Complex(are, aim);
      d.beta = Complex(bre, bim);
      r.descriptor = d;
    } else {
      throw ConfigError("unknown record tag '" + tag + "' in '" + path + "'");
    }
    ss >> r.weight;
    r.state.resize(dim);
    for (Index k = 0; k < dim; ++k) {
      double re, im;
      ss >> re >> im;
      r.state(k) = Complex(re, im);
    }
    if (!ss) throw ConfigError("malformed dataset record in '" + path + "'");
    ds.samples.push_back(std::move(r));
  }
  return ds;
}

}  // namespace bbqae
