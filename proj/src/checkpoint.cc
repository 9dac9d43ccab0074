// Copyright 2026 The etlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Checkpoint layout, all integers and floats little-endian:
//
//   bytes 0..7   magic "ETLABCK1"
//   u32          family (0 = embedbag, 1 = mlp)
//   u32          embed_dim
//   u32          hidden (unused by embedbag)
//   u32          num_classes K
//   u32          embedding rows (= vocab size)
//   u64          vocab fingerprint
//   f64[]        embedding (rows x d, row-major)
//   f64[]        w1 (hidden x d), b1 (hidden)        -- mlp only
//   f64[]        w_out (K x inputs), b_out (K)

#include <bit>
#include <cstring>
#include <fstream>

#include "etlab/model.h"

namespace etlab {
namespace {

constexpr char kMagic[8] = {'E', 'T', 'L', 'A', 'B', 'C', 'K', '1'};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void U32(uint32_t v) { Bytes(v); }
  void U64(uint64_t v) { Bytes(v); }
  template <typename T>
  void F64s(const T& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) Bytes(std::bit_cast<uint64_t>(t.data()[i]));
  }

 private:
  template <typename U>
  void Bytes(U v) {
    char buf[sizeof(U)];
    for (size_t i = 0; i < sizeof(U); ++i) {
      buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    }
    out_.write(buf, sizeof(U));
  }
  std::ostream& out_;
};

class Reader {
 public:
  Reader(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}

  uint32_t U32() { return Bytes<uint32_t>(); }
  uint64_t U64() { return Bytes<uint64_t>(); }
  template <typename T>
  void F64s(T& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      t.data()[i] = std::bit_cast<double>(Bytes<uint64_t>());
    }
  }

 private:
  template <typename U>
  U Bytes() {
    unsigned char buf[sizeof(U)];
    if (!in_.read(reinterpret_cast<char*>(buf), sizeof(U))) {
      throw ParseError(path_ + ": truncated checkpoint");
    }
    U v = 0;
    for (size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
    return v;
  }
  std::istream& in_;
  std::string path_;
};

}  // namespace

void SaveModel(const Model& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path);
  out.write(kMagic, sizeof(kMagic));
  Writer w(out);
  const bool mlp = m.arch.family == Family::kMlp;
  w.U32(mlp ? 1 : 0);
  w.U32(static_cast<uint32_t>(m.arch.embed_dim));
  w.U32(static_cast<uint32_t>(m.arch.hidden));
  w.U32(static_cast<uint32_t>(m.num_classes));
  w.U32(static_cast<uint32_t>(m.embedding.rows()));
  w.U64(m.vocab_fingerprint);
  w.F64s(m.embedding);
  if (mlp) {
    w.F64s(m.w1);
    w.F64s(m.b1);
  }
  w.F64s(m.w_out);
  w.F64s(m.b_out);
  if (!out) throw Error("write failed: " + path);
}

Model LoadModel(const std::string& path, const Vocab& vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path);
  char magic[8];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError(path + ": not a checkpoint");
  }
  Reader r(in, path);
  Model m;
  const uint32_t family = r.U32();
  if (family > 1) throw ParseError(path + ": unknown architecture family");
  m.arch.family = family == 1 ? Family::kMlp : Family::kEmbedBag;
  m.arch.embed_dim = static_cast<int>(r.U32());
  m.arch.hidden = static_cast<int>(r.U32());
  m.num_classes = static_cast<int>(r.U32());
  const auto rows = static_cast<int>(r.U32());
  m.vocab_fingerprint = r.U64();
  m.arch.Validate();
  if (m.vocab_fingerprint != vocab.Fingerprint() || rows != vocab.size()) {
    throw InvalidArgument(path + ": checkpoint was built for another vocab");
  }
  if (m.num_classes < 2) throw ParseError(path + ": bad class count");
  m.embedding.resize(rows, m.arch.embed_dim);
  r.F64s(m.embedding);
  if (m.arch.family == Family::kMlp) {
    m.w1.resize(m.arch.hidden, m.arch.embed_dim);
    m.b1.resize(m.arch.hidden);
    r.F64s(m.w1);
    r.F64s(m.b1);
  }
  m.w_out.resize(m.num_classes, m.head_inputs());
  m.b_out.resize(m.num_classes);
  r.F64s(m.w_out);
  r.F64s(m.b_out);
  return m;
}

}  // namespace etlab
