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

#ifndef ETLAB_COMMON_H_
#define ETLAB_COMMON_H_

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace etlab {

// Every recoverable failure in the library is reported as an Error (or a
// subclass). Messages are meant for humans; callers branch on the type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad argument or violated precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed input file or wire payload.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class Diverged : public Error {
 public:
  Diverged() : Error("diverged") {}
};

// The victim could not be reached.
class TransportError : public Error {
 public:
  using Error::Error;
};

// 64-bit FNV-1a. Used for n-gram bucketing, vocab fingerprints and config
// hashes, so its output must never change.
constexpr uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr uint64_t kFnvPrime = 1099511628211ULL;

constexpr uint64_t Fnv1a(std::string_view bytes, uint64_t h = kFnvOffset) {
  for (char c : bytes) {
    h ^= static_cast<uint8_t>(c);
    h *= kFnvPrime;
  }
  return h;
}

// SplitMix64 finalizer; mixes a seed with a stream index so that
// (seed, i) pairs give unrelated generator states.
constexpr uint64_t MixSeed(uint64_t seed, uint64_t stream) {
  uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

// Uniform integer in [0, n). n must be positive.
inline size_t UniformIndex(Rng& rng, size_t n) {
  return std::uniform_int_distribution<size_t>(0, n - 1)(rng);
}

std::string HexDigest(uint64_t h);

}  // namespace etlab

#endif  // ETLAB_COMMON_H_
