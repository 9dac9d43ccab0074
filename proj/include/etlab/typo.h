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

// Single-token typo operators.

#ifndef ETLAB_TYPO_H_
#define ETLAB_TYPO_H_

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "etlab/common.h"

namespace etlab {

enum class TypoOp { kInsertion, kDeletion, kSwap, kMistype, kPronounce, kReplaceW };

inline constexpr std::array<TypoOp, 6> kAllTypoOps = {
    TypoOp::kInsertion, TypoOp::kDeletion,  TypoOp::kSwap,
    TypoOp::kMistype,   TypoOp::kPronounce, TypoOp::kReplaceW};

std::string_view TypoOpName(TypoOp op);
TypoOp ParseTypoOp(std::string_view name);
// "all" or a comma-separated list of operator names.
std::vector<TypoOp> ParseTypoOps(std::string_view spec);

using TypoMap = std::map<std::string, std::vector<std::string>, std::less<>>;

struct TypoTables {
  // Lowercase letter or digit -> QWERTY neighbours (letters and digits).
  TypoMap keyboard_adjacency;
  // Character -> visually confusable replacements ("o" -> "0").
  TypoMap mistype;
  // Grapheme -> similar-sounding spelling ("ph" -> "f", "e" -> "a").
  TypoMap pronounce;
  // Word -> common human misspellings.
  TypoMap wiki_typos;

  static TypoTables Builtin();

  // Throws unless every map is non-empty, no entry maps a key to itself and
  // adjacency covers 'a'..'z'.
  void Validate() const;
};

// TSV lines "from<TAB>to1,to2,...". Blank lines and '#' comments skipped.
TypoMap LoadTypoMap(const std::string& path);

// One concrete edit: replace token[pos, pos + len) with `text`.
struct TypoEdit {
  size_t pos = 0;
  size_t len = 0;
  std::string text;

  std::string ApplyTo(std::string_view token) const;
};

// Every edit `op` could make to `token`, in a fixed order. Keys are matched
// on the ASCII-lowercased token; replacement letters copy the case of the
// character they replace. Only ASCII bytes are ever edited.
std::vector<TypoEdit> CandidateEdits(std::string_view token, TypoOp op,
                                     const TypoTables& tables);

// A seeded-uniform pick among CandidateEdits. nullopt means the operator
// is inapplicable to this token; the result never equals the input.
std::optional<std::string> ApplyTypo(std::string_view token, TypoOp op,
                                     const TypoTables& tables, Rng& rng);

// Deterministic primitives.
std::string DeleteAt(std::string_view token, size_t i);
std::string SwapAt(std::string_view token, size_t i);  // swaps i and i + 1
std::string InsertAfter(std::string_view token, size_t i, char c);

// True if `corrupted` is exactly one application of `op` to `original`.
bool IsSingleApplication(std::string_view original, std::string_view corrupted,
                         TypoOp op, const TypoTables& tables);

}  // namespace etlab

#endif  // ETLAB_TYPO_H_
