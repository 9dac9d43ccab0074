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

#include "etlab/typo.h"

#include <algorithm>
#include <fstream>

#include "etlab/config.h"
#include "etlab/corpus.h"

namespace etlab {

std::string_view TypoOpName(TypoOp op) {
  switch (op) {
    case TypoOp::kInsertion:
      return "insertion";
    case TypoOp::kDeletion:
      return "deletion";
    case TypoOp::kSwap:
      return "swap";
    case TypoOp::kMistype:
      return "mistype";
    case TypoOp::kPronounce:
      return "pronounce";
    case TypoOp::kReplaceW:
      return "replace_w";
  }
  return "insertion";
}

TypoOp ParseTypoOp(std::string_view name) {
  for (TypoOp op : kAllTypoOps) {
    if (TypoOpName(op) == name) return op;
  }
  throw InvalidArgument("unknown typo operator: " + std::string(name));
}

std::vector<TypoOp> ParseTypoOps(std::string_view spec) {
  if (spec == "all") return {kAllTypoOps.begin(), kAllTypoOps.end()};
  std::vector<TypoOp> ops;
  for (const auto& name : SplitList(std::string(spec))) {
    const TypoOp op = ParseTypoOp(name);
    if (std::find(ops.begin(), ops.end(), op) == ops.end()) ops.push_back(op);
  }
  if (ops.empty()) throw InvalidArgument("no typo operators selected");
  return ops;
}

void TypoTables::Validate() const {
  const std::pair<const TypoMap*, const char*> maps[] = {
      {&keyboard_adjacency, "keyboard_adjacency"},
      {&mistype, "mistype"},
      {&pronounce, "pronounce"},
      {&wiki_typos, "wiki_typos"}};
  for (const auto& [map, name] : maps) {
    if (map->empty()) throw InvalidArgument(std::string(name) + " is empty");
    for (const auto& [key, values] : *map) {
      if (key.empty() || values.empty()) {
        throw InvalidArgument(std::string(name) + " has an empty entry");
      }
      for (const auto& v : values) {
        if (v == key || v.empty()) {
          throw InvalidArgument(std::string(name) + ": bad value for " + key);
        }
      }
    }
  }
  for (char c = 'a'; c <= 'z'; ++c) {
    if (!keyboard_adjacency.count(std::string(1, c))) {
      throw InvalidArgument(std::string("keyboard_adjacency misses ") + c);
    }
  }
}

TypoMap LoadTypoMap(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open typo table " + path);
  TypoMap map;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": expected from<TAB>to1,to2");
    }
    auto values = SplitList(line.substr(tab + 1));
    if (values.empty()) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": no targets");
    }
    auto& slot = map[AsciiLower(line.substr(0, tab))];
    slot.insert(slot.end(), values.begin(), values.end());
  }
  return map;
}

// ---------------------------------------------------------------------------

std::string TypoEdit::ApplyTo(std::string_view token) const {
  std::string out(token.substr(0, pos));
  out += text;
  out += token.substr(pos + len);
  return out;
}

std::string DeleteAt(std::string_view token, size_t i) {
  return TypoEdit{i, 1, ""}.ApplyTo(token);
}

std::string SwapAt(std::string_view token, size_t i) {
  std::string out(token);
  std::swap(out[i], out[i + 1]);
  return out;
}

std::string InsertAfter(std::string_view token, size_t i, char c) {
  return TypoEdit{i + 1, 0, std::string(1, c)}.ApplyTo(token);
}

namespace {

bool IsAscii(char c) { return static_cast<unsigned char>(c) < 0x80; }
bool IsUpper(char c) { return c >= 'A' && c <= 'Z'; }

// Gives `repl` the case of `like`: an uppercase original yields an
// uppercase first letter.
std::string MatchCase(std::string repl, std::string_view like) {
  if (!like.empty() && IsUpper(like[0]) && !repl.empty() && repl[0] >= 'a' &&
      repl[0] <= 'z') {
    repl[0] = static_cast<char>(repl[0] - 'a' + 'A');
  }
  return repl;
}

const std::vector<std::string>* Lookup(const TypoMap& map, std::string_view key) {
  auto it = map.find(key);
  return it == map.end() ? nullptr : &it->second;
}

}  // namespace

std::vector<TypoEdit> CandidateEdits(std::string_view token, TypoOp op,
                                     const TypoTables& tables) {
  std::vector<TypoEdit> edits;
  const std::string lower = AsciiLower(token);
  const size_t n = token.size();
  switch (op) {
    case TypoOp::kInsertion:
      for (size_t i = 0; i < n; ++i) {
        const auto* near =
            Lookup(tables.keyboard_adjacency, std::string_view(lower).substr(i, 1));
        if (!near) continue;
        for (const auto& c : *near) {
          edits.push_back({i + 1, 0, MatchCase(c, token.substr(i, 1))});
        }
      }
      break;
    case TypoOp::kDeletion:
      if (n < 2) break;
      for (size_t i = 0; i < n; ++i) {
        if (IsAscii(token[i])) edits.push_back({i, 1, ""});
      }
      break;
    case TypoOp::kSwap:
      if (n < 2) break;
      for (size_t i = 0; i + 1 < n; ++i) {
        if (IsAscii(token[i]) && IsAscii(token[i + 1]) &&
            token[i] != token[i + 1]) {
          edits.push_back({i, 2, std::string{token[i + 1], token[i]}});
        }
      }
      break;
    case TypoOp::kMistype:
    case TypoOp::kPronounce: {
      const TypoMap& map =
          op == TypoOp::kMistype ? tables.mistype : tables.pronounce;
      for (size_t i = 0; i < n; ++i) {
        for (const auto& [key, values] : map) {
          if (lower.compare(i, key.size(), key) != 0) continue;
          const auto original = token.substr(i, key.size());
          for (const auto& v : values) {
            std::string text = MatchCase(v, original);
            if (text != original) edits.push_back({i, key.size(), std::move(text)});
          }
        }
      }
      break;
    }
    case TypoOp::kReplaceW:
      if (const auto* words = Lookup(tables.wiki_typos, lower)) {
        for (const auto& w : *words) {
          std::string text = MatchCase(w, token);
          if (text != token) edits.push_back({0, n, std::move(text)});
        }
      }
      break;
  }
  return edits;
}

std::optional<std::string> ApplyTypo(std::string_view token, TypoOp op,
                                     const TypoTables& tables, Rng& rng) {
  const auto edits = CandidateEdits(token, op, tables);
  if (edits.empty()) return std::nullopt;
  return edits[UniformIndex(rng, edits.size())].ApplyTo(token);
}

bool IsSingleApplication(std::string_view original, std::string_view corrupted,
                         TypoOp op, const TypoTables& tables) {
  if (original == corrupted) return false;
  for (const auto& e : CandidateEdits(original, op, tables)) {
    if (e.ApplyTo(original) == corrupted) return true;
  }
  return false;
}

}  // namespace etlab
