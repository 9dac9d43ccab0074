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

#include "etlab/corpus.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace etlab {

std::string HexDigest(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kDev:
      return "dev";
    case Split::kTest:
      return "test";
    case Split::kPool:
      return "pool";
  }
  return "train";
}

namespace {

bool IsBlank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return c == ' ' || (c >= '\t' && c <= '\r');
  });
}

}  // namespace

Dataset::Dataset(std::vector<Document> docs, int num_classes, Split split)
    : docs_(std::move(docs)), num_classes_(num_classes), split_(split) {
  if (num_classes_ < 1) throw InvalidArgument("num_classes must be positive");
  std::unordered_set<std::string> seen;
  for (const auto& d : docs_) {
    if (!seen.insert(d.id).second) {
      throw InvalidArgument("duplicate document id: " + d.id);
    }
    if (IsBlank(d.text)) {
      throw InvalidArgument("document " + d.id + " has blank text");
    }
    if (d.label && (*d.label < 0 || *d.label >= num_classes_)) {
      throw InvalidArgument("document " + d.id + " label " +
                            std::to_string(*d.label) + " out of range");
    }
  }
}

// ---------------------------------------------------------------------------
// Tokenization

namespace {

// Decodes one UTF-8 code point starting at text[i]; returns its byte length.
// Invalid sequences are consumed one byte at a time as U+FFFD.
size_t DecodeUtf8(std::string_view text, size_t i, char32_t* cp) {
  const auto b0 = static_cast<unsigned char>(text[i]);
  size_t len = 1;
  char32_t value = 0xFFFD;
  if (b0 < 0x80) {
    value = b0;
  } else if ((b0 >> 5) == 0x6) {
    len = 2;
    value = b0 & 0x1F;
  } else if ((b0 >> 4) == 0xE) {
    len = 3;
    value = b0 & 0x0F;
  } else if ((b0 >> 3) == 0x1E) {
    len = 4;
    value = b0 & 0x07;
  } else {
    *cp = 0xFFFD;
    return 1;
  }
  if (i + len > text.size()) {
    *cp = 0xFFFD;
    return 1;
  }
  for (size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(text[i + k]);
    if ((b >> 6) != 0x2) {
      *cp = 0xFFFD;
      return 1;
    }
    value = (value << 6) | (b & 0x3F);
  }
  *cp = value;
  return len;
}

bool IsUnicodeSpace(char32_t c) {
  return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 ||
         c == 0x1680 || (c >= 0x2000 && c <= 0x200A) || c == 0x2028 ||
         c == 0x2029 || c == 0x202F || c == 0x205F || c == 0x3000;
}

bool IsAsciiPunct(char32_t c) {
  return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
         (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
}

}  // namespace

std::vector<TokenSpan> SplitTokens(std::string_view text) {
  std::vector<TokenSpan> out;
  size_t start = std::string_view::npos;
  auto flush = [&](size_t end) {
    if (start != std::string_view::npos) {
      out.push_back({std::string(text.substr(start, end - start)), start, end});
      start = std::string_view::npos;
    }
  };
  size_t i = 0;
  while (i < text.size()) {
    char32_t cp;
    const size_t len = DecodeUtf8(text, i, &cp);
    if (IsUnicodeSpace(cp)) {
      flush(i);
    } else if (IsAsciiPunct(cp)) {
      flush(i);
      out.push_back({std::string(text.substr(i, 1)), i, i + 1});
    } else if (start == std::string_view::npos) {
      start = i;
    }
    i += len;
  }
  flush(text.size());
  return out;
}

std::string AsciiLower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (auto& span : SplitTokens(text)) out.push_back(AsciiLower(span.surface));
  return out;
}

// ---------------------------------------------------------------------------
// Vocabulary

Vocab::Vocab(std::vector<std::string> words, int buckets, int ngram_lo,
             int ngram_hi)
    : words_(std::move(words)),
      buckets_(buckets),
      ngram_lo_(ngram_lo),
      ngram_hi_(ngram_hi) {
  if (buckets_ < 1) throw InvalidArgument("bucket count must be >= 1");
  if (ngram_lo_ < 1 || ngram_hi_ < ngram_lo_) {
    throw InvalidArgument("invalid n-gram range");
  }
  std::sort(words_.begin(), words_.end());
  words_.erase(std::unique(words_.begin(), words_.end()), words_.end());
  for (size_t i = 0; i < words_.size(); ++i) {
    index_.emplace(words_[i], static_cast<int>(i));
  }
}

std::optional<int> Vocab::WordId(std::string_view word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int Vocab::BucketId(std::string_view gram) const {
  return num_words() + static_cast<int>(Fnv1a(gram) %
                                        static_cast<uint64_t>(buckets_));
}

uint64_t Vocab::Fingerprint() const {
  std::string header = std::to_string(buckets_) + ":" +
                       std::to_string(ngram_lo_) + ":" +
                       std::to_string(ngram_hi_) + "\n";
  uint64_t h = Fnv1a(header);
  for (const auto& w : words_) {
    h = Fnv1a(w, h);
    h = Fnv1a("\n", h);
  }
  return h;
}

void Vocab::Save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write vocab " + path);
  out << "etlab-vocab 1 " << buckets_ << ' ' << ngram_lo_ << ' ' << ngram_hi_
      << '\n';
  for (const auto& w : words_) out << w << '\n';
  if (!out) throw Error("write failed: " + path);
}

Vocab Vocab::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open vocab " + path);
  std::string line;
  std::getline(in, line);
  std::istringstream header(line);
  std::string magic;
  int version = 0, buckets = 0, lo = 0, hi = 0;
  header >> magic >> version >> buckets >> lo >> hi;
  if (magic != "etlab-vocab" || version != 1 || !header) {
    throw ParseError(path + ": not a vocab file");
  }
  std::vector<std::string> words;
  while (std::getline(in, line)) {
    if (!line.empty()) words.push_back(line);
  }
  return Vocab(std::move(words), buckets, lo, hi);
}

Vocab BuildVocab(std::span<const Document> docs, const VocabOptions& opts) {
  if (docs.empty()) throw InvalidArgument("empty corpus");
  if (opts.buckets < 1) throw InvalidArgument("bucket count must be >= 1");
  std::unordered_map<std::string, int> counts;
  for (const auto& d : docs) {
    for (auto& tok : Tokenize(d.text)) ++counts[tok];
  }
  std::vector<std::string> words;
  for (const auto& [w, n] : counts) {
    if (n >= opts.min_count) words.push_back(w);
  }
  return Vocab(std::move(words), opts.buckets, opts.ngram_lo, opts.ngram_hi);
}

Vocab BuildVocab(const Dataset& train, const VocabOptions& opts) {
  return BuildVocab(std::span<const Document>(train.docs()), opts);
}

// ---------------------------------------------------------------------------
// Encoding

std::vector<int> TokenFeatures(const Vocab& vocab, std::string_view token) {
  std::vector<int> ids;
  ids.push_back(vocab.WordId(token).value_or(vocab.unk_id()));
  const std::string wrapped = "<" + std::string(token) + ">";
  for (int n = vocab.ngram_lo(); n <= vocab.ngram_hi(); ++n) {
    if (static_cast<size_t>(n) > wrapped.size()) break;
    for (size_t i = 0; i + n <= wrapped.size(); ++i) {
      ids.push_back(vocab.BucketId(std::string_view(wrapped).substr(i, n)));
    }
  }
  ids.push_back(vocab.BucketId(wrapped));
  return ids;
}

EncodedDoc Encode(const Vocab& vocab, std::span<const std::string> tokens,
                  std::string source_id) {
  EncodedDoc doc;
  doc.source_id = std::move(source_id);
  if (tokens.empty()) {
    doc.features.push_back({vocab.unk_id(), 1.0});
    doc.total_features = 1;
    return doc;
  }
  std::map<int, int> counts;
  for (const auto& tok : tokens) {
    auto ids = TokenFeatures(vocab, tok);
    for (int id : ids) ++counts[id];
    doc.total_features += static_cast<int>(ids.size());
    doc.positions.push_back(std::move(ids));
  }
  const double total = doc.total_features;
  doc.features.reserve(counts.size());
  for (const auto& [id, n] : counts) doc.features.push_back({id, n / total});
  return doc;
}

EncodedDoc EncodeText(const Vocab& vocab, std::string_view text,
                      std::string source_id) {
  const auto tokens = Tokenize(text);
  return Encode(vocab, tokens, std::move(source_id));
}

// ---------------------------------------------------------------------------
// File formats

DataFormat ParseDataFormat(std::string_view name) {
  if (name == "jsonl") return DataFormat::kJsonl;
  if (name == "tsv") return DataFormat::kTsv;
  throw InvalidArgument("unknown data format: " + std::string(name));
}

DataFormat FormatFromPath(std::string_view path) {
  return path.ends_with(".tsv") ? DataFormat::kTsv : DataFormat::kJsonl;
}

Dataset LoadDataset(const std::string& path, DataFormat format,
                    int num_classes, Split split) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open dataset " + path);
  std::vector<Document> docs;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& why) {
    throw ParseError(path + ":" + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (IsBlank(line)) continue;
    Document doc;
    if (format == DataFormat::kJsonl) {
      nlohmann::json rec;
      try {
        rec = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        fail(std::string("malformed JSON: ") + e.what());
      }
      if (!rec.is_object() || !rec.contains("text") ||
          !rec["text"].is_string()) {
        fail("record needs a string \"text\" field");
      }
      doc.text = rec["text"].get<std::string>();
      if (rec.contains("label") && !rec["label"].is_null()) {
        if (!rec["label"].is_number_integer()) fail("label must be an integer");
        doc.label = rec["label"].get<int>();
      }
      if (rec.contains("id") && rec["id"].is_string()) {
        doc.id = rec["id"].get<std::string>();
      }
    } else {
      const auto tab = line.find('\t');
      doc.text = line.substr(0, tab);
      if (tab != std::string::npos) {
        const std::string field = line.substr(tab + 1);
        if (!field.empty()) {
          size_t used = 0;
          int label = 0;
          try {
            label = std::stoi(field, &used);
          } catch (const std::exception&) {
            fail("label is not an integer: " + field);
          }
          if (used != field.size()) fail("label is not an integer: " + field);
          doc.label = label;
        }
      }
    }
    if (IsBlank(doc.text)) fail("blank text");
    if (doc.label && *doc.label < 0) fail("negative label");
    if (doc.label && num_classes > 0 && *doc.label >= num_classes) {
      fail("label " + std::to_string(*doc.label) + " >= K=" +
           std::to_string(num_classes));
    }
    if (doc.id.empty()) doc.id = "L" + std::to_string(line_no);
    docs.push_back(std::move(doc));
  }
  if (num_classes <= 0) {
    int max_label = -1;
    for (const auto& d : docs) {
      if (d.label) max_label = std::max(max_label, *d.label);
    }
    num_classes = std::max(2, max_label + 1);
  }
  return Dataset(std::move(docs), num_classes, split);
}

void SaveDataset(const Dataset& data, const std::string& path,
                 DataFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write dataset " + path);
  for (const auto& d : data.docs()) {
    if (format == DataFormat::kJsonl) {
      nlohmann::json rec = {{"id", d.id}, {"text", d.text}};
      if (d.label) rec["label"] = *d.label;
      out << rec.dump() << '\n';
    } else {
      if (d.text.find_first_of("\t\n") != std::string::npos) {
        throw InvalidArgument("text of " + d.id + " cannot be stored as TSV");
      }
      out << d.text << '\t';
      if (d.label) out << *d.label;
      out << '\n';
    }
  }
  if (!out) throw Error("write failed: " + path);
}

}  // namespace etlab
