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

// Text ingestion: documents, datasets, tokenization, the hashed n-gram
// vocabulary and the synthetic corpora used by the experiments.

#ifndef ETLAB_CORPUS_H_
#define ETLAB_CORPUS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "etlab/common.h"

namespace etlab {

struct Document {
  std::string id;
  std::string text;
  std::optional<int> label;

  bool operator==(const Document&) const = default;
};

enum class Split { kTrain, kDev, kTest, kPool };

std::string_view SplitName(Split split);

class Dataset {
 public:
  // Validates ids (unique), texts (non-blank) and labels (< num_classes).
  Dataset(std::vector<Document> docs, int num_classes, Split split);

  const std::vector<Document>& docs() const { return docs_; }
  int num_classes() const { return num_classes_; }
  Split split() const { return split_; }
  size_t size() const { return docs_.size(); }
  bool empty() const { return docs_.empty(); }
  const Document& operator[](size_t i) const { return docs_[i]; }

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<Document> docs_;
  int num_classes_;
  Split split_;
};

// A token with its original surface form and byte span in the source text.
struct TokenSpan {
  std::string surface;
  size_t begin = 0;
  size_t end = 0;
};

// Splits on Unicode whitespace; every ASCII punctuation character becomes
// its own token. Surfaces keep their original case.
std::vector<TokenSpan> SplitTokens(std::string_view text);

// SplitTokens followed by ASCII lowercasing.
std::vector<std::string> Tokenize(std::string_view text);

std::string AsciiLower(std::string_view s);

// Word ids occupy [0, W), n-gram buckets [W, W + B) and UNK is W + B.
class Vocab {
 public:
  Vocab(std::vector<std::string> words, int buckets, int ngram_lo,
        int ngram_hi);

  int num_words() const { return static_cast<int>(words_.size()); }
  int buckets() const { return buckets_; }
  int ngram_lo() const { return ngram_lo_; }
  int ngram_hi() const { return ngram_hi_; }
  int unk_id() const { return num_words() + buckets_; }
  int size() const { return unk_id() + 1; }

  // Sorted word list; index is the word id.
  const std::vector<std::string>& words() const { return words_; }
  std::optional<int> WordId(std::string_view word) const;

  // Bucket id (already offset by num_words) for an n-gram string.
  int BucketId(std::string_view gram) const;

  // Stable fingerprint of the vocabulary contents and hashing parameters.
  uint64_t Fingerprint() const;

  void Save(const std::string& path) const;
  static Vocab Load(const std::string& path);

  bool operator==(const Vocab& other) const {
    return words_ == other.words_ && buckets_ == other.buckets_ &&
           ngram_lo_ == other.ngram_lo_ && ngram_hi_ == other.ngram_hi_;
  }

 private:
  std::vector<std::string> words_;
  std::map<std::string, int, std::less<>> index_;
  int buckets_;
  int ngram_lo_;
  int ngram_hi_;
};

struct VocabOptions {
  int min_count = 1;
  int buckets = 4096;
  int ngram_lo = 3;
  int ngram_hi = 4;
};

Vocab BuildVocab(std::span<const Document> docs, const VocabOptions& opts = {});
Vocab BuildVocab(const Dataset& train, const VocabOptions& opts = {});

struct Feature {
  int id = 0;
  double weight = 0.0;

  bool operator==(const Feature&) const = default;
};

// Mean-pooled bag of features. `positions[j]` holds the raw feature ids
// contributed by token j; `features` merges them by id with weights
// count / total so that the weights sum to one.
struct EncodedDoc {
  std::string source_id;
  std::vector<std::vector<int>> positions;
  std::vector<Feature> features;
  int total_features = 0;

  bool operator==(const EncodedDoc&) const = default;
};

// Features contributed by one (lowercased) token: word id or UNK, every
// character n-gram of "<token>" in [lo, hi], and the whole "<token>".
std::vector<int> TokenFeatures(const Vocab& vocab, std::string_view token);

EncodedDoc Encode(const Vocab& vocab, std::span<const std::string> tokens,
                  std::string source_id = {});
EncodedDoc EncodeText(const Vocab& vocab, std::string_view text,
                      std::string source_id = {});

enum class DataFormat { kJsonl, kTsv };

DataFormat ParseDataFormat(std::string_view name);
// Guesses the format from the file extension (.tsv, else jsonl).
DataFormat FormatFromPath(std::string_view path);

// Labels >= num_classes are rejected. If num_classes is 0 it is inferred
// as max label + 1 (and at least 2).
Dataset LoadDataset(const std::string& path, DataFormat format,
                    int num_classes = 0, Split split = Split::kTrain);
void SaveDataset(const Dataset& data, const std::string& path,
                 DataFormat format);

// Token inventory of a synthetic task. Signal tokens of different classes
// are disjoint, and no signal token is also a noise token.
struct SynthLexicon {
  int num_classes = 0;
  std::vector<std::vector<std::string>> signal;  // [class][i]
  std::vector<std::string> noise;
};

SynthLexicon MakeLexicon(int num_classes, int signal_tokens_per_class,
                         int noise_vocab, uint64_t seed);

struct SynthOptions {
  int num_classes = 4;
  int n_per_class = 250;
  int signal_tokens_per_class = 12;
  int noise_vocab = 300;
  int doc_len = 16;
  // Each document carries between 1 and max_signal class tokens.
  int max_signal = 2;
};

// Labeled, class-balanced synthetic documents drawn from `lexicon`, with
// opts.n_per_class documents per class.
Dataset GenSynth(const SynthLexicon& lexicon, const SynthOptions& opts,
                 uint64_t seed, Split split = Split::kTrain,
                 std::string_view id_prefix = "s");

// Convenience overload that draws the lexicon from the same seed.
Dataset GenSynth(const SynthOptions& opts, uint64_t seed);

// Unlabeled corpus from a shifted distribution over the same label space:
// a `closeness` fraction of its noise vocabulary and a `signal_overlap`
// fraction of each class's signal tokens are shared with `lexicon`, the rest
// are foreign words. Signal tokens may mix across classes inside a document.
struct TransferOptions {
  double closeness = 0.5;
  double signal_overlap = 0.75;
  int doc_len = 16;
  double mix_rate = 0.35;
  int max_signal = 3;
};

Dataset GenTransferCorpus(const SynthLexicon& lexicon, size_t n_docs,
                          const TransferOptions& opts, uint64_t seed);

}  // namespace etlab

#endif  // ETLAB_CORPUS_H_
