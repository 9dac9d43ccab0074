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

#include <algorithm>
#include <set>

#include "etlab/corpus.h"

namespace etlab {
namespace {

constexpr std::string_view kOnsets = "bcdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";

// Pronounceable pseudo-word of 2 or 3 consonant-vowel syllables, with an
// optional closing consonant.
std::string PseudoWord(Rng& rng) {
  const int syllables = 2 + static_cast<int>(UniformIndex(rng, 2));
  std::string w;
  for (int s = 0; s < syllables; ++s) {
    w += kOnsets[UniformIndex(rng, kOnsets.size())];
    w += kVowels[UniformIndex(rng, kVowels.size())];
  }
  if (UniformIndex(rng, 2) == 0) w += kOnsets[UniformIndex(rng, kOnsets.size())];
  return w;
}

std::vector<std::string> FreshWords(Rng& rng, int n,
                                    std::set<std::string>& taken) {
  std::vector<std::string> out;
  while (static_cast<int>(out.size()) < n) {
    auto w = PseudoWord(rng);
    if (taken.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

std::string Join(const std::vector<std::string>& words) {
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

void RequirePositive(int v, const char* name) {
  if (v <= 0) throw InvalidArgument(std::string(name) + " must be positive");
}

// Document of `len` tokens: `signal` placed at random positions, noise
// elsewhere.
std::string Compose(Rng& rng, int len, std::vector<std::string> signal,
                    const std::vector<std::string>& noise) {
  std::vector<std::string> words;
  words.reserve(len);
  for (size_t i = signal.size(); i < static_cast<size_t>(len); ++i) {
    words.push_back(noise[UniformIndex(rng, noise.size())]);
  }
  for (auto& s : signal) {
    const size_t at = UniformIndex(rng, words.size() + 1);
    words.insert(words.begin() + static_cast<std::ptrdiff_t>(at), std::move(s));
  }
  return Join(words);
}

int DrawLength(Rng& rng, int doc_len) {
  const int slack = doc_len / 4;
  return doc_len - static_cast<int>(UniformIndex(rng, slack + 1));
}

}  // namespace

SynthLexicon MakeLexicon(int num_classes, int signal_tokens_per_class,
                         int noise_vocab, uint64_t seed) {
  if (num_classes < 2) throw InvalidArgument("K must be at least 2");
  RequirePositive(signal_tokens_per_class, "signal_tokens_per_class");
  RequirePositive(noise_vocab, "noise_vocab");
  Rng rng(MixSeed(seed, 0x1e8));
  std::set<std::string> taken;
  SynthLexicon lex;
  lex.num_classes = num_classes;
  for (int k = 0; k < num_classes; ++k) {
    lex.signal.push_back(FreshWords(rng, signal_tokens_per_class, taken));
  }
  lex.noise = FreshWords(rng, noise_vocab, taken);
  return lex;
}

Dataset GenSynth(const SynthLexicon& lexicon, const SynthOptions& opts,
                 uint64_t seed, Split split, std::string_view id_prefix) {
  RequirePositive(opts.n_per_class, "n_per_class");
  RequirePositive(opts.doc_len, "doc_len");
  RequirePositive(opts.max_signal, "max_signal");
  Rng rng(MixSeed(seed, static_cast<uint64_t>(split) + 0x5e7));
  const int k_classes = lexicon.num_classes;
  std::vector<Document> docs;
  docs.reserve(static_cast<size_t>(opts.n_per_class) * k_classes);
  // Interleave classes so that any prefix is roughly balanced.
  for (int i = 0; i < opts.n_per_class; ++i) {
    for (int k = 0; k < k_classes; ++k) {
      const int len = DrawLength(rng, opts.doc_len);
      const int n_signal =
          1 + static_cast<int>(UniformIndex(
                  rng, static_cast<size_t>(std::min(opts.max_signal, len))));
      std::vector<std::string> signal;
      const auto& own = lexicon.signal[k];
      for (int s = 0; s < n_signal; ++s) {
        signal.push_back(own[UniformIndex(rng, own.size())]);
      }
      Document d;
      d.id = std::string(id_prefix) + std::to_string(docs.size());
      d.text = Compose(rng, len, std::move(signal), lexicon.noise);
      d.label = k;
      docs.push_back(std::move(d));
    }
  }
  return Dataset(std::move(docs), k_classes, split);
}

Dataset GenSynth(const SynthOptions& opts, uint64_t seed) {
  const auto lex = MakeLexicon(opts.num_classes, opts.signal_tokens_per_class,
                               opts.noise_vocab, seed);
  return GenSynth(lex, opts, seed);
}

Dataset GenTransferCorpus(const SynthLexicon& lexicon, size_t n_docs,
                          const TransferOptions& opts, uint64_t seed) {
  if (n_docs == 0) throw InvalidArgument("n_docs must be positive");
  RequirePositive(opts.doc_len, "doc_len");
  RequirePositive(opts.max_signal, "max_signal");
  if (opts.closeness < 0.0 || opts.closeness > 1.0) {
    throw InvalidArgument("closeness must be in [0, 1]");
  }
  if (opts.signal_overlap < 0.0 || opts.signal_overlap > 1.0) {
    throw InvalidArgument("signal_overlap must be in [0, 1]");
  }
  Rng rng(MixSeed(seed, 0x7f2));
  std::set<std::string> taken(lexicon.noise.begin(), lexicon.noise.end());
  for (const auto& cls : lexicon.signal) taken.insert(cls.begin(), cls.end());

  const int n_noise = static_cast<int>(lexicon.noise.size());
  const int shared =
      static_cast<int>(std::lround(opts.closeness * static_cast<double>(n_noise)));
  std::vector<std::string> noise = lexicon.noise;
  std::shuffle(noise.begin(), noise.end(), rng);
  noise.resize(static_cast<size_t>(shared));
  auto foreign = FreshWords(rng, n_noise - shared, taken);
  noise.insert(noise.end(), foreign.begin(), foreign.end());
  if (noise.empty()) noise = FreshWords(rng, 1, taken);

  std::vector<std::vector<std::string>> signal_pools;
  for (const auto& cls : lexicon.signal) {
    const int n = static_cast<int>(cls.size());
    const int kept = static_cast<int>(
        std::lround(opts.signal_overlap * static_cast<double>(n)));
    std::vector<std::string> pool = cls;
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(static_cast<size_t>(kept));
    auto fresh = FreshWords(rng, n - kept, taken);
    pool.insert(pool.end(), fresh.begin(), fresh.end());
    signal_pools.push_back(std::move(pool));
  }

  const int k_classes = lexicon.num_classes;
  std::vector<Document> docs;
  docs.reserve(n_docs);
  for (size_t i = 0; i < n_docs; ++i) {
    const int len = DrawLength(rng, opts.doc_len);
    const int dominant = static_cast<int>(UniformIndex(rng, k_classes));
    const int n_signal =
        1 + static_cast<int>(UniformIndex(
                rng, static_cast<size_t>(std::min(opts.max_signal, len))));
    std::vector<std::string> signal;
    std::bernoulli_distribution mix(opts.mix_rate);
    for (int s = 0; s < n_signal; ++s) {
      const int cls =
          mix(rng) ? static_cast<int>(UniformIndex(rng, k_classes)) : dominant;
      const auto& pool = signal_pools[cls];
      signal.push_back(pool[UniformIndex(rng, pool.size())]);
    }
    Document d;
    d.id = "t" + std::to_string(i);
    d.text = Compose(rng, len, std::move(signal), noise);
    docs.push_back(std::move(d));
  }
  return Dataset(std::move(docs), k_classes, Split::kPool);
}

}  // namespace etlab
