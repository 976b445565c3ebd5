// Copyright 2026 The ICDA Authors
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

// Synthetic multi-aspect review corpus.
//
// Every generated document has one sentence per aspect. Aspect 0 is the
// target: its sentiment equals the label with probability p_target. Aspect
// i >= 1 agrees with the label with probability p_spurious[i - 1]. A sentence
// is built from shared neutral words, words naming its aspect, and polarity
// words specific to (aspect, sentiment).
//
// The aspect and sentiment tags on a sentence are ground truth. Reads go
// through audited accessors so tests can prove the learning pipeline never
// looks at them.

#ifndef ICDA_CORPUS_HPP_
#define ICDA_CORPUS_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "icda/probmodel.hpp"

namespace icda {

using TokenId = std::uint32_t;
using DocId = std::uint64_t;

inline constexpr int kUnknownLabel = -1;
inline constexpr int kTargetAspect = 0;

struct CorpusSpec {
  std::size_t n_docs = 20'000;  // across all splits
  std::size_t n_aspects = 3;
  std::size_t sentences_per_aspect = 1;
  double p_target = 0.95;
  std::vector<double> p_spurious = {0.9, 0.5};
  std::size_t vocab_size_per_aspect = 12;
  std::size_t sentiment_words_per_aspect = 6;  // per polarity
  std::size_t neutral_words_shared = 60;
  std::size_t sentence_length_min = 8;
  std::size_t sentence_length_max = 12;
  std::size_t sentiment_tokens_min = 1;
  std::size_t sentiment_tokens_max = 3;
  std::size_t aspect_tokens = 2;
  bool shuffle_sentences = true;
  double dev_fraction = 0.1;
  double test_fraction = 0.1;
  std::uint64_t seed = 1;

  // Throws std::invalid_argument describing the first violated rule.
  void validate() const;
};

// Maps token ids to printable words. Layout: shared neutral words first, then
// per aspect a block of aspect words, positive words and negative words.
class Vocabulary {
 public:
  explicit Vocabulary(const CorpusSpec& spec);

  std::size_t size() const { return words_.size(); }
  const std::string& word(TokenId id) const { return words_.at(id); }
  const std::vector<std::string>& words() const { return words_; }

  TokenId neutral(std::size_t i) const;
  TokenId aspect_word(std::size_t aspect, std::size_t i) const;
  TokenId polarity_word(std::size_t aspect, bool positive, std::size_t i) const;

  // FNV-1a over the word list; stamps serialized models.
  std::uint64_t hash() const;

 private:
  std::size_t neutral_count_;
  std::size_t aspect_words_;
  std::size_t polarity_words_;
  std::vector<std::string> words_;
};

// Number of ground-truth tag reads since the last reset, across all threads.
std::uint64_t ground_truth_reads();
void reset_ground_truth_reads();

class Sentence {
 public:
  Sentence() = default;
  Sentence(std::vector<TokenId> tokens, int aspect, int sentiment)
      : tokens(std::move(tokens)), aspect_(aspect), sentiment_(sentiment) {}

  std::vector<TokenId> tokens;

  // Ground truth; audited.
  int aspect() const;
  int sentiment() const;

 private:
  int aspect_ = -1;
  int sentiment_ = -1;
};

struct Document {
  DocId doc_id = 0;
  std::vector<Sentence> sentences;
  int label = kUnknownLabel;
  bool is_counterfactual = false;
  std::optional<DocId> source_doc_id;

  // Ground truth; audited.
  std::vector<int> aspect_of_sentence() const;
  std::vector<int> sentiment_of_sentence() const;
};

enum class Split { kTrain, kDev, kTest };

const char* split_name(Split split);
Split parse_split(const std::string& name);

struct Dataset {
  std::vector<Document> documents;
  Split split = Split::kTrain;
  std::shared_ptr<const CorpusSpec> spec;

  std::size_t size() const { return documents.size(); }
  bool has_counterfactuals() const;
  std::size_t count_label(int label) const;
};

struct CorpusSplits {
  Dataset train;
  Dataset dev;
  Dataset test;
};

// Deterministic in spec.seed. Labels are balanced within each split.
CorpusSplits generate_corpus(const CorpusSpec& spec);

struct CorpusStats {
  // Per aspect: fraction of documents whose aspect sentence sentiment equals
  // the label, i.e. the symmetric-channel estimate of P(Y | sentiment).
  std::vector<double> p_label_given_sentiment;
  // Per aspect: plug-in mutual information between sentiment and label, bits.
  std::vector<double> mutual_information_bits;

  // Empirical (target, first spurious) pair.
  ThetaSpec theta() const;
  double delta_bits() const;
};

// Requires a generated (counterfactual-free) dataset with both labels and
// both sentiments present for every aspect.
CorpusStats corpus_stats(const Dataset& ds);

}  // namespace icda

#endif  // ICDA_CORPUS_HPP_
