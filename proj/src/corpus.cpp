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

#include "icda/corpus.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "icda/rng.hpp"

namespace icda {
namespace {

std::atomic<std::uint64_t> g_ground_truth_reads{0};

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument("CorpusSpec: " + message);
}

template <typename T>
void shuffle_in_place(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.below(i)]);
  }
}

std::size_t uniform_in(std::size_t lo, std::size_t hi, Rng& rng) {
  return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

Sentence make_sentence(const CorpusSpec& spec, const Vocabulary& vocab,
                       std::size_t aspect, bool positive, Rng& rng) {
  const std::size_t length =
      uniform_in(spec.sentence_length_min, spec.sentence_length_max, rng);
  const std::size_t polar =
      uniform_in(spec.sentiment_tokens_min, spec.sentiment_tokens_max, rng);
  std::vector<TokenId> tokens;
  tokens.reserve(length);
  for (std::size_t i = 0; i < polar; ++i) {
    tokens.push_back(vocab.polarity_word(
        aspect, positive, rng.below(spec.sentiment_words_per_aspect)));
  }
  for (std::size_t i = 0; i < spec.aspect_tokens; ++i) {
    tokens.push_back(
        vocab.aspect_word(aspect, rng.below(spec.vocab_size_per_aspect)));
  }
  while (tokens.size() < length) {
    tokens.push_back(vocab.neutral(rng.below(spec.neutral_words_shared)));
  }
  shuffle_in_place(tokens, rng);
  return Sentence(std::move(tokens), static_cast<int>(aspect), positive ? 1 : 0);
}

Dataset generate_split(const CorpusSpec& spec,
                       const std::shared_ptr<const CorpusSpec>& shared,
                       const Vocabulary& vocab, Split split, std::size_t count,
                       DocId first_id, Rng& rng) {
  std::vector<int> labels(count);
  for (std::size_t i = 0; i < count; ++i) labels[i] = static_cast<int>(i % 2);
  shuffle_in_place(labels, rng);

  Dataset ds;
  ds.split = split;
  ds.spec = shared;
  ds.documents.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Document doc;
    doc.doc_id = first_id + i;
    doc.label = labels[i];
    for (std::size_t a = 0; a < spec.n_aspects; ++a) {
      const double agree = a == 0 ? spec.p_target : spec.p_spurious[a - 1];
      const bool matches = rng.bernoulli(agree);
      const bool positive = matches ? doc.label == 1 : doc.label == 0;
      doc.sentences.push_back(make_sentence(spec, vocab, a, positive, rng));
    }
    if (spec.shuffle_sentences) shuffle_in_place(doc.sentences, rng);
    ds.documents.push_back(std::move(doc));
  }
  return ds;
}

double plug_in_mi_bits(const double counts[2][2]) {
  double total = 0.0;
  for (int s = 0; s < 2; ++s) {
    for (int y = 0; y < 2; ++y) total += counts[s][y];
  }
  double mi = 0.0;
  for (int s = 0; s < 2; ++s) {
    for (int y = 0; y < 2; ++y) {
      if (counts[s][y] == 0.0) continue;
      const double p = counts[s][y] / total;
      const double ps = (counts[s][0] + counts[s][1]) / total;
      const double py = (counts[0][y] + counts[1][y]) / total;
      mi += p * std::log2(p / (ps * py));
    }
  }
  return mi;
}

}  // namespace

void CorpusSpec::validate() const {
  require(n_docs >= 3, "n_docs must be at least 3");
  require(n_aspects >= 2, "n_aspects must be at least 2");
  require(sentences_per_aspect == 1, "sentences_per_aspect must be 1");
  require(p_spurious.size() == n_aspects - 1,
          "p_spurious needs one entry per non-target aspect");
  auto in_half_open = [](double p) { return p >= 0.5 && p <= 1.0; };
  require(in_half_open(p_target), "p_target must be in [0.5, 1]");
  for (double p : p_spurious) {
    require(in_half_open(p), "p_spurious entries must be in [0.5, 1]");
  }
  require(vocab_size_per_aspect > 0, "vocab_size_per_aspect must be positive");
  require(sentiment_words_per_aspect > 0,
          "sentiment_words_per_aspect must be positive");
  require(neutral_words_shared > 0, "neutral_words_shared must be positive");
  require(sentiment_tokens_min > 0 &&
              sentiment_tokens_min <= sentiment_tokens_max,
          "sentiment token range must be positive and ordered");
  require(sentence_length_min <= sentence_length_max,
          "sentence length range must be ordered");
  require(sentence_length_min >= sentiment_tokens_max + aspect_tokens,
          "sentence_length_min cannot hold the polarity and aspect words");
  const double total_words =
      static_cast<double>(neutral_words_shared) +
      static_cast<double>(n_aspects) *
          (static_cast<double>(vocab_size_per_aspect) +
           2.0 * static_cast<double>(sentiment_words_per_aspect));
  require(total_words < static_cast<double>(std::numeric_limits<TokenId>::max()),
          "vocabulary does not fit the token id range");
  require(dev_fraction >= 0.0 && test_fraction >= 0.0 &&
              dev_fraction + test_fraction < 1.0,
          "split fractions must be non-negative and leave a training split");
}

Vocabulary::Vocabulary(const CorpusSpec& spec)
    : neutral_count_(spec.neutral_words_shared),
      aspect_words_(spec.vocab_size_per_aspect),
      polarity_words_(spec.sentiment_words_per_aspect) {
  spec.validate();
  for (std::size_t i = 0; i < neutral_count_; ++i) {
    words_.push_back("n" + std::to_string(i));
  }
  for (std::size_t a = 0; a < spec.n_aspects; ++a) {
    const std::string prefix = "a" + std::to_string(a) + "_";
    for (std::size_t i = 0; i < aspect_words_; ++i) {
      words_.push_back(prefix + "w" + std::to_string(i));
    }
    for (std::size_t i = 0; i < polarity_words_; ++i) {
      words_.push_back(prefix + "pos" + std::to_string(i));
    }
    for (std::size_t i = 0; i < polarity_words_; ++i) {
      words_.push_back(prefix + "neg" + std::to_string(i));
    }
  }
}

TokenId Vocabulary::neutral(std::size_t i) const {
  return static_cast<TokenId>(i);
}

TokenId Vocabulary::aspect_word(std::size_t aspect, std::size_t i) const {
  const std::size_t block = aspect_words_ + 2 * polarity_words_;
  return static_cast<TokenId>(neutral_count_ + aspect * block + i);
}

TokenId Vocabulary::polarity_word(std::size_t aspect, bool positive,
                                  std::size_t i) const {
  const std::size_t block = aspect_words_ + 2 * polarity_words_;
  return static_cast<TokenId>(neutral_count_ + aspect * block + aspect_words_ +
                              (positive ? 0 : polarity_words_) + i);
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& w : words_) {
    for (unsigned char c : w) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t ground_truth_reads() { return g_ground_truth_reads.load(); }
void reset_ground_truth_reads() { g_ground_truth_reads.store(0); }

int Sentence::aspect() const {
  g_ground_truth_reads.fetch_add(1, std::memory_order_relaxed);
  return aspect_;
}

int Sentence::sentiment() const {
  g_ground_truth_reads.fetch_add(1, std::memory_order_relaxed);
  return sentiment_;
}

std::vector<int> Document::aspect_of_sentence() const {
  std::vector<int> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(s.aspect());
  return out;
}

std::vector<int> Document::sentiment_of_sentence() const {
  std::vector<int> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(s.sentiment());
  return out;
}

const char* split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "train";
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "test") return Split::kTest;
  throw std::invalid_argument("unknown split '" + name + "'");
}

bool Dataset::has_counterfactuals() const {
  return std::any_of(documents.begin(), documents.end(),
                     [](const Document& d) { return d.is_counterfactual; });
}

std::size_t Dataset::count_label(int label) const {
  return static_cast<std::size_t>(
      std::count_if(documents.begin(), documents.end(),
                    [label](const Document& d) { return d.label == label; }));
}

CorpusSplits generate_corpus(const CorpusSpec& spec) {
  spec.validate();
  auto shared = std::make_shared<const CorpusSpec>(spec);
  const Vocabulary vocab(spec);
  const auto n_test = static_cast<std::size_t>(
      std::llround(static_cast<double>(spec.n_docs) * spec.test_fraction));
  const auto n_dev = static_cast<std::size_t>(
      std::llround(static_cast<double>(spec.n_docs) * spec.dev_fraction));
  const std::size_t n_train = spec.n_docs - n_test - n_dev;

  Rng root(spec.seed);
  Rng train_rng = root.fork(0);
  Rng dev_rng = root.fork(1);
  Rng test_rng = root.fork(2);
  CorpusSplits out;
  out.train = generate_split(spec, shared, vocab, Split::kTrain, n_train, 0,
                             train_rng);
  out.dev = generate_split(spec, shared, vocab, Split::kDev, n_dev, n_train,
                           dev_rng);
  out.test = generate_split(spec, shared, vocab, Split::kTest, n_test,
                            n_train + n_dev, test_rng);
  return out;
}

ThetaSpec CorpusStats::theta() const {
  return ThetaSpec::from_conditionals(p_label_given_sentiment.at(0),
                                      p_label_given_sentiment.at(1));
}

double CorpusStats::delta_bits() const {
  return mutual_information_bits.at(0) - mutual_information_bits.at(1);
}

CorpusStats corpus_stats(const Dataset& ds) {
  if (ds.has_counterfactuals()) {
    throw std::invalid_argument(
        "corpus_stats: dataset contains counterfactual documents");
  }
  if (ds.documents.empty()) {
    throw std::invalid_argument("corpus_stats: empty dataset");
  }
  std::size_t n_aspects = 0;
  for (const auto& doc : ds.documents) {
    n_aspects = std::max(n_aspects, doc.sentences.size());
  }
  // counts[aspect][sentiment][label]
  std::vector<std::array<std::array<double, 2>, 2>> counts(n_aspects);
  for (auto& c : counts) c = {};
  for (const auto& doc : ds.documents) {
    if (doc.label != 0 && doc.label != 1) {
      throw std::invalid_argument("corpus_stats: unlabeled document");
    }
    for (const auto& s : doc.sentences) {
      const int a = s.aspect();
      const int sent = s.sentiment();
      counts.at(static_cast<std::size_t>(a))[sent][doc.label] += 1.0;
    }
  }
  CorpusStats stats;
  for (std::size_t a = 0; a < n_aspects; ++a) {
    const auto& c = counts[a];
    for (int v = 0; v < 2; ++v) {
      if (c[v][0] + c[v][1] == 0.0 || c[0][v] + c[1][v] == 0.0) {
        throw std::invalid_argument(
            "corpus_stats: conditional undefined for aspect " +
            std::to_string(a) + " (a sentiment or label value never occurs)");
      }
    }
    const double total = c[0][0] + c[0][1] + c[1][0] + c[1][1];
    stats.p_label_given_sentiment.push_back((c[0][0] + c[1][1]) / total);
    const double raw[2][2] = {{c[0][0], c[0][1]}, {c[1][0], c[1][1]}};
    stats.mutual_information_bits.push_back(plug_in_mi_bits(raw));
  }
  return stats;
}

}  // namespace icda
