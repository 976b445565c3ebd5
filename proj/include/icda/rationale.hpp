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

// Sentence-level select-then-predict rationale model.
//
// A multinomial token model per class scores each sentence by its
// log-likelihood ratio. The selector picks the single sentence with the
// largest |ratio| and the classifier predicts from that sentence only.
// Training is hard EM: pick the sentence that best explains the observed
// label, refit the token tables on the picked sentences, repeat.

#ifndef ICDA_RATIONALE_HPP_
#define ICDA_RATIONALE_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "icda/corpus.hpp"

namespace icda {

struct SelectorTrainConfig {
  int em_rounds = 10;
  double smoothing = 1.0;
  std::uint64_t seed = 0;
  double exploration_rate = 0.05;
  // A round replaces the best checkpoint only if it lowers dev loss by at
  // least this much (bits).
  double min_improvement_bits = 3e-3;

  void validate() const;
};

class RationaleModel {
 public:
  RationaleModel() = default;

  // Equal token probabilities for both classes: every score is zero.
  static RationaleModel uniform(std::size_t vocab_size, std::uint64_t vocab_hash);

  // Smoothed multinomial fit. sentences[i] is labelled labels[i].
  static RationaleModel fit(std::span<const Sentence* const> sentences,
                            std::span<const int> labels, std::size_t vocab_size,
                            double smoothing, std::uint64_t vocab_hash);

  std::size_t vocab_size() const { return llr_.size(); }
  std::uint64_t vocab_hash() const { return vocab_hash_; }

  // Natural-log tables.
  double log_prob(int cls, TokenId token) const;
  double log_prior(int cls) const { return log_prior_[cls]; }
  double token_llr(TokenId token) const;

  // Sum of token log-likelihood ratios (class 1 vs class 0), no prior.
  double sentence_llr(const Sentence& s) const;

  // Multiplies the sentence score inside the classifier's sigmoid. Keeps the
  // naive token model's summed ratios from producing overconfident losses.
  double scale() const { return scale_; }
  void set_scale(double scale);

  int train_rounds = 0;
  // Round index of the returned checkpoint; -1 means the initial state.
  int best_round = -1;
  double dev_loss = 0.0;  // bits

  void save(std::ostream& out) const;
  static RationaleModel load(std::istream& in);

  // Tables and prior only; training metadata is ignored.
  bool same_parameters(const RationaleModel& other) const;

 private:
  std::array<std::vector<double>, 2> log_prob_;
  std::array<double, 2> log_prior_{};
  std::vector<double> llr_;
  std::uint64_t vocab_hash_ = 0;
  double scale_ = 1.0;
};

struct RationaleChoice {
  DocId doc_id = 0;
  std::size_t sentence_index = 0;
  double score = 0.0;  // |sentence llr|
  int predicted_label = 0;
  double loss = 0.0;  // bits; 0 when the label is unknown
};

struct Prediction {
  int label = 0;
  double loss = 0.0;  // bits; 0 when the label is unknown
};

// Supplies the training documents for a round. Round 0 is the data used to
// initialise tables; rounds 1..em_rounds feed the EM steps. Lets callers
// resample counterfactuals every round.
using TrainingSource = std::function<std::shared_ptr<const Dataset>(int round)>;

RationaleModel train_selector(const TrainingSource& source, const Dataset& dev,
                              const SelectorTrainConfig& cfg,
                              const RationaleModel* warm_start);

RationaleModel train_selector(const Dataset& train, const Dataset& dev,
                              const SelectorTrainConfig& cfg,
                              const RationaleModel* warm_start);

// Label-free: never reads doc.label except to report the loss.
RationaleChoice select_rationale(const RationaleModel& model, const Document& doc);

Prediction predict(const RationaleModel& model, const Document& doc);

// Mean prediction loss (bits) of select-then-predict over a labelled dataset.
double mean_loss_bits(const RationaleModel& model, const Dataset& ds);

// Fraction of documents whose chosen sentence is tagged with target_aspect.
double rationale_precision(const RationaleModel& model, const Dataset& ds,
                           int target_aspect = kTargetAspect);
double rationale_precision(const Dataset& ds,
                           std::span<const std::size_t> chosen_indices,
                           int target_aspect = kTargetAspect);

struct DegenerationReport {
  static constexpr std::size_t kBins = 10;
  bool pass = true;
  // frequency[c][b]: share of documents predicted as class c whose chosen
  // sentence falls in normalized-position decile b.
  std::array<std::array<double, kBins>, 2> frequency{};
  double max_bin_gap = 0.0;
  double leading_bins_gap = 0.0;
};

inline constexpr double kDegenerationThreshold = 0.20;

DegenerationReport degeneration_check(const RationaleModel& model,
                                      const Dataset& ds);
// Same check for an arbitrary selector given as (sentence index, predicted
// class) per document.
DegenerationReport degeneration_check(
    const Dataset& ds, std::span<const std::pair<std::size_t, int>> choices);

}  // namespace icda

#endif  // ICDA_RATIONALE_HPP_
