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

// Iterative counterfactual data augmentation.
//
// Each iteration takes the previous winning selector, harvests its most
// confident correct rationales per class, builds label-flipped copies of the
// training documents by swapping the selected sentence for a donor rationale
// of the opposite class, and retrains candidate selectors on the result.

#ifndef ICDA_ICDA_HPP_
#define ICDA_ICDA_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "icda/corpus.hpp"
#include "icda/rationale.hpp"
#include "icda/rng.hpp"

namespace icda {

struct RationaleEntry {
  Sentence sentence;
  DocId source_doc_id = 0;
  std::size_t sentence_index = 0;
  double confidence = 0.0;  // |sentence llr|
};

struct RationaleSets {
  std::vector<RationaleEntry> a0;  // from documents labelled 0
  std::vector<RationaleEntry> a1;

  const std::vector<RationaleEntry>& for_label(int label) const;
};

enum class DeltaARule {
  kDecreasing,        // require delta_a(k) < delta_a(k-1)
  kLiteralThreshold,  // require delta_a(k) < 1, the threshold never moves
};

struct ICDAConfig {
  int max_iterations = 8;  // total, including iteration 0
  std::vector<std::uint64_t> seeds = {11, 23, 37};
  double confidence_keep_fraction = 0.10;
  bool resample_each_round = true;
  bool delta_a_required_decreasing = true;
  DeltaARule delta_a_rule = DeltaARule::kDecreasing;

  void validate() const;
};

enum class StopReason { kWarmStartNoImprovement, kMaxIterations, kDeltaAViolation };

const char* stop_reason_name(StopReason reason);

struct ICDAIteration {
  int k = 0;
  std::uint64_t chosen_seed = 0;
  double dev_loss = 0.0;  // bits, on the (augmented) dev set of iteration k
  double delta_a = 1.0;
  double precision_test = 0.0;
  bool degeneration_pass = false;
  bool warm_start_chosen = false;
  // Structural audit over every augmented dataset realized this iteration.
  std::size_t augmented_datasets = 0;
  std::size_t size_mismatches = 0;
  std::size_t malformed_counterfactuals = 0;
};

struct ICDATrace {
  std::vector<ICDAIteration> iterations;
  StopReason stop_reason = StopReason::kMaxIterations;

  // Iteration 0, iteration 1 (or 0 if none ran), last iteration.
  double mmi_precision() const;
  double cda_precision() const;
  double icda_precision() const;
  int counterfactual_iterations() const;
};

// Top fraction by confidence of correctly predicted rationales, per class.
RationaleSets build_rationale_sets(const RationaleModel& model, const Dataset& ds,
                                   double keep_fraction);

// Label-flipped copy of doc with sentence `index` replaced by a donor drawn
// uniformly from the opposite class set.
Document make_counterfactual(const Document& doc, std::size_t index,
                             const RationaleSets& sets, Rng& rng);

// One counterfactual per document, at the model's selected sentence.
std::vector<Document> infer_counterfactuals(const Dataset& ds,
                                            const RationaleModel& model,
                                            const RationaleSets& sets, Rng& rng);

// Originals kept in an augmented set: per class the lowest-loss half (ties by
// doc_id) are paired with their counterfactuals. Odd class sizes are made up
// by the next lowest-loss originals, paired while two slots remain and
// unpaired for the last odd slot.
struct OriginalSelection {
  std::vector<std::size_t> paired;
  std::optional<std::size_t> unpaired;
};

OriginalSelection select_originals(const Dataset& ds, const RationaleModel& model);

// Kept originals plus their counterfactuals, |result| == |ds|.
Dataset assemble_augmented(const Dataset& ds, const std::vector<Document>& cfs,
                           const RationaleModel& model);

// Mean over both classes of |cur \ prev| / |cur|, keyed by
// (source doc_id, sentence_index).
double set_change(const RationaleSets& prev, const RationaleSets& cur);

// Fixed choice of originals and rationale positions; only donor draws vary
// between realizations.
class AugmentationPlan {
 public:
  AugmentationPlan(const Dataset& ds, const RationaleModel& model,
                   RationaleSets sets);

  Dataset realize(std::uint64_t seed) const;
  const RationaleSets& sets() const { return sets_; }

 private:
  const Dataset* source_;
  OriginalSelection kept_;
  std::vector<std::size_t> rationale_index_;
  RationaleSets sets_;
};

struct AugmentationAudit {
  bool size_matches = true;
  std::size_t counterfactuals = 0;
  std::size_t malformed = 0;  // not exactly one sentence changed, or label kept
  std::size_t orphaned = 0;   // source not among the kept originals
};

AugmentationAudit audit_augmented(const Dataset& original, const Dataset& augmented);

struct IterationArtifacts {
  int k = 0;
  const RationaleModel* winner = nullptr;
  const RationaleSets* sets = nullptr;     // winner's sets on the train split
  const Dataset* augmented_train = nullptr;  // null at k = 0
};

using IterationObserver = std::function<void(const IterationArtifacts&)>;

// Test ground truth is read only to report precision.
ICDATrace run_icda(const Dataset& train, const Dataset& dev, const Dataset& test,
                   const ICDAConfig& cfg, const SelectorTrainConfig& sel_cfg,
                   std::uint64_t master_seed,
                   const IterationObserver& observer = nullptr);

}  // namespace icda

#endif  // ICDA_ICDA_HPP_
