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


#include <omp.h>

#include <cmath>
#include <set>

#include "doctest.h"
#include "icda/corpus.hpp"
#include "icda/icda.hpp"
#include "icda/rationale.hpp"

using namespace icda;

namespace {

CorpusSpec spec_with(std::size_t n_docs, std::vector<double> spurious, std::uint64_t seed) {
  CorpusSpec spec;
  spec.n_docs = n_docs;
  spec.p_spurious = std::move(spurious);
  spec.seed = seed;
  return spec;
}

const CorpusSplits& clean() {
  static const CorpusSplits s = generate_corpus(spec_with(5'000, {0.5, 0.5}, 31));
  return s;
}

const RationaleModel& clean_model() {
  static const RationaleModel m = [] {
    SelectorTrainConfig cfg;
    cfg.seed = 2;
    return train_selector(clean().train, clean().dev, cfg, nullptr);
  }();
  return m;
}

RationaleEntry entry(DocId id, std::size_t index) { return {Sentence(), id, index, 1.0}; }

RationaleSets sets_of(std::vector<RationaleEntry> a0, std::vector<RationaleEntry> a1) {
  RationaleSets s;
  s.a0 = std::move(a0);
  s.a1 = std::move(a1);
  return s;
}

bool same_except(const Document& a, const Document& b, std::size_t index) {
  if (a.sentences.size() != b.sentences.size()) return false;
  for (std::size_t i = 0; i < a.sentences.size(); ++i) {
    if (i != index && a.sentences[i].tokens != b.sentences[i].tokens) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("set_change examples") {
  const auto prev = sets_of({entry(1, 0), entry(2, 1)}, {entry(3, 0), entry(4, 2)});
  CHECK(set_change(prev, prev) == 0.0);
  const auto disjoint = sets_of({entry(5, 0), entry(2, 0)}, {entry(3, 1), entry(9, 2)});
  CHECK(set_change(prev, disjoint) == 1.0);
  const auto half = sets_of({entry(1, 0), entry(7, 0)}, {entry(8, 0), entry(4, 2)});
  CHECK(set_change(prev, half) == 0.5);
  CHECK_THROWS_AS(set_change(prev, RationaleSets{}), std::invalid_argument);
}

TEST_CASE("rationale sets keep the most confident tenth per class") {
  CorpusSpec spec = spec_with(1'000, {0.5, 0.5}, 4);
  spec.p_target = 1.0;
  spec.dev_fraction = 0.0;
  spec.test_fraction = 0.0;
  const auto ds = generate_corpus(spec).train;
  REQUIRE(ds.count_label(0) == 500);
  REQUIRE(ds.count_label(1) == 500);
  std::size_t correct = 0;
  for (const auto& d : ds.documents) correct += predict(clean_model(), d).label == d.label;
  REQUIRE(correct == 1'000);

  const auto sets = build_rationale_sets(clean_model(), ds, 0.1);
  CHECK(sets.a0.size() == 50);
  CHECK(sets.a1.size() == 50);
  for (int c = 0; c < 2; ++c) {
    const auto& s = sets.for_label(c);
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i - 1].confidence >= s[i].confidence);
  }
  const auto all = build_rationale_sets(clean_model(), ds, 1.0);
  CHECK(all.a0.size() + all.a1.size() == 1'000);
  CHECK_THROWS_AS(build_rationale_sets(clean_model(), ds, 0.0), std::invalid_argument);
}

TEST_CASE("rationale sets of a coin-flip classifier come from about half the documents") {
  Dataset ds = clean().test;
  Rng rng(12);
  std::size_t correct = 0;
  for (auto& d : ds.documents) {
    if (rng.bernoulli(0.5)) d.label = 1 - d.label;
    correct += predict(clean_model(), d).label == d.label;
  }
  const auto sets = build_rationale_sets(clean_model(), ds, 1.0);
  CHECK(sets.a0.size() + sets.a1.size() == correct);
  CHECK(std::abs(static_cast<double>(correct) - 0.5 * ds.size()) < 0.5 * 0.1 * ds.size());
}

TEST_CASE("counterfactual replaces one sentence and flips the label") {
  const auto sets = build_rationale_sets(clean_model(), clean().train, 0.1);
  Document doc = clean().test.documents[0];
  doc.label = 1;
  Rng rng(3);
  const Document cf = make_counterfactual(doc, 2, sets, rng);
  CHECK(cf.label == 0);
  CHECK(cf.is_counterfactual);
  CHECK(cf.source_doc_id == std::optional<DocId>(doc.doc_id));
  CHECK(cf.doc_id != doc.doc_id);
  CHECK(same_except(doc, cf, 2));
  bool from_a0 = false;
  for (const auto& e : sets.a0) from_a0 = from_a0 || e.sentence.tokens == cf.sentences[2].tokens;
  CHECK(from_a0);
  CHECK_THROWS_AS(make_counterfactual(doc, 99, sets, rng), std::out_of_range);
}

TEST_CASE("single donor is shared by every counterfactual of a class") {
  auto sets = build_rationale_sets(clean_model(), clean().train, 0.1);
  sets.a0.resize(1);
  sets.a1.resize(1);
  Rng rng(9);
  const auto cfs = infer_counterfactuals(clean().dev, clean_model(), sets, rng);
  for (std::size_t i = 0; i < cfs.size(); ++i) {
    const auto idx = select_rationale(clean_model(), clean().dev.documents[i]).sentence_index;
    CHECK(cfs[i].sentences[idx].tokens == sets.for_label(cfs[i].label)[0].sentence.tokens);
  }
}

TEST_CASE("resampling changes only the inserted sentences") {
  const auto sets = build_rationale_sets(clean_model(), clean().train, 0.1);
  const AugmentationPlan plan(clean().dev, clean_model(), sets);
  const Dataset a = plan.realize(1);
  const Dataset b = plan.realize(2);
  REQUIRE(a.size() == b.size());
  std::size_t differing = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Document& x = a.documents[i];
    const Document& y = b.documents[i];
    CHECK(x.doc_id == y.doc_id);
    CHECK(x.label == y.label);
    if (!x.is_counterfactual) {
      CHECK(same_except(x, y, x.sentences.size()));
      continue;
    }
    const auto src = select_rationale(clean_model(), a.documents[i - 1]).sentence_index;
    CHECK(same_except(x, y, src));
    differing += x.sentences[src].tokens != y.sentences[src].tokens;
  }
  CHECK(differing > 0);
  const Dataset again = plan.realize(1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(again.documents[i].sentences[0].tokens == a.documents[i].sentences[0].tokens);
  }
}

TEST_CASE("augmented data keeps half the originals and pairs each with its counterfactual") {
  CorpusSpec spec = spec_with(10'000, {0.9, 0.5}, 8);
  spec.dev_fraction = 0.0;
  spec.test_fraction = 0.0;
  const auto ds = generate_corpus(spec).train;
  const auto sets = build_rationale_sets(clean_model(), ds, 0.1);
  Rng rng(4);
  const auto cfs = infer_counterfactuals(ds, clean_model(), sets, rng);
  const Dataset aug = assemble_augmented(ds, cfs, clean_model());
  std::size_t originals = 0;
  for (const auto& d : aug.documents) originals += !d.is_counterfactual;
  CHECK(aug.size() == 10'000);
  CHECK(originals == 5'000);
  const auto audit = audit_augmented(ds, aug);
  CHECK(audit.size_matches);
  CHECK(audit.counterfactuals == 5'000);
  CHECK(audit.malformed == 0);
  CHECK(audit.orphaned == 0);

  Dataset odd = ds;
  odd.documents.pop_back();
  const auto cfs_odd = infer_counterfactuals(odd, clean_model(), sets, rng);
  const Dataset aug_odd = assemble_augmented(odd, cfs_odd, clean_model());
  CHECK(aug_odd.size() == odd.size());
  CHECK(audit_augmented(odd, aug_odd).malformed == 0);
}

TEST_CASE("original selection orders by loss with doc id ties") {
  const Dataset& ds = clean().dev;
  const auto u = RationaleModel::uniform(clean_model().vocab_size(), clean_model().vocab_hash());
  const auto sel = select_originals(ds, u);
  for (int c = 0; c < 2; ++c) {
    std::vector<DocId> ids;
    for (const auto& d : ds.documents) {
      if (d.label == c) ids.push_back(d.doc_id);
    }
    std::sort(ids.begin(), ids.end());
    std::set<DocId> kept;
    for (std::size_t i : sel.paired) {
      if (ds.documents[i].label == c) kept.insert(ds.documents[i].doc_id);
    }
    for (std::size_t i = 0; i < ids.size() / 2; ++i) CHECK(kept.count(ids[i]) == 1);
  }

  const auto by_loss = select_originals(ds, clean_model());
  std::set<std::size_t> kept(by_loss.paired.begin(), by_loss.paired.end());
  double worst_kept[2] = {0, 0};
  double best_dropped[2] = {1e300, 1e300};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& d = ds.documents[i];
    const double loss = predict(clean_model(), d).loss;
    if (kept.count(i)) {
      worst_kept[d.label] = std::max(worst_kept[d.label], loss);
    } else {
      best_dropped[d.label] = std::min(best_dropped[d.label], loss);
    }
  }
  // Per-class halves can leave a few extra slots filled across classes, so
  // compare within a class only where the class is exactly halved.
  if (2 * std::count_if(by_loss.paired.begin(), by_loss.paired.end(),
                        [&](std::size_t i) { return ds.documents[i].label == 0; }) ==
      static_cast<std::ptrdiff_t>(ds.count_label(0))) {
    CHECK(worst_kept[0] <= best_dropped[0]);
  }
}

TEST_CASE("counterfactual from a class-1 rationale is predicted as class 1") {
  const auto sets = build_rationale_sets(clean_model(), clean().train, 0.1);
  Rng rng(6);
  std::size_t ones = 0, total = 0;
  for (const auto& d : clean().test.documents) {
    if (d.label != 0) continue;
    const auto idx = select_rationale(clean_model(), d).sentence_index;
    const Document cf = make_counterfactual(d, idx, sets, rng);
    ones += predict(clean_model(), cf).label == 1;
    ++total;
  }
  CHECK(static_cast<double>(ones) / total > 0.95);
}

TEST_CASE("augmentation never reads ground truth") {
  const auto& ds = clean().train;
  reset_ground_truth_reads();
  const auto sets = build_rationale_sets(clean_model(), ds, 0.1);
  Rng rng(1);
  const auto cfs = infer_counterfactuals(ds, clean_model(), sets, rng);
  (void)assemble_augmented(ds, cfs, clean_model());
  (void)AugmentationPlan(ds, clean_model(), sets).realize(5);
  CHECK(ground_truth_reads() == 0);
}

TEST_CASE("corpus without spurious signal is solved at once and stops early") {
  const auto s = generate_corpus(spec_with(4'000, {0.5, 0.5}, 40));
  const ICDATrace t = run_icda(s.train, s.dev, s.test, ICDAConfig{}, SelectorTrainConfig{}, 7);
  CHECK(t.mmi_precision() > 0.95);
  CHECK(t.stop_reason == StopReason::kWarmStartNoImprovement);
  CHECK(t.counterfactual_iterations() <= 2);
}

TEST_CASE("run_icda trace invariants and determinism across thread counts") {
  const auto s = generate_corpus(spec_with(4'000, {0.9, 0.5}, 41));
  ICDAConfig cfg;
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const ICDATrace a = run_icda(s.train, s.dev, s.test, cfg, SelectorTrainConfig{}, 99);
  omp_set_num_threads(3);
  const ICDATrace b = run_icda(s.train, s.dev, s.test, cfg, SelectorTrainConfig{}, 99);
  omp_set_num_threads(saved);

  REQUIRE(a.iterations.size() == b.iterations.size());
  CHECK(a.stop_reason == b.stop_reason);
  for (std::size_t i = 0; i < a.iterations.size(); ++i) {
    CHECK(a.iterations[i].dev_loss == b.iterations[i].dev_loss);
    CHECK(a.iterations[i].chosen_seed == b.iterations[i].chosen_seed);
    CHECK(a.iterations[i].precision_test == b.iterations[i].precision_test);
    CHECK(a.iterations[i].delta_a == b.iterations[i].delta_a);
  }
  CHECK(a.iterations.size() <= static_cast<std::size_t>(cfg.max_iterations));
  for (std::size_t i = 0; i < a.iterations.size(); ++i) {
    const auto& it = a.iterations[i];
    CHECK(it.delta_a >= 0.0);
    CHECK(it.delta_a <= 1.0);
    CHECK(it.size_mismatches == 0);
    CHECK(it.malformed_counterfactuals == 0);
    if (i >= 1) CHECK(it.augmented_datasets > 0);
    if (i >= 2) CHECK(it.delta_a < a.iterations[i - 1].delta_a);
  }
}

TEST_CASE("ICDAConfig validation") {
  ICDAConfig c;
  c.seeds.clear();
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ICDAConfig{};
  c.confidence_keep_fraction = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ICDAConfig{};
  c.max_iterations = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK(std::string(stop_reason_name(StopReason::kDeltaAViolation)) == "delta_a_violation");
}
