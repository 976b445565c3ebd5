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

#include "icda/icda.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <iostream>
#include <memory>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <utility>

namespace icda {
namespace {

constexpr DocId kCounterfactualBit = DocId{1} << 62;
constexpr double kLossResolution = 1e-6;

// Stream tags for derive_seed so unrelated draws never share a stream.
constexpr std::uint64_t kTagIteration = 0x1c0a;
constexpr std::uint64_t kTagWarm = 0x3a77;
constexpr std::uint64_t kTagResample = 0x5e5a;
constexpr std::uint64_t kTagDev = 0xde70;

std::uint64_t iteration_seed(std::uint64_t master, int k) {
  return derive_seed(derive_seed(master, kTagIteration), static_cast<std::uint64_t>(k));
}

std::uint64_t resample_seed(std::uint64_t candidate_seed, int round) {
  return derive_seed(derive_seed(candidate_seed, kTagResample),
                     static_cast<std::uint64_t>(round));
}

struct Candidate {
  std::uint64_t label_seed = 0;  // the configured seed, or the previous winner's
  bool warm = false;
  RationaleModel model;
  DegenerationReport degeneration;
  RationaleSets sets;
  double delta_a = 1.0;
  std::size_t datasets = 0;
  std::size_t size_mismatches = 0;
  std::size_t malformed = 0;
};

}  // namespace

const std::vector<RationaleEntry>& RationaleSets::for_label(int label) const {
  if (label == 0) return a0;
  if (label == 1) return a1;
  throw std::invalid_argument("RationaleSets: label must be 0 or 1");
}

void ICDAConfig::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("seeds must not be empty");
  if (!(confidence_keep_fraction > 0.0 && confidence_keep_fraction <= 1.0)) {
    throw std::invalid_argument("confidence_keep_fraction must be in (0, 1]");
  }
}

const char* stop_reason_name(StopReason reason) {
  switch (reason) {
    case StopReason::kWarmStartNoImprovement: return "warm_start_no_improvement";
    case StopReason::kMaxIterations: return "max_iterations";
    case StopReason::kDeltaAViolation: return "delta_a_violation";
  }
  return "unknown";
}

double ICDATrace::mmi_precision() const { return iterations.at(0).precision_test; }

double ICDATrace::cda_precision() const {
  return iterations.size() > 1 ? iterations[1].precision_test : mmi_precision();
}

double ICDATrace::icda_precision() const { return iterations.at(iterations.size() - 1).precision_test; }

int ICDATrace::counterfactual_iterations() const {
  return iterations.empty() ? 0 : static_cast<int>(iterations.size()) - 1;
}

RationaleSets build_rationale_sets(const RationaleModel& model, const Dataset& ds,
                                   double keep_fraction) {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    throw std::invalid_argument("build_rationale_sets: keep fraction must be in (0, 1]");
  }
  RationaleSets sets;
  for (const auto& doc : ds.documents) {
    if (doc.label != 0 && doc.label != 1) continue;
    const RationaleChoice c = select_rationale(model, doc);
    if (c.predicted_label != doc.label) continue;
    auto& bucket = doc.label == 0 ? sets.a0 : sets.a1;
    bucket.push_back({doc.sentences[c.sentence_index], doc.doc_id, c.sentence_index,
                      c.score});
  }
  for (auto* bucket : {&sets.a0, &sets.a1}) {
    if (bucket->empty()) {
      throw std::runtime_error("build_rationale_sets: a class has no correct predictions");
    }
    std::sort(bucket->begin(), bucket->end(),
              [](const RationaleEntry& a, const RationaleEntry& b) {
                if (a.confidence != b.confidence) return a.confidence > b.confidence;
                return a.source_doc_id < b.source_doc_id;
              });
    const auto keep = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::llround(keep_fraction * static_cast<double>(bucket->size()))));
    bucket->resize(std::min(keep, bucket->size()));
  }
  return sets;
}

Document make_counterfactual(const Document& doc, std::size_t index,
                             const RationaleSets& sets, Rng& rng) {
  if (doc.label != 0 && doc.label != 1) {
    throw std::invalid_argument("make_counterfactual: source has no label");
  }
  if (index >= doc.sentences.size()) {
    throw std::out_of_range("make_counterfactual: sentence index");
  }
  const int flipped = 1 - doc.label;
  const auto& donors = sets.for_label(flipped);
  if (donors.empty()) throw std::runtime_error("make_counterfactual: empty donor set");
  Document cf = doc;
  cf.doc_id = doc.doc_id | kCounterfactualBit;
  cf.label = flipped;
  cf.is_counterfactual = true;
  cf.source_doc_id = doc.doc_id;
  cf.sentences[index] = donors[rng.below(donors.size())].sentence;
  return cf;
}

std::vector<Document> infer_counterfactuals(const Dataset& ds,
                                            const RationaleModel& model,
                                            const RationaleSets& sets, Rng& rng) {
  std::vector<Document> out;
  out.reserve(ds.documents.size());
  for (const auto& doc : ds.documents) {
    const std::size_t index = select_rationale(model, doc).sentence_index;
    out.push_back(make_counterfactual(doc, index, sets, rng));
  }
  return out;
}

OriginalSelection select_originals(const Dataset& ds, const RationaleModel& model) {
  struct Ranked {
    double loss;
    DocId doc_id;
    std::size_t index;
  };
  auto by_loss = [](const Ranked& a, const Ranked& b) {
    if (a.loss != b.loss) return a.loss < b.loss;
    return a.doc_id < b.doc_id;
  };
  std::array<std::vector<Ranked>, 2> per_class;
  for (std::size_t i = 0; i < ds.documents.size(); ++i) {
    const Document& doc = ds.documents[i];
    if (doc.label != 0 && doc.label != 1) {
      throw std::invalid_argument("select_originals: unlabelled document");
    }
    per_class[doc.label].push_back({select_rationale(model, doc).loss, doc.doc_id, i});
  }
  OriginalSelection sel;
  std::vector<Ranked> rest;
  for (auto& ranked : per_class) {
    std::sort(ranked.begin(), ranked.end(), by_loss);
    const std::size_t half = ranked.size() / 2;
    for (std::size_t i = 0; i < half; ++i) sel.paired.push_back(ranked[i].index);
    rest.insert(rest.end(), ranked.begin() + static_cast<std::ptrdiff_t>(half),
                ranked.end());
  }
  std::sort(rest.begin(), rest.end(), by_loss);
  std::size_t slots = ds.documents.size() - 2 * sel.paired.size();
  std::size_t next = 0;
  while (slots >= 2) {
    sel.paired.push_back(rest.at(next++).index);
    slots -= 2;
  }
  if (slots == 1) sel.unpaired = rest.at(next).index;
  std::sort(sel.paired.begin(), sel.paired.end());
  return sel;
}

Dataset assemble_augmented(const Dataset& ds, const std::vector<Document>& cfs,
                           const RationaleModel& model) {
  std::unordered_map<DocId, const Document*> by_source;
  for (const auto& cf : cfs) {
    if (cf.source_doc_id) by_source.emplace(*cf.source_doc_id, &cf);
  }
  const OriginalSelection sel = select_originals(ds, model);
  Dataset out;
  out.split = ds.split;
  out.spec = ds.spec;
  out.documents.reserve(ds.documents.size());
  for (std::size_t i : sel.paired) {
    const Document& original = ds.documents[i];
    auto it = by_source.find(original.doc_id);
    if (it == by_source.end()) {
      throw std::runtime_error("assemble_augmented: missing counterfactual for doc " +
                               std::to_string(original.doc_id));
    }
    out.documents.push_back(original);
    out.documents.push_back(*it->second);
  }
  if (sel.unpaired) out.documents.push_back(ds.documents[*sel.unpaired]);
  return out;
}

double set_change(const RationaleSets& prev, const RationaleSets& cur) {
  double sum = 0.0;
  for (int c = 0; c < 2; ++c) {
    const auto& p = prev.for_label(c);
    const auto& q = cur.for_label(c);
    if (p.empty() || q.empty()) throw std::invalid_argument("set_change: empty set");
    std::set<std::pair<DocId, std::size_t>> keys;
    for (const auto& e : p) keys.emplace(e.source_doc_id, e.sentence_index);
    std::size_t fresh = 0;
    for (const auto& e : q) fresh += !keys.count({e.source_doc_id, e.sentence_index});
    sum += static_cast<double>(fresh) / static_cast<double>(q.size());
  }
  return sum / 2.0;
}

AugmentationPlan::AugmentationPlan(const Dataset& ds, const RationaleModel& model,
                                   RationaleSets sets)
    : source_(&ds), kept_(select_originals(ds, model)), sets_(std::move(sets)) {
  if (sets_.a0.empty() || sets_.a1.empty()) {
    throw std::invalid_argument("AugmentationPlan: empty donor set");
  }
  rationale_index_.reserve(kept_.paired.size());
  for (std::size_t i : kept_.paired) {
    rationale_index_.push_back(select_rationale(model, ds.documents[i]).sentence_index);
  }
}

Dataset AugmentationPlan::realize(std::uint64_t seed) const {
  Rng rng(seed);
  Dataset out;
  out.split = source_->split;
  out.spec = source_->spec;
  out.documents.reserve(source_->documents.size());
  for (std::size_t j = 0; j < kept_.paired.size(); ++j) {
    const Document& original = source_->documents[kept_.paired[j]];
    out.documents.push_back(original);
    out.documents.push_back(make_counterfactual(original, rationale_index_[j], sets_, rng));
  }
  if (kept_.unpaired) out.documents.push_back(source_->documents[*kept_.unpaired]);
  return out;
}

AugmentationAudit audit_augmented(const Dataset& original, const Dataset& augmented) {
  AugmentationAudit audit;
  audit.size_matches = original.size() == augmented.size();
  std::unordered_map<DocId, const Document*> sources;
  for (const auto& doc : original.documents) sources.emplace(doc.doc_id, &doc);
  std::unordered_set<DocId> kept;
  for (const auto& doc : augmented.documents) {
    if (!doc.is_counterfactual) kept.insert(doc.doc_id);
  }
  for (const auto& doc : augmented.documents) {
    if (!doc.is_counterfactual) continue;
    ++audit.counterfactuals;
    const Document* src = nullptr;
    if (doc.source_doc_id) {
      auto it = sources.find(*doc.source_doc_id);
      if (it != sources.end()) src = it->second;
    }
    if (!src) {
      ++audit.malformed;
      continue;
    }
    if (!kept.count(src->doc_id)) ++audit.orphaned;
    std::size_t changed = 0;
    if (src->sentences.size() == doc.sentences.size()) {
      for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
        changed += src->sentences[i].tokens != doc.sentences[i].tokens;
      }
    }
    const bool flipped = (src->label == 0 || src->label == 1) && doc.label == 1 - src->label;
    if (changed != 1 || !flipped) ++audit.malformed;
  }
  return audit;
}

ICDATrace run_icda(const Dataset& train, const Dataset& dev, const Dataset& test,
                   const ICDAConfig& cfg, const SelectorTrainConfig& sel_cfg,
                   std::uint64_t master_seed, const IterationObserver& observer) {
  cfg.validate();
  sel_cfg.validate();
  ICDATrace trace;

  RationaleModel prev_winner;
  RationaleSets prev_sets;
  std::uint64_t prev_seed = 0;
  double prev_delta_a = 1.0;

  for (int k = 0; k < cfg.max_iterations; ++k) {
    const std::uint64_t iter_seed = iteration_seed(master_seed, k);

    std::optional<AugmentationPlan> train_plan;
    std::optional<Dataset> dev_aug;
    if (k > 0) {
      train_plan.emplace(train, prev_winner, prev_sets);
      // Every dev document plus its counterfactual: a loss-filtered dev set
      // would favour the model that did the filtering.
      const RationaleSets dev_sets =
          build_rationale_sets(prev_winner, dev, cfg.confidence_keep_fraction);
      Rng dev_rng(derive_seed(iter_seed, kTagDev));
      dev_aug = dev;
      for (auto& cf : infer_counterfactuals(dev, prev_winner, dev_sets, dev_rng)) {
        dev_aug->documents.push_back(std::move(cf));
      }
    }
    const Dataset& dev_for_loss = k > 0 ? *dev_aug : dev;

    std::vector<Candidate> candidates(cfg.seeds.size() + (k > 0 ? 1 : 0));
    for (std::size_t j = 0; j < cfg.seeds.size(); ++j) {
      candidates[j].label_seed = cfg.seeds[j];
    }
    if (k > 0) {
      candidates.back().label_seed = prev_seed;
      candidates.back().warm = true;
    }

    std::vector<std::exception_ptr> errors(candidates.size());
    const int n_candidates = static_cast<int>(candidates.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (int j = 0; j < n_candidates; ++j) {
      try {
        Candidate& cand = candidates[j];
        SelectorTrainConfig local = sel_cfg;
        local.seed = cand.warm ? derive_seed(iter_seed, kTagWarm)
                               : derive_seed(iter_seed, cand.label_seed);
        if (k == 0) {
          cand.model = train_selector(train, dev_for_loss, local, nullptr);
        } else {
          const std::uint64_t stream = local.seed;
          TrainingSource source = [&, stream](int round) {
            const int draw = cfg.resample_each_round ? round : 0;
            auto ds = std::make_shared<const Dataset>(
                train_plan->realize(resample_seed(stream, draw)));
            const AugmentationAudit audit = audit_augmented(train, *ds);
            ++cand.datasets;
            cand.size_mismatches += !audit.size_matches;
            cand.malformed += audit.malformed + audit.orphaned;
            return ds;
          };
          cand.model = train_selector(source, dev_for_loss, local,
                                      cand.warm ? &prev_winner : nullptr);
        }
        cand.degeneration = degeneration_check(cand.model, dev);
        cand.sets = build_rationale_sets(cand.model, train, cfg.confidence_keep_fraction);
        cand.delta_a = k == 0 ? 1.0 : set_change(prev_sets, cand.sets);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }

    // Eligibility: degeneration (k >= 1, with fallback), then the change rule.
    std::vector<std::size_t> eligible;
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      if (k == 0 || candidates[j].degeneration.pass) eligible.push_back(j);
    }
    if (eligible.empty()) {
      std::cerr << "warning: iteration " << k
                << ": no candidate passed the degeneration check; using best loss\n";
      for (std::size_t j = 0; j < candidates.size(); ++j) eligible.push_back(j);
    }
    if (k >= 2 && cfg.delta_a_required_decreasing) {
      std::erase_if(eligible, [&](std::size_t j) {
        const double d = candidates[j].delta_a;
        return cfg.delta_a_rule == DeltaARule::kDecreasing ? !(d < prev_delta_a)
                                                           : !(d < 1.0);
      });
      if (eligible.empty()) {
        trace.stop_reason = StopReason::kDeltaAViolation;
        break;
      }
    }
    std::size_t best = eligible.front();
    for (std::size_t j : eligible) {
      const double a = std::round(candidates[j].model.dev_loss / kLossResolution);
      const double b = std::round(candidates[best].model.dev_loss / kLossResolution);
      if (a < b) best = j;
    }
    Candidate& win = candidates[best];

    ICDAIteration it;
    it.k = k;
    it.chosen_seed = win.label_seed;
    it.dev_loss = win.model.dev_loss;
    it.delta_a = win.delta_a;
    it.precision_test = rationale_precision(win.model, test);
    it.degeneration_pass = win.degeneration.pass;
    it.warm_start_chosen = win.warm;
    for (const auto& c : candidates) {
      it.augmented_datasets += c.datasets;
      it.size_mismatches += c.size_mismatches;
      it.malformed_counterfactuals += c.malformed;
    }
    trace.iterations.push_back(it);

    if (observer) {
      IterationArtifacts art;
      art.k = k;
      art.winner = &win.model;
      art.sets = &win.sets;
      std::optional<Dataset> shown;
      if (k > 0) {
        const std::uint64_t stream = win.warm ? derive_seed(iter_seed, kTagWarm)
                                              : derive_seed(iter_seed, win.label_seed);
        shown = train_plan->realize(resample_seed(stream, 0));
        art.augmented_train = &*shown;
      }
      observer(art);
    }

    const bool warm_stalled = k > 0 && candidates.back().model.best_round < 0;
    prev_winner = std::move(win.model);
    prev_sets = std::move(win.sets);
    prev_seed = win.label_seed;
    prev_delta_a = it.delta_a;
    if (warm_stalled) {
      trace.stop_reason = StopReason::kWarmStartNoImprovement;
      break;
    }
    trace.stop_reason = StopReason::kMaxIterations;
  }
  return trace;
}

}  // namespace icda
