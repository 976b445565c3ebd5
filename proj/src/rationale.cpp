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

#include "icda/rationale.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "icda/rng.hpp"

namespace icda {
namespace {

constexpr double kLn2 = 0.69314718055994530942;

// -log2 sigmoid(z), stable for large |z|.
double neg_log2_sigmoid(double z) {
  const double nats = z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
  return nats / kLn2;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

double logit(const RationaleModel& model, double llr) {
  return model.scale() * llr + model.log_prior(1) - model.log_prior(0);
}

std::size_t argmax_abs_llr(const RationaleModel& model, const Document& doc,
                           double* llr_out) {
  std::size_t index = 0;
  double best_llr = 0.0;
  double best_score = -1.0;
  for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
    const double llr = model.sentence_llr(doc.sentences[i]);
    if (std::abs(llr) > best_score) {
      best_score = std::abs(llr);
      best_llr = llr;
      index = i;
    }
  }
  *llr_out = best_llr;
  return index;
}

constexpr double kMinScale = 1e-3;
constexpr double kMaxScale = 10.0;

// Maximum-likelihood scale for select-then-predict on labelled docs. The
// negative log-likelihood is convex in the scale, so Newton converges.
double fit_scale(const RationaleModel& model, const Dataset& ds) {
  // Per doc: score and prior offset, both signed toward the true label.
  std::vector<std::pair<double, double>> terms;
  terms.reserve(ds.documents.size());
  const double b = model.log_prior(1) - model.log_prior(0);
  for (const auto& doc : ds.documents) {
    if (doc.sentences.empty() || (doc.label != 0 && doc.label != 1)) continue;
    double llr = 0.0;
    argmax_abs_llr(model, doc, &llr);
    terms.emplace_back(doc.label == 1 ? llr : -llr, doc.label == 1 ? b : -b);
  }
  if (terms.empty()) return 1.0;
  double a = 1.0;
  for (int iter = 0; iter < 50; ++iter) {
    double grad = 0.0;
    double hess = 0.0;
    for (const auto& [x, offset] : terms) {
      const double q = 1.0 / (1.0 + std::exp(a * x + offset));
      grad -= q * x;
      hess += q * (1.0 - q) * x * x;
    }
    if (!(hess > 0.0)) break;
    const double next = std::clamp(a - grad / hess, kMinScale, kMaxScale);
    const bool done = std::abs(next - a) < 1e-10;
    a = next;
    if (done) break;
  }
  return a;
}

struct VocabInfo {
  std::size_t size = 0;
  std::uint64_t hash = 0;
};

VocabInfo vocab_of(const Dataset& ds) {
  if (!ds.spec) throw std::invalid_argument("dataset carries no corpus spec");
  const Vocabulary vocab(*ds.spec);
  return {vocab.size(), vocab.hash()};
}

void check_both_classes(const Dataset& ds, const char* what) {
  if (ds.documents.empty()) {
    throw std::invalid_argument(std::string(what) + ": empty dataset");
  }
  if (ds.count_label(0) == 0 || ds.count_label(1) == 0) {
    throw std::invalid_argument(std::string(what) + ": a class has no documents");
  }
}

std::size_t position_bin(std::size_t index, std::size_t count) {
  const std::size_t bin = index * DegenerationReport::kBins / count;
  return std::min(bin, DegenerationReport::kBins - 1);
}

}  // namespace

void SelectorTrainConfig::validate() const {
  if (em_rounds < 0) throw std::invalid_argument("em_rounds must be >= 0");
  if (!(smoothing > 0.0)) throw std::invalid_argument("smoothing must be > 0");
  if (!(exploration_rate >= 0.0 && exploration_rate <= 1.0)) {
    throw std::invalid_argument("exploration_rate must be in [0, 1]");
  }
  if (!(min_improvement_bits >= 0.0)) {
    throw std::invalid_argument("min_improvement_bits must be >= 0");
  }
}

RationaleModel RationaleModel::uniform(std::size_t vocab_size,
                                       std::uint64_t vocab_hash) {
  RationaleModel m;
  const double lp = -std::log(static_cast<double>(vocab_size));
  m.log_prob_[0].assign(vocab_size, lp);
  m.log_prob_[1].assign(vocab_size, lp);
  m.llr_.assign(vocab_size, 0.0);
  m.log_prior_ = {std::log(0.5), std::log(0.5)};
  m.vocab_hash_ = vocab_hash;
  return m;
}

RationaleModel RationaleModel::fit(std::span<const Sentence* const> sentences,
                                   std::span<const int> labels,
                                   std::size_t vocab_size, double smoothing,
                                   std::uint64_t vocab_hash) {
  if (sentences.size() != labels.size()) {
    throw std::invalid_argument("fit: sentences and labels differ in length");
  }
  std::array<std::vector<double>, 2> counts;
  counts[0].assign(vocab_size, 0.0);
  counts[1].assign(vocab_size, 0.0);
  std::array<double, 2> totals{};
  std::array<double, 2> class_docs{};
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const int c = labels[i];
    if (c != 0 && c != 1) throw std::invalid_argument("fit: label must be 0 or 1");
    class_docs[c] += 1.0;
    for (TokenId t : sentences[i]->tokens) {
      if (t >= vocab_size) throw std::out_of_range("fit: token outside vocabulary");
      counts[c][t] += 1.0;
      totals[c] += 1.0;
    }
  }
  RationaleModel m;
  m.vocab_hash_ = vocab_hash;
  const double v = static_cast<double>(vocab_size);
  for (int c = 0; c < 2; ++c) {
    const double denom = std::log(totals[c] + smoothing * v);
    m.log_prob_[c].resize(vocab_size);
    for (std::size_t t = 0; t < vocab_size; ++t) {
      m.log_prob_[c][t] = std::log(counts[c][t] + smoothing) - denom;
    }
  }
  const double docs = class_docs[0] + class_docs[1];
  for (int c = 0; c < 2; ++c) {
    // Add-one on the prior as well so an absent class stays finite.
    m.log_prior_[c] = std::log((class_docs[c] + 1.0) / (docs + 2.0));
  }
  m.llr_.resize(vocab_size);
  for (std::size_t t = 0; t < vocab_size; ++t) {
    m.llr_[t] = m.log_prob_[1][t] - m.log_prob_[0][t];
  }
  return m;
}

double RationaleModel::log_prob(int cls, TokenId token) const {
  return log_prob_.at(static_cast<std::size_t>(cls)).at(token);
}

double RationaleModel::token_llr(TokenId token) const { return llr_.at(token); }

double RationaleModel::sentence_llr(const Sentence& s) const {
  double sum = 0.0;
  for (TokenId t : s.tokens) sum += llr_.at(t);
  return sum;
}

void RationaleModel::set_scale(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("scale must be positive and finite");
  }
  scale_ = scale;
}

bool RationaleModel::same_parameters(const RationaleModel& other) const {
  return log_prob_ == other.log_prob_ && log_prior_ == other.log_prior_ &&
         vocab_hash_ == other.vocab_hash_ && scale_ == other.scale_;
}

void RationaleModel::save(std::ostream& out) const {
  out << "icda-rationale-model 1\n";
  out << "vocab_size " << vocab_size() << '\n';
  out << "vocab_hash " << vocab_hash_ << '\n';
  out << "train_rounds " << train_rounds << '\n';
  out << "best_round " << best_round << '\n';
  out << "dev_loss " << format_double(dev_loss) << '\n';
  out << "scale " << format_double(scale_) << '\n';
  out << "prior " << format_double(log_prior_[0]) << ' '
      << format_double(log_prior_[1]) << '\n';
  for (std::size_t t = 0; t < vocab_size(); ++t) {
    out << t << ' ' << format_double(log_prob_[0][t]) << ' '
        << format_double(log_prob_[1][t]) << '\n';
  }
}

RationaleModel RationaleModel::load(std::istream& in) {
  auto expect = [&](const char* key) {
    std::string word;
    if (!(in >> word) || word != key) {
      throw std::runtime_error(std::string("model file: expected '") + key + "'");
    }
  };
  auto read_double = [&]() {
    std::string text;
    in >> text;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw std::runtime_error("model file: bad number '" + text + "'");
    }
    return v;
  };
  expect("icda-rationale-model");
  int version = 0;
  in >> version;
  if (version != 1) throw std::runtime_error("model file: unsupported version");
  RationaleModel m;
  std::size_t v = 0;
  expect("vocab_size");
  in >> v;
  expect("vocab_hash");
  in >> m.vocab_hash_;
  expect("train_rounds");
  in >> m.train_rounds;
  expect("best_round");
  in >> m.best_round;
  expect("dev_loss");
  m.dev_loss = read_double();
  expect("scale");
  m.set_scale(read_double());
  expect("prior");
  m.log_prior_[0] = read_double();
  m.log_prior_[1] = read_double();
  m.log_prob_[0].resize(v);
  m.log_prob_[1].resize(v);
  m.llr_.resize(v);
  for (std::size_t t = 0; t < v; ++t) {
    std::size_t id = 0;
    if (!(in >> id) || id != t) throw std::runtime_error("model file: bad token row");
    m.log_prob_[0][t] = read_double();
    m.log_prob_[1][t] = read_double();
    m.llr_[t] = m.log_prob_[1][t] - m.log_prob_[0][t];
  }
  if (!in) throw std::runtime_error("model file: truncated");
  return m;
}

RationaleChoice select_rationale(const RationaleModel& model, const Document& doc) {
  if (doc.sentences.empty()) {
    throw std::invalid_argument("select_rationale: empty document");
  }
  RationaleChoice choice;
  choice.doc_id = doc.doc_id;
  double best_llr = 0.0;
  choice.sentence_index = argmax_abs_llr(model, doc, &best_llr);
  choice.score = std::abs(best_llr);
  const double z = logit(model, best_llr);
  // Sign of the score; the prior only breaks an exact zero.
  choice.predicted_label = best_llr != 0.0 ? (best_llr > 0.0 ? 1 : 0) : (z > 0.0 ? 1 : 0);
  if (doc.label == 0 || doc.label == 1) {
    choice.loss = neg_log2_sigmoid(doc.label == 1 ? z : -z);
  }
  return choice;
}

Prediction predict(const RationaleModel& model, const Document& doc) {
  const RationaleChoice choice = select_rationale(model, doc);
  return {choice.predicted_label, choice.loss};
}

double mean_loss_bits(const RationaleModel& model, const Dataset& ds) {
  if (ds.documents.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& doc : ds.documents) sum += select_rationale(model, doc).loss;
  return sum / static_cast<double>(ds.documents.size());
}

RationaleModel train_selector(const TrainingSource& source, const Dataset& dev,
                              const SelectorTrainConfig& cfg,
                              const RationaleModel* warm_start) {
  cfg.validate();
  const std::shared_ptr<const Dataset> initial = source(0);
  check_both_classes(*initial, "train_selector");
  const VocabInfo vocab = vocab_of(*initial);

  // Every state is calibrated on the dev set it is scored on. Training data
  // mixed with counterfactuals is separable enough to push the scale to its
  // bound, which makes dev losses of different candidates incomparable.
  RationaleModel current;
  if (warm_start) {
    if (warm_start->vocab_size() != vocab.size) {
      throw std::invalid_argument("train_selector: warm start vocabulary mismatch");
    }
    current = *warm_start;
    // Recalibrate first so that only selector changes count as improvement
    // over the warm start.
    current.set_scale(fit_scale(current, dev));
  } else {
    std::vector<const Sentence*> sentences;
    std::vector<int> labels;
    for (const auto& doc : initial->documents) {
      for (const auto& s : doc.sentences) {
        sentences.push_back(&s);
        labels.push_back(doc.label);
      }
    }
    current = RationaleModel::fit(sentences, labels, vocab.size, cfg.smoothing,
                                  vocab.hash);
    current.set_scale(fit_scale(current, dev));
  }

  RationaleModel best = current;
  best.dev_loss = mean_loss_bits(current, dev);
  best.best_round = -1;

  Rng rng(cfg.seed);
  std::vector<const Sentence*> picked;
  std::vector<int> labels;
  for (int round = 0; round < cfg.em_rounds; ++round) {
    const std::shared_ptr<const Dataset> data = round == 0 ? initial : source(round);
    picked.clear();
    labels.clear();
    for (const auto& doc : data->documents) {
      if (doc.sentences.empty()) continue;
      std::size_t index = 0;
      if (rng.bernoulli(cfg.exploration_rate)) {
        index = rng.below(doc.sentences.size());
      } else {
        // Sentence that best explains the observed label.
        double best_support = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
          const double llr = current.sentence_llr(doc.sentences[i]);
          const double support = doc.label == 1 ? llr : -llr;
          if (support > best_support) {
            best_support = support;
            index = i;
          }
        }
      }
      picked.push_back(&doc.sentences[index]);
      labels.push_back(doc.label);
    }
    current = RationaleModel::fit(picked, labels, vocab.size, cfg.smoothing,
                                  vocab.hash);
    current.set_scale(fit_scale(current, dev));
    const double loss = mean_loss_bits(current, dev);
    if (loss < best.dev_loss - cfg.min_improvement_bits) {
      best = current;
      best.dev_loss = loss;
      best.best_round = round;
    }
  }
  best.train_rounds = cfg.em_rounds;
  return best;
}

RationaleModel train_selector(const Dataset& train, const Dataset& dev,
                              const SelectorTrainConfig& cfg,
                              const RationaleModel* warm_start) {
  auto shared = std::make_shared<const Dataset>(train);
  TrainingSource source = [shared](int) { return shared; };
  return train_selector(source, dev, cfg, warm_start);
}

double rationale_precision(const RationaleModel& model, const Dataset& ds,
                           int target_aspect) {
  std::vector<std::size_t> chosen;
  chosen.reserve(ds.documents.size());
  for (const auto& doc : ds.documents) {
    chosen.push_back(select_rationale(model, doc).sentence_index);
  }
  return rationale_precision(ds, chosen, target_aspect);
}

double rationale_precision(const Dataset& ds,
                           std::span<const std::size_t> chosen_indices,
                           int target_aspect) {
  if (chosen_indices.size() != ds.documents.size()) {
    throw std::invalid_argument("rationale_precision: one index per document");
  }
  if (ds.documents.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t d = 0; d < ds.documents.size(); ++d) {
    const int aspect = ds.documents[d].sentences.at(chosen_indices[d]).aspect();
    if (aspect < 0) {
      throw std::invalid_argument("rationale_precision: missing ground truth");
    }
    hits += aspect == target_aspect;
  }
  return static_cast<double>(hits) / static_cast<double>(ds.documents.size());
}

DegenerationReport degeneration_check(const RationaleModel& model,
                                      const Dataset& ds) {
  std::vector<std::pair<std::size_t, int>> choices;
  choices.reserve(ds.documents.size());
  for (const auto& doc : ds.documents) {
    const RationaleChoice c = select_rationale(model, doc);
    choices.emplace_back(c.sentence_index, c.predicted_label);
  }
  return degeneration_check(ds, choices);
}

DegenerationReport degeneration_check(
    const Dataset& ds, std::span<const std::pair<std::size_t, int>> choices) {
  check_both_classes(ds, "degeneration_check");
  if (choices.size() != ds.documents.size()) {
    throw std::invalid_argument("degeneration_check: one choice per document");
  }
  DegenerationReport report;
  std::array<double, 2> per_class{};
  for (std::size_t d = 0; d < choices.size(); ++d) {
    const auto [index, cls] = choices[d];
    const std::size_t n = ds.documents[d].sentences.size();
    report.frequency[cls][position_bin(index, n)] += 1.0;
    per_class[cls] += 1.0;
  }
  if (per_class[0] == 0.0 || per_class[1] == 0.0) {
    // Constant predictions: the classifier ignores content altogether.
    report.pass = false;
    report.max_bin_gap = 1.0;
    return report;
  }
  for (int c = 0; c < 2; ++c) {
    for (auto& f : report.frequency[c]) f /= per_class[c];
  }
  for (std::size_t b = 0; b < DegenerationReport::kBins; ++b) {
    report.max_bin_gap = std::max(
        report.max_bin_gap, std::abs(report.frequency[0][b] - report.frequency[1][b]));
  }
  const auto& f = report.frequency;
  report.leading_bins_gap = std::abs((f[0][0] - f[0][1]) - (f[1][0] - f[1][1]));
  report.pass = report.max_bin_gap <= kDegenerationThreshold &&
                report.leading_bins_gap <= kDegenerationThreshold;
  return report;
}

}  // namespace icda
