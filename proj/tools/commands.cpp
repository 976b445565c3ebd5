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

#include "commands.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>

#include "CLI11.hpp"
#include "csv.hpp"
#include "icda/corpus.hpp"
#include "icda/corpus_io.hpp"
#include "icda/icda.hpp"
#include "icda/operators.hpp"
#include "icda/probmodel.hpp"
#include "icda/rationale.hpp"
#include "icda/rng.hpp"
#include "icda/selection_kernel.hpp"
#include "svg_plot.hpp"

namespace icda::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kBetaSweep = "beta_sweep";
const char* kOperators = "operators";
const char* kFixedPoint = "fixed_point";
const char* kGenCorpus = "gen_corpus";
const char* kIcda = "icda";
const char* kVerify = "verify";

std::string num(double v) { return format_number(v); }
std::string num(std::uint64_t v) { return format_number(v); }
std::string num(int v) { return format_number(v); }
std::string flag(bool v) { return v ? "true" : "false"; }

fs::path out_dir(const RunConfig& cfg, const char* cmd) {
  fs::path dir = cfg.get<std::string>(cmd, "out", "out");
  fs::create_directories(dir);
  return dir;
}

std::uint64_t seed_of(const RunConfig& cfg, const char* cmd) {
  return cfg.get<std::uint64_t>(cmd, "seed", 1);
}

double probability(const RunConfig& cfg, const char* cmd, const std::string& key,
                   double fallback) {
  const double p = cfg.get<double>(cmd, key, fallback);
  if (!(p >= 0.0 && p <= 1.0)) cfg.fail(cmd, key, "must be in [0, 1], got " + num(p));
  return p;
}

ThetaSpec parse_theta(const RunConfig& cfg, const char* cmd, const std::string& key,
                      std::array<double, 2> fallback) {
  const auto v = cfg.get<std::vector<double>>(cmd, key, {fallback[0], fallback[1]});
  if (v.size() != 2) cfg.fail(cmd, key, "expected [P(Y|X1), P(Y|X2)]");
  ThetaSpec theta;
  cfg.validate(cmd, key, [&] {
    theta = ThetaSpec::from_conditionals(v[0], v[1]);
    theta.validate();
  });
  return theta;
}

// Either an explicit array or {"lo": .., "hi": .., "count": ..}.
std::vector<double> parse_grid(const RunConfig& cfg, const char* cmd,
                               const std::string& key, double lo, double hi,
                               std::size_t count) {
  const json* node = cfg.find(cmd, key);
  std::vector<double> grid;
  if (!node) {
    grid = linspace(lo, hi, count);
  } else if (node->is_array()) {
    grid = cfg.get<std::vector<double>>(cmd, key, {});
  } else if (node->is_object()) {
    lo = cfg.get<double>(cmd, key + ".lo", lo);
    hi = cfg.get<double>(cmd, key + ".hi", hi);
    count = cfg.get<std::size_t>(cmd, key + ".count", count);
    if (count == 0) cfg.fail(cmd, key + ".count", "must be positive");
    if (count > 1 && !(hi > lo)) cfg.fail(cmd, key, "hi must exceed lo");
    grid = linspace(lo, hi, count);
  } else {
    cfg.fail(cmd, key, "expected an array or {lo, hi, count}");
  }
  if (grid.empty()) cfg.fail(cmd, key, "grid is empty");
  for (double g : grid) {
    if (!(g >= 0.0 && g <= 1.0)) cfg.fail(cmd, key, "grid values must be in [0, 1]");
  }
  return grid;
}

RConfig parse_r_config(const RunConfig& cfg, const char* cmd) {
  RConfig rc;
  rc.n = cfg.get<int>(cmd, "n", rc.n);
  rc.trials = cfg.get<std::uint64_t>(cmd, "trials", rc.trials);
  rc.threshold_trial_multiplier =
      cfg.get<std::uint64_t>(cmd, "threshold_trial_multiplier", rc.threshold_trial_multiplier);
  cfg.validate(cmd, "n", [&] { rc.validate(); });
  return rc;
}

// Points a validation failure at the block field its message names.
void validate_block(const RunConfig& cfg, const char* cmd, const std::string& block,
                    const std::function<void()>& check) {
  try {
    check();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    const std::string what = e.what();
    if (const json* node = cfg.find(cmd, block); node && node->is_object()) {
      std::string best;
      for (const auto& item : node->items()) {
        if (what.find(item.key()) != std::string::npos && item.key().size() > best.size()) {
          best = item.key();
        }
      }
      if (!best.empty()) cfg.fail(cmd, block + "." + best, what);
    }
    cfg.fail(cmd, block, what);
  }
}

CorpusSpec parse_corpus_spec(const RunConfig& cfg, const char* cmd) {
  json block = json::object();
  if (const json* node = cfg.find(cmd, "corpus")) {
    if (!node->is_object()) cfg.fail(cmd, "corpus", "expected an object");
    block = *node;
  }
  if (!block.contains("seed")) block["seed"] = seed_of(cfg, cmd);
  CorpusSpec spec;
  validate_block(cfg, cmd, "corpus", [&] { spec = corpus_spec_from_json(block.dump()); });
  return spec;
}

ICDAConfig parse_icda_config(const RunConfig& cfg, const char* cmd) {
  ICDAConfig ic;
  ic.max_iterations = cfg.get<int>(cmd, "driver.max_iterations", ic.max_iterations);
  ic.seeds = cfg.get<std::vector<std::uint64_t>>(cmd, "driver.seeds", ic.seeds);
  ic.confidence_keep_fraction =
      cfg.get<double>(cmd, "driver.confidence_keep_fraction", ic.confidence_keep_fraction);
  ic.resample_each_round =
      cfg.get<bool>(cmd, "driver.resample_each_round", ic.resample_each_round);
  ic.delta_a_required_decreasing = cfg.get<bool>(
      cmd, "driver.delta_a_required_decreasing", ic.delta_a_required_decreasing);
  const auto rule = cfg.get<std::string>(cmd, "driver.delta_a_rule", "decreasing");
  if (rule == "decreasing") {
    ic.delta_a_rule = DeltaARule::kDecreasing;
  } else if (rule == "literal") {
    ic.delta_a_rule = DeltaARule::kLiteralThreshold;
  } else {
    cfg.fail(cmd, "driver.delta_a_rule", "expected \"decreasing\" or \"literal\"");
  }
  validate_block(cfg, cmd, "driver", [&] { ic.validate(); });
  return ic;
}

SelectorTrainConfig parse_selector_config(const RunConfig& cfg, const char* cmd) {
  SelectorTrainConfig sc;
  sc.em_rounds = cfg.get<int>(cmd, "selector.em_rounds", sc.em_rounds);
  sc.smoothing = cfg.get<double>(cmd, "selector.smoothing", sc.smoothing);
  sc.exploration_rate = cfg.get<double>(cmd, "selector.exploration_rate", sc.exploration_rate);
  sc.min_improvement_bits =
      cfg.get<double>(cmd, "selector.min_improvement_bits", sc.min_improvement_bits);
  validate_block(cfg, cmd, "selector", [&] { sc.validate(); });
  return sc;
}

void note(std::ostream& log, const fs::path& path) { log << "wrote " << path.string() << '\n'; }

}  // namespace

int cmd_beta_sweep(const RunConfig& cfg, std::ostream& log) {
  const ThetaSpec theta = parse_theta(cfg, kBetaSweep, "theta", {0.95, 0.9});
  const auto alphas = parse_grid(cfg, kBetaSweep, "alpha_grid", 0.0, 1.0, 101);
  const auto mode = cfg.get<std::string>(kBetaSweep, "mode", "grid");
  const fs::path dir = out_dir(cfg, kBetaSweep);

  const fs::path csv = dir / "beta_sweep.csv";
  CsvWriter w(csv, {"alpha", "beta", "benefit_bits"});
  PlotSpec plot{"CDA benefit by beta", "alpha", "benefit (bits)", false, 0.0};
  if (mode == "grid") {
    const auto betas = parse_grid(cfg, kBetaSweep, "betas", 0.0, 1.0, 5);
    const BenefitTable table = beta_sweep(theta, alphas, betas);
    for (std::size_t b = 0; b < betas.size(); ++b) {
      for (std::size_t a = 0; a < alphas.size(); ++a) {
        w.row({num(alphas[a]), num(betas[b]), num(table.at(b, a))});
      }
    }
    w.close();
    const fs::path crossings = dir / "beta_crossings.csv";
    CsvWriter c(crossings, {"beta", "alpha_star"});
    for (double beta : betas) c.row({num(beta), num(benefit_break_even_alpha(theta, beta))});
    c.close();
    note(log, crossings);
    write_svg(dir / "beta_sweep.svg", plot, series_from_csv(csv, "alpha", "benefit_bits", "beta"));
  } else if (mode == "diagonal") {
    for (double a : alphas) w.row({num(a), num(a), num(cda_benefit(theta, {a, a}))});
    w.close();
    plot.title = "CDA benefit, beta = alpha";
    write_svg(dir / "beta_sweep.svg", plot, series_from_csv(csv, "alpha", "benefit_bits"));
  } else {
    cfg.fail(kBetaSweep, "mode", "expected \"grid\" or \"diagonal\"");
  }
  note(log, csv);
  note(log, dir / "beta_sweep.svg");
  return 0;
}

int cmd_operators(const RunConfig& cfg, std::ostream& log) {
  const ThetaSpec theta = parse_theta(cfg, kOperators, "theta", {0.95, 0.9});
  const auto alphas = parse_grid(cfg, kOperators, "alpha_grid", 0.0, 1.0, 51);
  const RConfig rc = parse_r_config(cfg, kOperators);
  const double p1 = probability(cfg, kOperators, "r_p_y_given_x1", theta.p_y_given_x1);
  auto p2_grid = parse_grid(cfg, kOperators, "r_p_y_given_x2_grid", 0.5, 1.0, 51);
  const std::uint64_t seed = seed_of(cfg, kOperators);
  const fs::path dir = out_dir(cfg, kOperators);

  const fs::path j_csv = dir / "j_curve.csv";
  CsvWriter j(j_csv, {"alpha", "delta_a_bits", "p_ya_given_x1a", "p_ya_given_x2a"});
  for (double a : alphas) {
    const auto aug = augment_conditionals(theta, ErrorRates::coupled(a));
    j.row({num(a), num(operator_j(theta, a)), num(aug.p_ya_given_x1a),
           num(aug.p_ya_given_x2a)});
  }
  j.close();

  // Rows ordered by increasing delta; one shared seed keeps the curve smooth.
  std::sort(p2_grid.begin(), p2_grid.end(), std::greater<>());
  const fs::path r_csv = dir / "r_curve.csv";
  CsvWriter r(r_csv, {"delta_bits", "p_y_given_x2", "alpha_next", "stderr"});
  for (double p2 : p2_grid) {
    const ThetaSpec eff = ThetaSpec::from_conditionals(p1, p2);
    const SelectionEstimate est = operator_r(eff, rc, seed);
    r.row({num(delta_info(eff)), num(p2), num(est.alpha), num(est.std_error)});
  }
  r.close();

  write_svg(dir / "j_curve.svg", {"Operator J", "alpha", "delta_a (bits)", false, 0.0},
            series_from_csv(j_csv, "alpha", "delta_a_bits"));
  write_svg(dir / "r_curve.svg", {"Operator R", "delta (bits)", "selection error", false, {}},
            series_from_csv(r_csv, "delta_bits", "alpha_next"));
  for (const char* f : {"j_curve.csv", "r_curve.csv", "j_curve.svg", "r_curve.svg"}) {
    note(log, dir / f);
  }
  return 0;
}

int cmd_fixed_point(const RunConfig& cfg, std::ostream& log) {
  const ThetaSpec theta = parse_theta(cfg, kFixedPoint, "theta", {0.9, 0.85});
  const RConfig rc = parse_r_config(cfg, kFixedPoint);
  const double alpha0 = probability(cfg, kFixedPoint, "alpha0", 0.27);
  const int max_iters = cfg.get<int>(kFixedPoint, "max_iters", 20);
  if (max_iters < 1) cfg.fail(kFixedPoint, "max_iters", "must be >= 1");
  const double eps = cfg.get<double>(kFixedPoint, "eps", 0.005);
  if (!(eps > 0.0)) cfg.fail(kFixedPoint, "eps", "must be positive");
  const auto psi_grid = parse_grid(cfg, kFixedPoint, "psi_grid", 0.0, 1.0, 51);
  const bool threshold = cfg.get<bool>(kFixedPoint, "threshold", true);
  const std::uint64_t seed = seed_of(cfg, kFixedPoint);
  const fs::path dir = out_dir(cfg, kFixedPoint);

  const fs::path psi_csv = dir / "psi_curve.csv";
  CsvWriter p(psi_csv, {"alpha", "psi", "stderr", "delta_a_bits"});
  const std::uint64_t psi_seed = derive_seed(seed, 0x9519);
  for (double a : psi_grid) {
    const PsiResult s = psi_step(theta, a, rc, psi_seed);
    p.row({num(a), num(s.alpha_next), num(s.std_error), num(s.delta_a)});
  }
  p.close();

  const IterationTrace trace = run_fixed_point(theta, alpha0, rc, max_iters, eps, seed);
  const fs::path trace_csv = dir / "trace.csv";
  CsvWriter t(trace_csv, {"k", "alpha", "delta_a_bits"});
  for (const auto& s : trace.steps) t.row({num(s.k), num(s.alpha), num(s.delta_a)});
  t.close();

  const double final_alpha = trace.steps.back().alpha;
  const double noise =
      3.0 * std::sqrt(std::max(alpha0 * (1.0 - alpha0), 1e-12) / static_cast<double>(rc.trials));
  std::string direction = "flat";
  if (final_alpha < alpha0 - std::max(noise, eps)) direction = "decreasing";
  if (final_alpha > alpha0 + std::max(noise, eps)) direction = "increasing";
  const SelectionEstimate upper = upper_fixed_point(theta, rc, derive_seed(seed, 0x0bb));
  std::optional<ThresholdResult> at;
  if (threshold) at = find_threshold_alpha(theta, rc, seed);

  const fs::path summary = dir / "fixed_point_summary.csv";
  CsvWriter s(summary, {"key", "value"});
  s.row({"alpha0", num(alpha0)});
  s.row({"steps", num(static_cast<int>(trace.steps.size()) - 1)});
  s.row({"final_alpha", num(final_alpha)});
  s.row({"direction", direction});
  s.row({"converged", flag(trace.converged)});
  s.row({"floor_alpha", num(trace.limit_alpha)});
  s.row({"upper_alpha", num(upper.alpha)});
  s.row({"alpha_t", at ? num(at->alpha_t) : std::string("none")});
  s.row({"alpha0_above_threshold", flag(at && alpha0 > at->alpha_t)});
  s.close();
  if (direction == "increasing") {
    log << "note: trace increases from alpha0 = " << alpha0
        << " toward the upper fixed point " << upper.alpha << '\n';
  }

  auto series = series_from_csv(psi_csv, "alpha", "psi");
  series[0].name = "psi(alpha)";
  auto steps = series_from_csv(trace_csv, "k", "alpha");
  // Trace as a cobweb on the psi plot: (alpha_k, alpha_{k+1}).
  Series cobweb{"trace", {}, {}, true, true};
  for (std::size_t i = 0; i + 1 < steps[0].y.size(); ++i) {
    cobweb.x.push_back(steps[0].y[i]);
    cobweb.y.push_back(steps[0].y[i + 1]);
  }
  series.push_back(cobweb);
  write_svg(dir / "fixed_point.svg", {"Fixed-point iteration", "alpha_k", "alpha_k+1", true, {}},
            series);
  for (const char* f : {"psi_curve.csv", "trace.csv", "fixed_point_summary.csv",
                        "fixed_point.svg"}) {
    note(log, dir / f);
  }
  return 0;
}

int cmd_gen_corpus(const RunConfig& cfg, std::ostream& log) {
  const CorpusSpec spec = parse_corpus_spec(cfg, kGenCorpus);
  const fs::path dir = out_dir(cfg, kGenCorpus);
  const CorpusSplits splits = generate_corpus(spec);
  write_corpus_dir(splits, spec, dir);

  const fs::path stats = dir / "corpus_stats.csv";
  CsvWriter w(stats, {"split", "aspect", "p_label_given_sentiment", "mi_bits"});
  for (const Dataset* ds : {&splits.train, &splits.dev, &splits.test}) {
    const CorpusStats st = corpus_stats(*ds);
    for (std::size_t a = 0; a < st.p_label_given_sentiment.size(); ++a) {
      w.row({split_name(ds->split), num(static_cast<int>(a)),
             num(st.p_label_given_sentiment[a]), num(st.mutual_information_bits[a])});
    }
  }
  w.close();

  Dataset sample;
  sample.split = splits.train.split;
  sample.spec = splits.train.spec;
  const std::size_t shown = std::min<std::size_t>(20, splits.train.size());
  sample.documents.assign(splits.train.documents.begin(),
                          splits.train.documents.begin() + static_cast<std::ptrdiff_t>(shown));
  write_human_readable(sample, Vocabulary(spec).words(), dir / "sample.txt");
  log << "wrote corpus (" << splits.train.size() << " train, " << splits.dev.size()
      << " dev, " << splits.test.size() << " test) to " << dir.string() << '\n';
  return 0;
}

int cmd_icda(const RunConfig& cfg, std::ostream& log) {
  CorpusSplits splits;
  if (const json* d = cfg.find(kIcda, "corpus_dir")) {
    (void)d;
    const fs::path src = cfg.get<std::string>(kIcda, "corpus_dir", "");
    cfg.validate(kIcda, "corpus_dir", [&] { splits = read_corpus_dir(src, nullptr); });
  } else {
    splits = generate_corpus(parse_corpus_spec(cfg, kIcda));
  }
  const ICDAConfig ic = parse_icda_config(cfg, kIcda);
  const SelectorTrainConfig sc = parse_selector_config(cfg, kIcda);
  const int reps = cfg.get<int>(kIcda, "reps", 3);
  if (reps < 1) cfg.fail(kIcda, "reps", "must be >= 1");
  const bool artifacts = cfg.get<bool>(kIcda, "write_artifacts", true);
  const std::uint64_t seed = seed_of(cfg, kIcda);
  const fs::path dir = out_dir(cfg, kIcda);

  std::vector<double> mmi, cda, final_p;
  const fs::path by_iter = dir / "precision_by_iteration.csv";
  CsvWriter progress(by_iter, {"rep", "k", "precision_test"});
  for (int r = 0; r < reps; ++r) {
    const fs::path rep_dir = dir / ("rep_" + std::to_string(r));
    fs::create_directories(rep_dir);
    IterationObserver observer;
    if (artifacts) {
      observer = [&](const IterationArtifacts& art) {
        const fs::path it_dir = rep_dir / ("iter_" + std::to_string(art.k));
        fs::create_directories(it_dir);
        CsvWriter sets(it_dir / "rationale_sets.csv",
                       {"label", "source_doc_id", "sentence_index", "confidence"});
        for (int c = 0; c < 2; ++c) {
          for (const auto& e : art.sets->for_label(c)) {
            sets.row({num(c), num(e.source_doc_id), num(e.sentence_index), num(e.confidence)});
          }
        }
        sets.close();
        CsvWriter dump(it_dir / "test_rationales.csv",
                       {"doc_id", "sentence_index", "score", "predicted_label"});
        for (const auto& doc : splits.test.documents) {
          const RationaleChoice ch = select_rationale(*art.winner, doc);
          dump.row({num(ch.doc_id), num(ch.sentence_index), num(ch.score),
                    num(ch.predicted_label)});
        }
        dump.close();
        std::ofstream model(it_dir / "model.txt", std::ios::binary);
        art.winner->save(model);
        if (art.augmented_train) write_dataset(*art.augmented_train, it_dir / "augmented_train.jsonl");
      };
    }
    const ICDATrace trace = run_icda(splits.train, splits.dev, splits.test, ic, sc,
                                     derive_seed(seed, static_cast<std::uint64_t>(r)), observer);
    CsvWriter t(rep_dir / "trace.csv", {"k", "seed", "dev_loss_bits", "delta_a", "precision_test",
                                        "degeneration_pass", "warm_start", "stop_reason"});
    for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
      const ICDAIteration& it = trace.iterations[i];
      const bool last = i + 1 == trace.iterations.size();
      t.row({num(it.k), num(it.chosen_seed), num(it.dev_loss), num(it.delta_a),
             num(it.precision_test), flag(it.degeneration_pass), flag(it.warm_start_chosen),
             last ? stop_reason_name(trace.stop_reason) : ""});
      progress.row({num(r), num(it.k), num(it.precision_test)});
      if (it.size_mismatches || it.malformed_counterfactuals) {
        throw std::runtime_error("counterfactual audit failed in rep " + std::to_string(r));
      }
    }
    t.close();
    mmi.push_back(trace.mmi_precision());
    cda.push_back(trace.cda_precision());
    final_p.push_back(trace.icda_precision());
    log << "rep " << r << ": MMI " << mmi.back() << ", CDA " << cda.back() << ", ICDA "
        << final_p.back() << " after " << trace.counterfactual_iterations()
        << " counterfactual iterations (" << stop_reason_name(trace.stop_reason) << ")\n";
  }
  progress.close();

  const fs::path summary = dir / "summary.csv";
  CsvWriter s(summary, {"method", "mean_precision", "std_precision", "n_runs", "median_precision"});
  auto row = [&](const char* name, std::vector<double> v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    const double median = v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
    s.row({name, num(mean), num(sd), num(static_cast<int>(v.size())), num(median)});
  };
  row("MMI", mmi);
  row("CDA", cda);
  row("ICDA", final_p);
  s.close();

  auto series = series_from_csv(by_iter, "k", "precision_test", "rep");
  for (auto& sr : series) sr.markers = true;
  write_svg(dir / "precision_by_iteration.svg",
            {"Test rationale precision per iteration", "iteration k", "precision", false, {}},
            series);
  note(log, summary);
  return 0;
}

int cmd_verify(const RunConfig& cfg, std::ostream& log) {
  const auto grid = cfg.get<std::vector<double>>(kVerify, "grid", {0.5, 0.6, 0.7, 0.8, 0.9});
  const auto ns = cfg.get<std::vector<int>>(kVerify, "n_values", {10, 35});
  const auto trials = cfg.get<std::uint64_t>(kVerify, "trials", 60'000);
  const double sigmas = cfg.get<double>(kVerify, "sigmas", 3.0);
  const double symmetric_tol = cfg.get<double>(kVerify, "symmetric_tolerance", 0.01);
  const bool check_serial = cfg.get<bool>(kVerify, "check_serial", true);
  for (double p : grid) {
    if (!(p >= 0.0 && p <= 1.0)) cfg.fail(kVerify, "grid", "values must be in [0, 1]");
  }
  for (int n : ns) {
    if (n < 1) cfg.fail(kVerify, "n_values", "values must be >= 1");
  }
  if (trials < 1) cfg.fail(kVerify, "trials", "must be >= 1");
  const std::uint64_t seed = seed_of(cfg, kVerify);
  const fs::path dir = out_dir(cfg, kVerify);

  const fs::path csv = dir / "verify.csv";
  CsvWriter w(csv, {"p_agree_x1", "p_agree_x2", "n", "trials", "mc_alpha", "mc_stderr",
                    "exact_alpha", "abs_diff", "tolerance", "serial_match", "pass"});
  std::size_t failures = 0;
  std::size_t index = 0;
  for (int n : ns) {
    for (double p1 : grid) {
      for (double p2 : grid) {
        const SelectionProblem prob{p1, p2, n, trials, derive_seed(seed, index++)};
        const std::uint64_t picks = count_x2_selections_parallel(prob);
        const double t = static_cast<double>(trials);
        const double mc = static_cast<double>(picks) / t;
        const double exact = exact_selection_error(p1, p2, n);
        // Standard error from the exact value; one count is the resolution.
        const double se = std::max(std::sqrt(exact * (1.0 - exact) / t), 1.0 / t);
        const double diff = std::abs(mc - exact);
        const double tol = sigmas * se;
        bool ok = diff <= tol;
        if (p1 == p2) ok = ok && std::abs(mc - 0.5) <= symmetric_tol;
        bool serial = true;
        if (check_serial) {
          serial = count_x2_selections_serial(prob) == picks;
          ok = ok && serial;
        }
        failures += !ok;
        w.row({num(p1), num(p2), num(n), num(trials), num(mc),
               num(std::sqrt(mc * (1.0 - mc) / t)), num(exact), num(diff), num(tol),
               flag(serial), flag(ok)});
      }
    }
  }
  w.close();
  note(log, csv);
  log << "verify: " << index - failures << "/" << index << " points passed\n";
  return failures == 0 ? 0 : 1;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Iterative counterfactual data augmentation experiments", "icda"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out_path;
  std::optional<std::uint64_t> trials;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--set", sets, "Override a config value, e.g. --set icda.reps=5")
      ->take_all();
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--threads", threads, "OpenMP threads")->check(CLI::PositiveNumber);
  app.add_option("--out", out_path, "Output directory");
  app.add_option("--trials", trials, "Monte-Carlo trials per R evaluation");

  struct Entry {
    const char* name;
    const char* help;
    int (*fn)(const RunConfig&, std::ostream&);
  };
  const Entry entries[] = {
      {"beta-sweep", "CDA benefit curves over alpha for several beta", cmd_beta_sweep},
      {"operators", "Curves of operators J and R", cmd_operators},
      {"fixed-point", "Psi curve and iteration trace", cmd_fixed_point},
      {"gen-corpus", "Write a synthetic corpus", cmd_gen_corpus},
      {"icda", "Run the iterative augmentation experiment", cmd_icda},
      {"verify", "Monte-Carlo selection error against the exact binomial value", cmd_verify},
  };
  std::vector<CLI::App*> subs;
  for (const auto& e : entries) subs.push_back(app.add_subcommand(e.name, e.help));

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig() : RunConfig::from_file(config_path);
    if (seed) cfg.set_global("seed", *seed);
    if (threads) cfg.set_global("threads", *threads);
    if (out_path) cfg.set_global("out", *out_path);
    if (trials) cfg.set_global("trials", *trials);
    for (const auto& s : sets) cfg.apply_set(s);
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      std::string block = entries[i].name;
      std::replace(block.begin(), block.end(), '-', '_');
      const int nthreads = cfg.get<int>(block, "threads", 0);
      if (nthreads < 0) cfg.fail(block, "threads", "must be positive");
      if (nthreads > 0) omp_set_num_threads(nthreads);
      return entries[i].fn(cfg, out);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace icda::cli
