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


// Acceptance run: one [PASS]/[FAIL] line per criterion, exit status 1 if any
// criterion fails. CSV-based criteria drive the CLI in-process and read its
// output files back.

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "commands.hpp"
#include "csv.hpp"
#include "icda/corpus.hpp"
#include "icda/corpus_io.hpp"
#include "icda/operators.hpp"
#include "icda/probmodel.hpp"
#include "icda/selection_kernel.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace icda;
using cli::read_csv;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void cli_or_throw(std::vector<std::string> args) {
  args.insert(args.begin(), "icda");
  std::ostringstream out, err;
  const int status = cli::run_cli(args, out, err);
  if (status != 0) {
    throw std::runtime_error("icda " + args.back() + " exited " + std::to_string(status) +
                             ": " + err.str());
  }
}

std::map<std::string, std::string> key_values(const fs::path& csv) {
  std::map<std::string, std::string> kv;
  for (const auto& row : read_csv(csv).rows) kv[row.at(0)] = row.at(1);
  return kv;
}

double sigma(double p, double trials) { return std::sqrt(std::max(p * (1 - p), 0.0) / trials); }

// ---------------------------------------------------------------------------

Outcome ac1() {
  const ThetaSpec t = ThetaSpec::from_conditionals(0.95, 0.9);
  const auto lo = augment_conditionals(t, {0.0, 1.0});
  const auto hi = augment_conditionals(t, {1.0, 0.0});
  const double e = std::max({std::abs(lo.p_ya_given_x1a - t.p_y_given_x1),
                             std::abs(lo.p_ya_given_x2a - t.p_y),
                             std::abs(hi.p_ya_given_x1a - t.p_y),
                             std::abs(hi.p_ya_given_x2a - t.p_y_given_x2)});
  return {e <= 1e-12, "max endpoint error " + fmt(e)};
}

Outcome ac2(const fs::path& out) {
  const auto t0 = std::chrono::steady_clock::now();
  cli_or_throw({"--out", (out / "beta").string(), "beta-sweep"});
  const double secs = seconds_since(t0);
  const auto sweep = read_csv(out / "beta" / "beta_sweep.csv");
  const auto alpha = sweep.numbers("alpha");
  const auto beta = sweep.numbers("beta");
  const auto benefit = sweep.numbers("benefit_bits");
  std::map<double, std::map<double, double>> by_alpha;  // alpha -> beta -> value
  double oracle_err = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    by_alpha[alpha[i]][beta[i]] = benefit[i];
    oracle_err = std::max(oracle_err, std::abs(benefit[i] - testing::reference_benefit(
                                                                0.95, 0.9, alpha[i], beta[i])));
  }
  std::size_t violations = 0;
  for (const auto& [a, row] : by_alpha) {
    double prev = -INFINITY;
    for (const auto& [b, v] : row) {
      violations += v < prev;
      prev = v;
    }
  }
  const auto cross = read_csv(out / "beta" / "beta_crossings.csv");
  const auto star = cross.numbers("alpha_star");
  bool star_ok = star.size() == 5;
  for (std::size_t i = 1; i < star.size(); ++i) star_ok = star_ok && star[i] >= star[i - 1];
  std::string stars;
  for (double s : star) stars += fmt(s) + " ";
  return {by_alpha.size() == 101 && violations == 0 && star_ok && oracle_err < 1e-12 && secs < 1.0,
          "order violations " + std::to_string(violations) + ", alpha* = " + stars +
              "oracle err " + fmt(oracle_err) + ", " + fmt(secs) + " s"};
}

Outcome ac3(const fs::path& dir, const std::string& threads) {
  const auto t0 = std::chrono::steady_clock::now();
  cli_or_throw({"--seed", "1", "--threads", threads, "--out", dir.string(), "verify"});
  const double secs = seconds_since(t0);
  const auto v = read_csv(dir / "verify.csv");
  const auto p1 = v.numbers("p_agree_x1");
  const auto p2 = v.numbers("p_agree_x2");
  const auto n = v.numbers("n");
  const auto mc = v.numbers("mc_alpha");
  const auto trials = v.numbers("trials");
  std::size_t bad = 0;
  double worst_z = 0.0;
  for (std::size_t i = 0; i < mc.size(); ++i) {
    // Independent oracle; the CSV's exact column is not trusted here.
    const double exact = testing::reference_selection_error(p1[i], p2[i], static_cast<int>(n[i]));
    const double se = std::max(sigma(exact, trials[i]), 1.0 / trials[i]);
    const double z = std::abs(mc[i] - exact) / se;
    worst_z = std::max(worst_z, z);
    bool ok = z <= 3.0 && trials[i] == 60'000;
    if (p1[i] == p2[i]) ok = ok && std::abs(mc[i] - 0.5) <= 0.01;
    bad += !ok;
  }
  return {mc.size() == 50 && bad == 0 && secs < 30.0,
          std::to_string(mc.size() - bad) + "/" + std::to_string(mc.size()) +
              " points, worst |z| " + fmt(worst_z) + ", " + fmt(secs) + " s"};
}

struct Trace {
  std::vector<double> alpha;
};

Trace read_trace(const fs::path& csv) { return {read_csv(csv).numbers("alpha")}; }

Outcome ac4(const fs::path& dir, const std::string& threads) {
  const auto t0 = std::chrono::steady_clock::now();
  cli_or_throw({"--seed", "1", "--threads", threads, "--out", dir.string(), "--set",
                "fixed_point.threshold=false", "fixed-point"});
  const double secs = seconds_since(t0);
  const double T = 60'000;
  const auto tr = read_trace(dir / "trace.csv");
  const auto kv = key_values(dir / "fixed_point_summary.csv");
  const double floor_alpha = std::stod(kv.at("floor_alpha"));
  const auto& a = tr.alpha;

  bool monotone = a.size() >= 2;
  for (std::size_t k = 1; k < a.size(); ++k) {
    monotone = monotone && a[k] <= a[k - 1] + 2 * sigma(a[k - 1], T);
  }
  int reach = -1;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::abs(a[k] - floor_alpha) <= 0.02) {
      reach = static_cast<int>(k);
      break;
    }
  }
  // Step ratios are taken while both distances to the floor are resolvable,
  // i.e. larger than 2 sigma of the combined MC noise.
  std::vector<double> ratios;
  auto noise = [&](double x) { return 2 * std::sqrt(sigma(x, T) * sigma(x, T) +
                                                    sigma(floor_alpha, T) * sigma(floor_alpha, T)); };
  for (std::size_t k = 0; k + 1 < a.size(); ++k) {
    const double d0 = std::abs(a[k] - floor_alpha);
    const double d1 = std::abs(a[k + 1] - floor_alpha);
    if (d0 <= noise(a[k]) || d1 <= noise(a[k + 1])) break;
    ratios.push_back(d1 / d0);
  }
  bool contracting = ratios.size() >= 2;
  for (std::size_t i = 1; i < ratios.size(); ++i) contracting = contracting && ratios[i] < ratios[i - 1];

  // Reference: the same map with the exact binomial R in place of MC.
  const ThetaSpec theta = ThetaSpec::from_conditionals(0.9, 0.85);
  std::string exact_ratios;
  {
    const auto fl = augment_conditionals(theta, {0.0, 1.0});
    const double fix = exact_selection_error(fl.p_ya_given_x1a, fl.p_ya_given_x2a, 35);
    double x = 0.27;
    double prev = std::abs(x - fix);
    for (int k = 0; k < 3; ++k) {
      const auto aug = augment_conditionals(theta, ErrorRates::coupled(x));
      x = exact_selection_error(aug.p_ya_given_x1a, aug.p_ya_given_x2a, 35);
      exact_ratios += fmt(std::abs(x - fix) / prev) + " ";
      prev = std::abs(x - fix);
    }
  }
  std::string rs;
  for (double r : ratios) rs += fmt(r) + " ";
  std::string trace;
  for (double x : a) trace += fmt(x) + " ";
  return {monotone && reach >= 0 && reach <= 7 && contracting && secs < 60.0,
          "trace " + trace + "| floor " + fmt(floor_alpha) + ", within 0.02 at step " +
              std::to_string(reach) + ", resolvable ratios " + rs + "(exact-R ratios " +
              exact_ratios + "), " + fmt(secs) + " s"};
}

Outcome ac5(const fs::path& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const ThetaSpec theta = ThetaSpec::from_conditionals(0.9, 0.85);
  const auto at = find_threshold_alpha(theta, RConfig{}, 1);
  if (!at) return {false, "no threshold found"};
  const double alpha0 = at->alpha_t + 0.1;
  cli_or_throw({"--seed", "1", "--out", (out / "bistable").string(), "--set",
                "fixed_point.alpha0=" + cli::format_number(alpha0), "--set",
                "fixed_point.psi_grid=[0.5]", "fixed-point"});
  const double secs = seconds_since(t0);
  const double T = 60'000;
  const auto a = read_trace(out / "bistable" / "trace.csv").alpha;
  const auto kv = key_values(out / "bistable" / "fixed_point_summary.csv");
  const double upper = std::stod(kv.at("upper_alpha"));
  bool rising = a.size() >= 2;
  for (std::size_t k = 1; k < a.size(); ++k) rising = rising && a[k] >= a[k - 1] - 2 * sigma(a[k - 1], T);
  const double last = a.back();
  const bool toward = last > alpha0 && std::abs(last - upper) <= 0.02;
  return {rising && toward && kv.at("direction") == "increasing" && secs < 60.0,
          "alpha_T " + fmt(at->alpha_t) + ", alpha0 " + fmt(alpha0) + " -> " + fmt(last) +
              " (second fixed point " + fmt(upper) + "), " + fmt(secs) + " s"};
}

Outcome ac6() {
  const auto t0 = std::chrono::steady_clock::now();
  CorpusSpec spec;
  spec.n_docs = 30'000;
  spec.p_target = 0.95;
  spec.p_spurious = {0.9, 0.5};
  const auto s = generate_corpus(spec);
  Dataset all = s.train;
  for (const Dataset* d : {&s.dev, &s.test}) {
    all.documents.insert(all.documents.end(), d->documents.begin(), d->documents.end());
  }
  const CorpusStats st = corpus_stats(all);
  const double secs = seconds_since(t0);
  const double want[] = {0.95, 0.9, 0.5};
  double worst = 0.0;
  for (std::size_t a = 0; a < 3; ++a) {
    worst = std::max(worst, std::abs(st.p_label_given_sentiment.at(a) - want[a]));
  }
  const double delta_err =
      std::abs(st.delta_bits() - delta_info(ThetaSpec::from_conditionals(0.95, 0.9)));
  return {worst <= 0.02 && delta_err <= 0.03 && secs < 10.0,
          "conditionals " + fmt(st.p_label_given_sentiment[0]) + ", " +
              fmt(st.p_label_given_sentiment[1]) + ", " + fmt(st.p_label_given_sentiment[2]) +
              "; delta error " + fmt(delta_err) + " bits, " + fmt(secs) + " s"};
}

struct IcdaRun {
  double secs = 0.0;
  fs::path dir;
};

IcdaRun run_icda_cli(const fs::path& dir, const std::string& threads) {
  const auto t0 = std::chrono::steady_clock::now();
  cli_or_throw({"--seed", "1", "--threads", threads, "--out", dir.string(), "icda"});
  return {seconds_since(t0), dir};
}

Outcome ac7(const IcdaRun& run) {
  const auto summary = read_csv(run.dir / "summary.csv");
  std::map<std::string, double> median;
  const auto methods = summary.strings("method");
  const auto med = summary.numbers("median_precision");
  const auto n_runs = summary.numbers("n_runs");
  for (std::size_t i = 0; i < methods.size(); ++i) median[methods[i]] = med[i];
  int worst_iters = 0;
  for (int r = 0; r < 3; ++r) {
    const auto t = read_csv(run.dir / ("rep_" + std::to_string(r)) / "trace.csv");
    worst_iters = std::max(worst_iters, static_cast<int>(t.rows.size()) - 1);
  }
  const double mmi = median.at("MMI"), cda = median.at("CDA"), icda = median.at("ICDA");
  const bool ok = n_runs.at(0) == 3 && icda >= cda && cda >= mmi - 0.02 && icda - mmi >= 0.05 &&
                  worst_iters <= 5 && run.secs < 300.0;
  return {ok, "median MMI " + fmt(mmi) + ", CDA " + fmt(cda) + ", ICDA " + fmt(icda) +
                  ", max counterfactual iterations " + std::to_string(worst_iters) + ", " +
                  fmt(run.secs) + " s"};
}

Outcome ac8(const IcdaRun& run) {
  // The run itself audits every realized dataset and fails on any defect;
  // the written augmented sets are re-checked here against the train split.
  CorpusSpec spec;
  spec.seed = 1;
  const Dataset train = generate_corpus(spec).train;
  std::unordered_map<DocId, const Document*> by_id;
  for (const auto& d : train.documents) by_id[d.doc_id] = &d;
  std::size_t files = 0, cfs = 0, bad = 0, size_bad = 0;
  for (int r = 0; r < 3; ++r) {
    for (int k = 1;; ++k) {
      const fs::path f = run.dir / ("rep_" + std::to_string(r)) / ("iter_" + std::to_string(k)) /
                         "augmented_train.jsonl";
      if (!fs::exists(f)) break;
      ++files;
      const Dataset aug = read_dataset(f, Split::kTrain, nullptr);
      size_bad += aug.size() != train.size();
      for (const auto& d : aug.documents) {
        if (!d.is_counterfactual) continue;
        ++cfs;
        const auto it = d.source_doc_id ? by_id.find(*d.source_doc_id) : by_id.end();
        if (it == by_id.end()) {
          ++bad;
          continue;
        }
        const Document& src = *it->second;
        std::size_t changed = 0;
        const bool same_len = src.sentences.size() == d.sentences.size();
        for (std::size_t i = 0; same_len && i < d.sentences.size(); ++i) {
          changed += src.sentences[i].tokens != d.sentences[i].tokens;
        }
        bad += !(same_len && changed == 1 && d.label == 1 - src.label);
      }
    }
  }
  return {files > 0 && cfs > 0 && bad == 0 && size_bad == 0,
          std::to_string(files) + " augmented sets, " + std::to_string(cfs) +
              " counterfactuals, " + std::to_string(bad) + " malformed, " +
              std::to_string(size_bad) + " size mismatches"};
}

std::size_t compare_csv_trees(const fs::path& a, const fs::path& b, std::size_t& compared) {
  std::size_t diffs = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.path().extension() != ".csv") continue;
    const fs::path other = b / fs::relative(e.path(), a);
    ++compared;
    if (!fs::exists(other) || testing::read_file(e.path()) != testing::read_file(other)) {
      std::cerr << "differs: " << other << '\n';
      ++diffs;
    }
  }
  return diffs;
}

Outcome ac9(const fs::path& out, const IcdaRun& icda1) {
  const fs::path t4 = out / "threads4";
  (void)ac3(t4 / "verify", "4");
  (void)ac4(t4 / "fixed_point", "4");
  (void)run_icda_cli(t4 / "icda", "4");
  std::size_t compared = 0;
  std::size_t diffs = compare_csv_trees(out / "verify", t4 / "verify", compared);
  diffs += compare_csv_trees(out / "fixed_point", t4 / "fixed_point", compared);
  diffs += compare_csv_trees(icda1.dir, t4 / "icda", compared);
  return {compared > 0 && diffs == 0,
          std::to_string(compared) + " CSV files compared at 1 vs 4 threads, " +
              std::to_string(diffs) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "icda_acceptance";
  fs::remove_all(out);
  fs::create_directories(out);

  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << id << ". " << name << ": " << o.detail
              << std::endl;
  };

  IcdaRun icda1{0.0, out / "icda"};
  bool icda_ran = false;
  auto ensure_icda = [&] {
    if (!icda_ran) {
      icda1 = run_icda_cli(out / "icda", "1");
      icda_ran = true;
    }
  };

  report(1, "augmentation endpoint identities", ac1);
  report(2, "benefit curves ordered by beta", [&] { return ac2(out); });
  report(3, "Monte-Carlo R matches the exact binomial value",
         [&] { return ac3(out / "verify", "1"); });
  report(4, "fixed-point convergence from 0.27", [&] { return ac4(out / "fixed_point", "1"); });
  report(5, "bistability above the threshold", [&] { return ac5(out); });
  report(6, "corpus fidelity", ac6);
  report(7, "end-to-end ICDA", [&] {
    ensure_icda();
    return ac7(icda1);
  });
  report(8, "counterfactual structural audit", [&] {
    ensure_icda();
    return ac8(icda1);
  });
  report(9, "determinism across thread counts", [&] {
    ensure_icda();
    return ac9(out, icda1);
  });
  return failures == 0 ? 0 : 1;
}
