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

#include "icda/selection_kernel.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "icda/rng.hpp"

namespace icda {
namespace {

// Under a symmetric channel only the agreement bit of each Xi with Y matters,
// so an observation is two Bernoulli draws. The tie coin is always drawn to
// keep stream positions independent of the probabilities.
inline bool trial_picks_x2(const SelectionProblem& pr, std::uint64_t t) {
  Rng rng = Rng::stream(pr.seed, t);
  int agree1 = 0;
  int agree2 = 0;
  for (int j = 0; j < pr.n; ++j) {
    agree1 += rng.uniform() < pr.p_agree_x1;
    agree2 += rng.uniform() < pr.p_agree_x2;
  }
  const bool coin = rng.uniform() < 0.5;
  if (agree2 != agree1) return agree2 > agree1;
  return coin;
}

void check(const SelectionProblem& pr) {
  if (pr.n < 1) throw std::invalid_argument("selection kernel: n must be >= 1");
  if (pr.trials < 1) {
    throw std::invalid_argument("selection kernel: trials must be >= 1");
  }
  for (double p : {pr.p_agree_x1, pr.p_agree_x2}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument(
          "selection kernel: agreement probability outside [0, 1]");
    }
  }
}

}  // namespace

std::uint64_t count_x2_selections_serial(const SelectionProblem& problem) {
  check(problem);
  std::uint64_t count = 0;
  for (std::uint64_t t = 0; t < problem.trials; ++t) {
    count += trial_picks_x2(problem, t);
  }
  return count;
}

std::uint64_t count_x2_selections_parallel(const SelectionProblem& problem) {
  check(problem);
  const auto trials = static_cast<std::int64_t>(problem.trials);
  std::uint64_t count = 0;
#pragma omp parallel for reduction(+ : count) schedule(static)
  for (std::int64_t t = 0; t < trials; ++t) {
    count += trial_picks_x2(problem, static_cast<std::uint64_t>(t));
  }
  return count;
}

std::vector<double> binomial_pmf(int n, double p) {
  if (n < 0) throw std::invalid_argument("binomial_pmf: n must be >= 0");
  std::vector<double> pmf(static_cast<std::size_t>(n) + 1, 0.0);
  if (p <= 0.0) {
    pmf.front() = 1.0;
    return pmf;
  }
  if (p >= 1.0) {
    pmf.back() = 1.0;
    return pmf;
  }
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  const double lgn = std::lgamma(n + 1.0);
  for (int k = 0; k <= n; ++k) {
    pmf[k] = std::exp(lgn - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                      k * lp + (n - k) * lq);
  }
  return pmf;
}

double exact_selection_error(double p_agree_x1, double p_agree_x2, int n) {
  if (n < 1) throw std::invalid_argument("exact_selection_error: n must be >= 1");
  const auto a1 = binomial_pmf(n, p_agree_x1);
  const auto a2 = binomial_pmf(n, p_agree_x2);
  // cdf1[k] = P(A1 < k)
  double below = 0.0;
  double wins = 0.0;
  double ties = 0.0;
  for (int k = 0; k <= n; ++k) {
    wins += a2[k] * below;
    ties += a2[k] * a1[k];
    below += a1[k];
  }
  return wins + 0.5 * ties;
}

}  // namespace icda
