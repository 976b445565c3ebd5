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

// Monte-Carlo kernel behind the selection-error operator.
//
// One trial draws n observations of (X1, X2, Y), counts how often each Xi
// agrees with Y, and picks the variable with more agreements (fair coin on
// ties). The kernel returns how many trials picked X2.
//
// Trial t consumes its own stream Rng::stream(seed, t), and every trial draws
// the same number of variates whatever the probabilities are. Consequences:
//   * any partition of trials across threads gives the same count;
//   * calls that share a seed use common random numbers, so the count is
//     monotone in (p_agree_x1, p_agree_x2).

#ifndef ICDA_SELECTION_KERNEL_HPP_
#define ICDA_SELECTION_KERNEL_HPP_

#include <cstdint>
#include <vector>

namespace icda {

struct SelectionProblem {
  double p_agree_x1 = 0.5;
  double p_agree_x2 = 0.5;
  int n = 1;
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
};

// Reference implementation; single loop, no threading.
std::uint64_t count_x2_selections_serial(const SelectionProblem& problem);

// OpenMP version. Must return exactly the serial count.
std::uint64_t count_x2_selections_parallel(const SelectionProblem& problem);

// Binomial(n, p) probability mass function, entries 0..n.
std::vector<double> binomial_pmf(int n, double p);

// Exact P(A2 > A1) + P(A2 == A1) / 2 with Ai ~ Binomial(n, p_agree_xi)
// independent: the expectation the kernel estimates.
double exact_selection_error(double p_agree_x1, double p_agree_x2, int n);

}  // namespace icda

#endif  // ICDA_SELECTION_KERNEL_HPP_
