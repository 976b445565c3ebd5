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

// Operators of the binary iterative-CDA model.
//
//   augment_conditionals  (theta, alpha, beta) -> augmented P(Y|Xi)
//   operator_j            (theta, alpha)       -> augmented information gap
//   operator_r            (theta_eff, n)       -> selection error (Monte Carlo)
//   psi_step              alpha_k              -> alpha_{k+1} = R(J(alpha_k))
//
// alpha is the probability that the selector edits the spurious signal X2
// instead of the target X1; beta is the probability that the inserted text
// carries the target aspect. Inside the iteration beta = 1 - alpha.

#ifndef ICDA_OPERATORS_HPP_
#define ICDA_OPERATORS_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "icda/probmodel.hpp"

namespace icda {

struct AugmentedConditionals {
  double p_ya_given_x1a = 0.5;
  double p_ya_given_x2a = 0.5;

  ThetaSpec as_theta() const {
    return ThetaSpec::from_conditionals(p_ya_given_x1a, p_ya_given_x2a);
  }
};

struct ErrorRates {
  double alpha = 0.0;
  double beta = 1.0;

  static ErrorRates coupled(double alpha) { return {alpha, 1.0 - alpha}; }
  void validate() const;
};

struct RConfig {
  int n = 35;
  std::uint64_t trials = 60'000;
  // Trial-count multiplier used by find_threshold_alpha.
  std::uint64_t threshold_trial_multiplier = 10;

  void validate() const;
};

struct SelectionEstimate {
  double alpha = 0.0;   // fraction of trials that picked X2
  double std_error = 0.0;  // binomial standard error of that fraction
  std::uint64_t picks_x2 = 0;
  std::uint64_t trials = 0;
};

struct IterationStep {
  int k = 0;
  double alpha = 0.0;
  double delta_a = 0.0;  // gap of the augmented data built with this alpha
  AugmentedConditionals aug;
};

struct IterationTrace {
  std::vector<IterationStep> steps;
  bool converged = false;
  // R evaluated with the spurious signal removed: the floor of the iteration.
  double limit_alpha = 0.0;
};

struct ThresholdResult {
  double alpha_t = 0.0;
  double bracket_width = 0.0;
};

struct PsiResult {
  double alpha_next = 0.0;
  double std_error = 0.0;
  double delta_a = 0.0;
  AugmentedConditionals aug;
};

AugmentedConditionals augment_conditionals(const ThetaSpec& theta,
                                           const ErrorRates& err);

// Success criterion of one CDA round: (I(X2;Y) - I(X2a;Ya)) -
// (I(X1;Y) - I(X1a;Ya)). Positive means the spurious signal lost more
// information than the target.
double cda_benefit(const ThetaSpec& theta, const ErrorRates& err);

double operator_j(const ThetaSpec& theta, double alpha);

SelectionEstimate operator_r(const ThetaSpec& theta_eff, const RConfig& cfg,
                             std::uint64_t seed);

PsiResult psi_step(const ThetaSpec& theta, double alpha_k, const RConfig& cfg,
                   std::uint64_t seed);

// Iterates psi from alpha0 until consecutive values differ by less than eps
// or max_iters steps were taken. Step k draws from derive_seed(seed, k).
IterationTrace run_fixed_point(const ThetaSpec& theta, double alpha0,
                               const RConfig& cfg, int max_iters, double eps,
                               std::uint64_t seed);

// Selection error with no spurious information left, R at (p1, 1/2).
SelectionEstimate lower_fixed_point(const ThetaSpec& theta, const RConfig& cfg,
                                    std::uint64_t seed);

// Selection error with no target information left, R at (1/2, p2).
SelectionEstimate upper_fixed_point(const ThetaSpec& theta, const RConfig& cfg,
                                    std::uint64_t seed);

// Smallest alpha above the lower fixed point where psi crosses the identity
// from below. psi is evaluated with trials * threshold_trial_multiplier and a
// shared seed, which makes the estimate monotone in alpha. Returns nullopt
// when psi stays below the identity over the whole search interval.
std::optional<ThresholdResult> find_threshold_alpha(const ThetaSpec& theta,
                                                    const RConfig& cfg,
                                                    std::uint64_t seed);

struct BenefitTable {
  std::vector<double> alphas;
  std::vector<double> betas;
  std::vector<double> values;  // row-major: one row per beta

  double at(std::size_t beta_index, std::size_t alpha_index) const {
    return values[beta_index * alphas.size() + alpha_index];
  }
};

BenefitTable beta_sweep(const ThetaSpec& theta,
                        const std::vector<double>& alphas,
                        const std::vector<double>& betas);

// Largest alpha in [0, 1] with non-negative benefit, found by bisection on
// the closed form (benefit is decreasing in alpha). 0 when the benefit is
// negative everywhere, 1 when it is non-negative everywhere.
double benefit_break_even_alpha(const ThetaSpec& theta, double beta);

std::vector<double> linspace(double lo, double hi, std::size_t count);

}  // namespace icda

#endif  // ICDA_OPERATORS_HPP_
