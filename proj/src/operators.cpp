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

#include "icda/operators.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "icda/selection_kernel.hpp"

namespace icda {

void ErrorRates::validate() const {
  checked_probability(alpha, "alpha");
  checked_probability(beta, "beta");
}

void RConfig::validate() const {
  if (n < 1) throw std::invalid_argument("RConfig: n must be >= 1");
  if (trials < 1) throw std::invalid_argument("RConfig: trials must be >= 1");
  if (threshold_trial_multiplier < 1) {
    throw std::invalid_argument(
        "RConfig: threshold_trial_multiplier must be >= 1");
  }
}

AugmentedConditionals augment_conditionals(const ThetaSpec& theta,
                                           const ErrorRates& err) {
  theta.validate();
  err.validate();
  // Weight on the marginal P(Y) for X1; X2 gets the complementary pair.
  const double w_marginal = err.alpha / 2 + 0.5 - err.beta / 2;
  const double w_conditional = -err.alpha / 2 + 0.5 + err.beta / 2;
  AugmentedConditionals out;
  out.p_ya_given_x1a =
      w_marginal * theta.p_y + w_conditional * theta.p_y_given_x1;
  out.p_ya_given_x2a =
      w_conditional * theta.p_y + w_marginal * theta.p_y_given_x2;
  return out;
}

double cda_benefit(const ThetaSpec& theta, const ErrorRates& err) {
  const AugmentedConditionals aug = augment_conditionals(theta, err);
  const double loss_x1 = mutual_information_symmetric(theta.p_y_given_x1) -
                         mutual_information_symmetric(aug.p_ya_given_x1a);
  const double loss_x2 = mutual_information_symmetric(theta.p_y_given_x2) -
                         mutual_information_symmetric(aug.p_ya_given_x2a);
  return loss_x2 - loss_x1;
}

double operator_j(const ThetaSpec& theta, double alpha) {
  const AugmentedConditionals aug =
      augment_conditionals(theta, ErrorRates::coupled(alpha));
  return mutual_information_symmetric(aug.p_ya_given_x1a) -
         mutual_information_symmetric(aug.p_ya_given_x2a);
}

SelectionEstimate operator_r(const ThetaSpec& theta_eff, const RConfig& cfg,
                             std::uint64_t seed) {
  cfg.validate();
  for (double p : {theta_eff.p_y_given_x1, theta_eff.p_y_given_x2}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument(
          "operator_r: effective conditional outside [0, 1]");
    }
  }
  SelectionProblem problem;
  problem.p_agree_x1 = theta_eff.p_y_given_x1;
  problem.p_agree_x2 = theta_eff.p_y_given_x2;
  problem.n = cfg.n;
  problem.trials = cfg.trials;
  problem.seed = seed;

  SelectionEstimate est;
  est.picks_x2 = count_x2_selections_parallel(problem);
  est.trials = cfg.trials;
  est.alpha = static_cast<double>(est.picks_x2) / static_cast<double>(cfg.trials);
  est.std_error =
      std::sqrt(est.alpha * (1.0 - est.alpha) / static_cast<double>(cfg.trials));
  return est;
}

PsiResult psi_step(const ThetaSpec& theta, double alpha_k, const RConfig& cfg,
                   std::uint64_t seed) {
  PsiResult out;
  out.aug = augment_conditionals(theta, ErrorRates::coupled(alpha_k));
  out.delta_a = mutual_information_symmetric(out.aug.p_ya_given_x1a) -
                mutual_information_symmetric(out.aug.p_ya_given_x2a);
  const SelectionEstimate r = operator_r(out.aug.as_theta(), cfg, seed);
  out.alpha_next = r.alpha;
  out.std_error = r.std_error;
  return out;
}

SelectionEstimate lower_fixed_point(const ThetaSpec& theta, const RConfig& cfg,
                                    std::uint64_t seed) {
  return operator_r(ThetaSpec::from_conditionals(theta.p_y_given_x1, theta.p_y),
                    cfg, seed);
}

SelectionEstimate upper_fixed_point(const ThetaSpec& theta, const RConfig& cfg,
                                    std::uint64_t seed) {
  return operator_r(ThetaSpec::from_conditionals(theta.p_y, theta.p_y_given_x2),
                    cfg, seed);
}

IterationTrace run_fixed_point(const ThetaSpec& theta, double alpha0,
                               const RConfig& cfg, int max_iters, double eps,
                               std::uint64_t seed) {
  checked_probability(alpha0, "alpha0");
  if (max_iters < 1) {
    throw std::invalid_argument("run_fixed_point: max_iters must be >= 1");
  }
  IterationTrace trace;
  trace.limit_alpha =
      lower_fixed_point(theta, cfg, derive_seed(seed, ~std::uint64_t{0})).alpha;

  double alpha = alpha0;
  for (int k = 0; k < max_iters; ++k) {
    const PsiResult step =
        psi_step(theta, alpha, cfg, derive_seed(seed, static_cast<std::uint64_t>(k)));
    trace.steps.push_back({k, alpha, step.delta_a, step.aug});
    const bool settled = std::abs(step.alpha_next - alpha) < eps;
    alpha = step.alpha_next;
    if (settled) {
      trace.converged = true;
      break;
    }
  }
  // The value the last step produced is part of the trace as well.
  const AugmentedConditionals aug =
      augment_conditionals(theta, ErrorRates::coupled(alpha));
  trace.steps.push_back({static_cast<int>(trace.steps.size()), alpha,
                         operator_j(theta, alpha), aug});
  return trace;
}

std::optional<ThresholdResult> find_threshold_alpha(const ThetaSpec& theta,
                                                    const RConfig& cfg,
                                                    std::uint64_t seed) {
  cfg.validate();
  RConfig smooth = cfg;
  smooth.trials = cfg.trials * cfg.threshold_trial_multiplier;
  const std::uint64_t psi_seed = derive_seed(seed, 1);
  auto gap = [&](double alpha) {
    return psi_step(theta, alpha, smooth, psi_seed).alpha_next - alpha;
  };

  const double floor_alpha = lower_fixed_point(theta, cfg, derive_seed(seed, 0)).alpha;
  constexpr int kGrid = 50;
  constexpr double kWidth = 1e-3;
  constexpr int kMaxBisections = 40;

  double lo = std::numeric_limits<double>::quiet_NaN();
  double hi = lo;
  bool seen_below = false;
  for (int i = 1; i <= kGrid; ++i) {
    const double a = floor_alpha + (1.0 - floor_alpha) * i / kGrid;
    const double g = gap(a);
    if (g < 0.0) {
      seen_below = true;
      lo = a;
    } else if (seen_below && g > 0.0) {
      hi = a;
      break;
    }
  }
  if (std::isnan(hi)) return std::nullopt;

  for (int it = 0; it < kMaxBisections && hi - lo > kWidth; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double g = gap(mid);
    if (g < 0.0) {
      lo = mid;
    } else if (g > 0.0) {
      hi = mid;
    } else {
      lo = hi = mid;
      break;
    }
  }
  ThresholdResult result;
  result.alpha_t = 0.5 * (lo + hi);
  result.bracket_width = std::max(hi - lo, std::numeric_limits<double>::min());
  return result;
}

BenefitTable beta_sweep(const ThetaSpec& theta,
                        const std::vector<double>& alphas,
                        const std::vector<double>& betas) {
  BenefitTable table;
  table.alphas = alphas;
  table.betas = betas;
  table.values.reserve(alphas.size() * betas.size());
  for (double beta : betas) {
    for (double alpha : alphas) {
      table.values.push_back(cda_benefit(theta, {alpha, beta}));
    }
  }
  return table;
}

double benefit_break_even_alpha(const ThetaSpec& theta, double beta) {
  auto benefit = [&](double alpha) { return cda_benefit(theta, {alpha, beta}); };
  if (benefit(0.0) < 0.0) return 0.0;
  if (benefit(1.0) >= 0.0) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 100 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    (benefit(mid) >= 0.0 ? lo : hi) = mid;
  }
  return lo;
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> out;
  if (count == 0) return out;
  if (count == 1) return {lo};
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(i + 1 == count
                      ? hi
                      : lo + (hi - lo) * static_cast<double>(i) /
                                 static_cast<double>(count - 1));
  }
  return out;
}

}  // namespace icda
