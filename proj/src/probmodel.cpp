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

#include "icda/probmodel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace icda {

double checked_probability(double p, const char* what) {
  if (!(p >= -kProbabilityTolerance && p <= 1.0 + kProbabilityTolerance)) {
    throw std::invalid_argument(std::string(what) + " must be in [0, 1], got " +
                                std::to_string(p));
  }
  return std::clamp(p, 0.0, 1.0);
}

ThetaSpec ThetaSpec::from_conditionals(double p_y_given_x1,
                                       double p_y_given_x2) {
  ThetaSpec theta;
  theta.p_y_given_x1 = checked_probability(p_y_given_x1, "p_y_given_x1");
  theta.p_y_given_x2 = checked_probability(p_y_given_x2, "p_y_given_x2");
  return theta;
}

void ThetaSpec::validate() const {
  checked_probability(p_y_given_x1, "p_y_given_x1");
  checked_probability(p_y_given_x2, "p_y_given_x2");
  for (double m : {p_y, p_x1, p_x2}) {
    if (std::abs(m - 0.5) > kProbabilityTolerance) {
      throw std::invalid_argument("marginals must equal 1/2");
    }
  }
}

ThetaSpec ThetaSpec::swapped() const {
  ThetaSpec out = *this;
  std::swap(out.p_y_given_x1, out.p_y_given_x2);
  return out;
}

double BinaryJoint::marginal_y(bool y) const {
  double sum = 0.0;
  for (bool x1 : {false, true}) {
    for (bool x2 : {false, true}) sum += (*this)(x1, x2, y);
  }
  return sum;
}

double BinaryJoint::conditional_agreement(int which) const {
  double agree = 0.0;
  double mass_x_is_one = 0.0;
  for (bool x1 : {false, true}) {
    for (bool x2 : {false, true}) {
      for (bool y : {false, true}) {
        const bool x = which == 1 ? x1 : x2;
        const double p = (*this)(x1, x2, y);
        if (x) {
          mass_x_is_one += p;
          if (y) agree += p;
        }
      }
    }
  }
  return mass_x_is_one > 0.0 ? agree / mass_x_is_one : 0.5;
}

double binary_entropy(double p) {
  p = checked_probability(p, "p");
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
  return h;
}

double mutual_information_symmetric(double p_y_given_x) {
  return 1.0 - binary_entropy(p_y_given_x);
}

BinaryJoint make_joint(const ThetaSpec& theta) {
  theta.validate();
  const double a1 = std::clamp(theta.p_y_given_x1, 0.0, 1.0);
  const double a2 = std::clamp(theta.p_y_given_x2, 0.0, 1.0);
  BinaryJoint joint;
  for (bool x1 : {false, true}) {
    for (bool x2 : {false, true}) {
      for (bool y : {false, true}) {
        const double c1 = (x1 == y) ? a1 : 1.0 - a1;
        const double c2 = (x2 == y) ? a2 : 1.0 - a2;
        joint.table_[BinaryJoint::cell(x1, x2, y)] = 0.5 * c1 * c2;
      }
    }
  }
  return joint;
}

double delta_info(const ThetaSpec& theta) {
  theta.validate();
  return mutual_information_symmetric(theta.p_y_given_x1) -
         mutual_information_symmetric(theta.p_y_given_x2);
}

std::vector<Observation> sample_observations(const BinaryJoint& joint,
                                             std::size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("sample_observations: n must be >= 1");
  // Inverse-CDF over the 8 cells.
  std::array<double, 8> cdf{};
  double acc = 0.0;
  for (std::size_t c = 0; c < 8; ++c) {
    acc += joint.table()[c];
    cdf[c] = acc;
  }
  std::vector<Observation> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    auto c = static_cast<std::size_t>(it - cdf.begin());
    // Rounding can push u onto the total mass; fall back to the last
    // cell that carries probability.
    if (c >= 8) c = 7;
    while (c > 0 && joint.table()[c] == 0.0) --c;
    out.push_back({(c & 4U) != 0, (c & 2U) != 0, (c & 1U) != 0});
  }
  return out;
}

}  // namespace icda
