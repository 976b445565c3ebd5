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

// Binary model of a target signal X1, a spurious signal X2 and a label Y.
// Y, X1 and X2 have uniform marginals; each Xi is a symmetric channel of Y
// and X1, X2 are conditionally independent given Y. All information
// quantities are in bits.

#ifndef ICDA_PROBMODEL_HPP_
#define ICDA_PROBMODEL_HPP_

#include <array>
#include <cstddef>
#include <vector>

#include "icda/rng.hpp"

namespace icda {

// Tolerance used when validating probabilities read from decimal literals.
inline constexpr double kProbabilityTolerance = 1e-9;

// Throws std::invalid_argument if p is outside [0, 1] (with tolerance) and
// returns p clamped into [0, 1].
double checked_probability(double p, const char* what);

struct ThetaSpec {
  double p_y_given_x1 = 0.5;
  double p_y_given_x2 = 0.5;
  double p_y = 0.5;
  double p_x1 = 0.5;
  double p_x2 = 0.5;

  // Builds a validated spec with uniform marginals.
  static ThetaSpec from_conditionals(double p_y_given_x1, double p_y_given_x2);

  // Throws std::invalid_argument on out-of-range fields or non-uniform
  // marginals.
  void validate() const;

  ThetaSpec swapped() const;
};

struct Observation {
  bool x1 = false;
  bool x2 = false;
  bool y = false;
};

// P(x1, x2, y), indexed by cell(x1, x2, y).
class BinaryJoint {
 public:
  static constexpr std::size_t cell(bool x1, bool x2, bool y) {
    return (static_cast<std::size_t>(x1) << 2) |
           (static_cast<std::size_t>(x2) << 1) | static_cast<std::size_t>(y);
  }

  double operator()(bool x1, bool x2, bool y) const {
    return table_[cell(x1, x2, y)];
  }
  const std::array<double, 8>& table() const { return table_; }

  double marginal_y(bool y) const;

  // P(Y = b | Xi = b) for i in {1, 2}, recovered by Bayes inversion.
  double conditional_agreement(int which) const;

 private:
  friend BinaryJoint make_joint(const ThetaSpec& theta);
  std::array<double, 8> table_{};
};

double binary_entropy(double p);

// I(X; Y) for a symmetric binary channel with uniform input.
double mutual_information_symmetric(double p_y_given_x);

BinaryJoint make_joint(const ThetaSpec& theta);

// I(X1; Y) - I(X2; Y).
double delta_info(const ThetaSpec& theta);

std::vector<Observation> sample_observations(const BinaryJoint& joint,
                                             std::size_t n, Rng& rng);

}  // namespace icda

#endif  // ICDA_PROBMODEL_HPP_
