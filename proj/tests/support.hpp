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


// Independent reference computations for tests. Nothing here calls into the
// library's numerical code.

#ifndef ICDA_TESTS_SUPPORT_HPP_
#define ICDA_TESTS_SUPPORT_HPP_

#include <filesystem>
#include <string>
#include <utility>

namespace icda::testing {

// I(X;Y) in bits by summing p(x,y) log p(x,y)/(p(x)p(y)) over the four cells
// of a symmetric channel with uniform inputs.
double brute_force_mi(double p_y_given_x);

// Conditionals after augmentation with error rates (alpha, beta): the mixing
// weight is w = alpha/2 + 1/2 - beta/2.
std::pair<double, double> reference_augmented(double p1, double p2, double alpha,
                                              double beta);

// Benefit of augmentation: change of I(X1;Y) - I(X2;Y).
double reference_benefit(double p1, double p2, double alpha, double beta);

// P(count2 > count1) + P(tie)/2 for independent Binomial(n, p1), Binomial(n, p2)
// using long double pmfs from log-gamma.
double reference_selection_error(double p1, double p2, int n);

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

std::string read_file(const std::filesystem::path& path);

}  // namespace icda::testing

#endif  // ICDA_TESTS_SUPPORT_HPP_
