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


#include "support.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace icda::testing {

double brute_force_mi(double p) {
  double mi = 0.0;
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      const double pxy = 0.5 * (x == y ? p : 1.0 - p);
      if (pxy > 0.0) mi += pxy * std::log2(pxy / 0.25);
    }
  }
  return mi;
}

std::pair<double, double> reference_augmented(double p1, double p2, double alpha,
                                              double beta) {
  const double w = alpha / 2 + 0.5 - beta / 2;
  return {(1 - w) * p1 + w * 0.5, w * p2 + (1 - w) * 0.5};
}

double reference_benefit(double p1, double p2, double alpha, double beta) {
  const auto [a1, a2] = reference_augmented(p1, p2, alpha, beta);
  return (brute_force_mi(a1) - brute_force_mi(a2)) - (brute_force_mi(p1) - brute_force_mi(p2));
}

double reference_selection_error(double p1, double p2, int n) {
  auto pmf = [n](double p) {
    std::vector<long double> out(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
      if (p == 0.0 || p == 1.0) {
        out[k] = (p == 0.0 ? k == 0 : k == n) ? 1.0L : 0.0L;
        continue;
      }
      const long double lg = std::lgamma(n + 1.0L) - std::lgamma(k + 1.0L) -
                             std::lgamma(n - k + 1.0L);
      out[k] = std::exp(lg + k * std::log((long double)p) +
                        (n - k) * std::log1p(-(long double)p));
    }
    return out;
  };
  const auto a = pmf(p1);
  const auto b = pmf(p2);
  long double s = 0.0L;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      if (j > i) s += a[i] * b[j];
      if (j == i) s += 0.5L * a[i] * b[j];
    }
  }
  return static_cast<double>(s);
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("icda_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace icda::testing
