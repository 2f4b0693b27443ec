// Copyright 2026 The semtype Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Independent reference implementations used to check the library. They
// are written for clarity, not speed, and share no code with src/.

#ifndef SEMTYPE_TESTS_ORACLES_H_
#define SEMTYPE_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

namespace semtype {
namespace testing {

// Full sort by (-cosine, label), then the first k labels.
inline std::vector<std::string> BruteForceTopK(const Eigen::VectorXd &query,
                                               const Eigen::MatrixXd &rows,
                                               const std::vector<std::string> &labels,
                                               int k) {
  std::vector<std::tuple<double, std::string>> all;
  for (int i = 0; i < rows.rows(); ++i) {
    double dot = 0, qq = 0, rr = 0;
    for (int j = 0; j < rows.cols(); ++j) {
      dot += query[j] * rows(i, j);
      qq += query[j] * query[j];
      rr += rows(i, j) * rows(i, j);
    }
    all.emplace_back(-(dot / (std::sqrt(qq) * std::sqrt(rr))), labels[i]);
  }
  std::sort(all.begin(), all.end());
  std::vector<std::string> out;
  for (int i = 0; i < k; ++i) out.push_back(std::get<1>(all[i]));
  return out;
}

struct MicroOracle {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

// Counts true positives, system relations and gold relations directly.
inline MicroOracle CountMicro(const std::vector<std::string> &gold,
                              const std::vector<std::string> &pred,
                              const std::string &abstain) {
  int tp = 0, system = 0, key = 0;
  for (size_t i = 0; i < gold.size(); ++i) {
    if (pred[i] != abstain) ++system;
    if (gold[i] != abstain) ++key;
    if (pred[i] != abstain && gold[i] != abstain && pred[i] == gold[i]) ++tp;
  }
  MicroOracle out;
  if (system == 0 && key == 0) {
    out.precision = out.recall = out.f1 = 1;
    return out;
  }
  out.precision = system == 0 ? 0.0 : static_cast<double>(tp) / system;
  out.recall = key == 0 ? 0.0 : static_cast<double>(tp) / key;
  out.f1 = out.precision + out.recall == 0
               ? 0.0
               : 2 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

}  // namespace testing
}  // namespace semtype

#endif  // SEMTYPE_TESTS_ORACLES_H_
