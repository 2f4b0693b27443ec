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

// Central finite differences over every encoder parameter.

#ifndef SEMTYPE_TESTS_GRADIENT_CHECK_H_
#define SEMTYPE_TESTS_GRADIENT_CHECK_H_

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "semtype/encoder.h"
#include "semtype/training.h"

namespace semtype {
namespace testing {

struct GradientComparison {
  std::vector<double> analytic;
  std::vector<double> numeric;
  double loss = 0;

  // ||analytic - numeric|| / max(||analytic||, ||numeric||); 0 when both
  // vanish.
  double RelativeError() const {
    double diff = 0, a = 0, n = 0;
    for (size_t i = 0; i < analytic.size(); ++i) {
      diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
      a += analytic[i] * analytic[i];
      n += numeric[i] * numeric[i];
    }
    const double scale = std::sqrt(std::max(a, n));
    return scale < 1e-300 ? 0.0 : std::sqrt(diff) / scale;
  }
};

inline GradientComparison CompareGradients(Encoder *encoder, const Trainer &trainer,
                                           std::span<const TrainingTriple> batch,
                                           double h = 1e-6) {
  GradientComparison out;
  out.loss = trainer.LossAndGradient(batch, &out.analytic);
  std::span<double> params = encoder->parameter_values();
  out.numeric.resize(params.size());
  for (size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double plus = trainer.LossAndGradient(batch, nullptr);
    params[i] = saved - h;
    const double minus = trainer.LossAndGradient(batch, nullptr);
    params[i] = saved;
    out.numeric[i] = (plus - minus) / (2 * h);
  }
  return out;
}

}  // namespace testing
}  // namespace semtype

#endif  // SEMTYPE_TESTS_GRADIENT_CHECK_H_
