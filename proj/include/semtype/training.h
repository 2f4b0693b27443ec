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

#ifndef SEMTYPE_TRAINING_H_
#define SEMTYPE_TRAINING_H_

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "semtype/encoder.h"
#include "semtype/formatting.h"

namespace semtype {

using Rng = std::mt19937_64;

// Uniform integer in [0, n) by rejection, independent of the standard
// library's distribution implementation.
uint64_t UniformIndex(Rng &rng, uint64_t n);

// Optimizer constants shared by all runs: AdamW with these moments and
// epsilon, no weight decay.
inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-6;

struct TrainingConfig {
  double margin = 0.1;
  double learning_rate = 5e-6;
  int batch_size = 64;
  int epochs = 100;
  double warmup_ratio = 0.1;
  double gradient_clip_norm = 1.0;
  int64_t seed = 0;
  // Missing task ids default to a factor of 1.
  std::map<std::string, int> upsampling_factors;

  // Throws ValidationError when a field is out of range.
  void Validate() const;
};

// Parses "key = value" lines ('#' starts a comment). Keys are exactly the
// TrainingConfig field names; upsampling_factors takes "task:factor,...".
TrainingConfig ParseTrainingConfig(const std::string &text);
std::string FormatTrainingConfig(const TrainingConfig &config);

struct TrainingTriple {
  FormattedInput input;
  std::string positive_label;
  std::string negative_label;
  std::string task_id;
  std::string instance_id;
};

// A uniform draw from candidates \ positives. Throws ValidationError when
// the complement is empty.
std::string SampleNegative(std::span<const std::string> candidates,
                           const std::set<std::string> &positives, Rng &rng);

// max(sim_neg - sim_pos + margin, 0). Throws ValidationError for a
// negative margin or similarities outside [-1, 1].
double MarginLoss(double sim_pos, double sim_neg, double margin);

struct MarginLossGradient {
  double loss = 0;
  double d_sim_pos = 0;
  double d_sim_neg = 0;
};

// Loss with its subgradient; the kink sim_pos - sim_neg == margin gets 0.
MarginLossGradient MarginLossWithGradient(double sim_pos, double sim_neg,
                                          double margin);

struct TaskData {
  std::string task_id;
  std::vector<TypingInstance> instances;
  std::vector<std::string> labels;
};

struct MixedItem {
  size_t dataset = 0;
  size_t instance = 0;
};

// One epoch of (dataset, instance) references: each instance repeated by
// its task's factor, uniformly shuffled.
std::vector<MixedItem> MixDatasets(std::span<const TaskData> datasets,
                                   const std::map<std::string, int> &factors,
                                   Rng &rng);

// Expands an epoch stream into one triple per (instance, positive label),
// each with a freshly sampled negative.
std::vector<TrainingTriple> BuildTriples(std::span<const MixedItem> stream,
                                         std::span<const TaskData> datasets,
                                         bool include_description, Rng &rng);

struct StepResult {
  double loss = 0;
  double grad_norm = 0;
  double learning_rate = 0;
};

// Single writer over the encoder parameters. Holds the AdamW state and the
// linear warmup/decay schedule.
class Trainer {
 public:
  Trainer(Encoder *encoder, TrainingConfig config, int64_t total_steps);

  // Mean margin loss over the batch, then one clipped optimizer step.
  // Returns the pre-clip gradient norm. Throws RuntimeFailure naming the
  // triple when a loss is non-finite.
  StepResult Step(std::span<const TrainingTriple> batch);

  // Batch loss and its gradient with respect to every encoder parameter,
  // without updating anything.
  double LossAndGradient(std::span<const TrainingTriple> batch,
                         std::vector<double> *gradient) const;

  double LearningRateAt(int64_t step) const;
  int64_t steps_taken() const { return step_; }
  const TrainingConfig &config() const { return config_; }

 private:
  Encoder *encoder_;
  TrainingConfig config_;
  int64_t total_steps_;
  int64_t warmup_steps_;
  int64_t step_ = 0;
  std::vector<double> first_moment_;
  std::vector<double> second_moment_;
};

struct StepRecord {
  int64_t step = 0;
  int epoch = 0;
  std::string task;
  double loss = 0;
  double grad_norm = 0;
  double learning_rate = 0;
};

struct TrainOptions {
  bool include_description = true;
  // Higher is better. Evaluated every `dev_every_epochs` epochs.
  std::function<double(const Encoder &)> dev_metric;
  int dev_every_epochs = 1;
  // Called with the encoder whenever a new best dev score is reached, or
  // after every epoch when there is no dev metric.
  std::function<void(const Encoder &, int epoch)> persist;
  std::function<void(const StepRecord &)> on_step;
};

struct TrainResult {
  std::vector<double> epoch_losses;
  std::vector<double> dev_history;
  double best_dev = 0;
  int best_epoch = -1;
  int64_t steps = 0;
};

// Number of optimizer steps TrainLoop will take.
int64_t CountTrainingSteps(std::span<const TaskData> datasets,
                           const TrainingConfig &config);

// Multi-task training over all datasets; a single dataset is the
// single-task case. Epochs = 0 leaves the encoder untouched.
TrainResult TrainLoop(Encoder *encoder, std::span<const TaskData> datasets,
                      const TrainingConfig &config, const TrainOptions &options);

}  // namespace semtype

#endif  // SEMTYPE_TRAINING_H_
