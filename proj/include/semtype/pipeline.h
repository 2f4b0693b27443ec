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

#ifndef SEMTYPE_PIPELINE_H_
#define SEMTYPE_PIPELINE_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "semtype/dataset.h"
#include "semtype/encoder.h"
#include "semtype/evaluation.h"
#include "semtype/inference.h"
#include "semtype/training.h"

namespace semtype {

struct Selection {
  enum class Kind { kTopK, kThreshold };
  Kind kind = Kind::kTopK;
  int k = 1;
};

// "threshold", "top1" or "topk:K".
Selection ParseSelection(const std::string &text);

struct DatasetSpec {
  std::string task_id;
  TaskKind task_kind = TaskKind::kLexicalEntity;
  std::string instances_path;
  std::string labels_path;
  std::optional<std::string> dev_path;
  std::optional<std::string> test_path;
  Selection selection;
  int upsampling = 1;
  // Label excluded from micro scores, e.g. "no_relation". Empty: none.
  std::string abstain_label;
  // Defaults to macro for threshold selection and micro for top-k.
  std::optional<Protocol> protocol;

  Protocol EffectiveProtocol() const;
};

struct RunConfig {
  std::vector<DatasetSpec> datasets;
  EncoderConfig encoder;
  TrainingConfig training;
  std::string output_dir = "output";
  int64_t seed = 0;
  bool include_description = true;
  int dev_every_epochs = 1;

  const DatasetSpec &Task(const std::string &task_id) const;
};

// Parses a run configuration. Relative paths resolve against the config
// file's directory. "training" is either an inline object with the
// TrainingConfig keys or the path of a key = value file.
RunConfig LoadRunConfig(const std::string &path);

// Loads the training split of every dataset and merges per-dataset
// upsampling into the training factors.
std::vector<TaskData> LoadTrainingData(const RunConfig &config,
                                       std::map<std::string, int> *factors);

// Vocabulary over formatted training inputs and every candidate label.
Vocabulary BuildRunVocabulary(const RunConfig &config,
                              std::span<const TaskData> data);

// Selection-appropriate dev score for one task (higher is better):
// tuned-threshold macro F1, micro F1 with the abstain label, or macro F1
// for k > 1.
double DevScore(const Encoder &encoder, const DatasetSpec &spec,
                const Dataset &dev, bool include_description);

// Artifact locations under an output directory.
std::string CheckpointPath(const std::string &output_dir);
std::string TrainLogPath(const std::string &output_dir);
std::string LabelEmbeddingsPath(const std::string &output_dir,
                                const std::string &task_id);
std::string LabelListPath(const std::string &output_dir,
                          const std::string &task_id);
std::string ThresholdPath(const std::string &output_dir,
                          const std::string &task_id);
std::string PredictionsPath(const std::string &output_dir,
                            const std::string &task_id,
                            const std::string &split);

// Entry point for the command line tool. Returns 0 on success, 1 on
// validation or usage errors, 2 on runtime failures.
int RunCommand(const std::vector<std::string> &args, std::ostream &out,
               std::ostream &err);

}  // namespace semtype

#endif  // SEMTYPE_PIPELINE_H_
