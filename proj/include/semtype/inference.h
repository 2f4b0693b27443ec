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

#ifndef SEMTYPE_INFERENCE_H_
#define SEMTYPE_INFERENCE_H_

#include <functional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "semtype/encoder.h"
#include "semtype/formatting.h"

namespace semtype {

struct LabelEntry {
  std::string raw;
  std::string verbalized;
};

// Candidate labels with their eval-mode embeddings under one checkpoint.
// Immutable once built; safe for concurrent queries.
class LabelIndex {
 public:
  // Encodes every verbalized label with `encoder`. Any label text is
  // admissible. Throws ValidationError on an empty or duplicated list.
  static LabelIndex Build(std::span<const std::string> labels,
                          const Encoder &encoder);

  // Wraps precomputed rows, e.g. read back from a label-embedding file.
  static LabelIndex FromEmbeddings(std::vector<std::string> labels,
                                   Eigen::MatrixXd embeddings,
                                   std::string checkpoint_id);

  const std::vector<LabelEntry> &labels() const { return labels_; }
  const Eigen::MatrixXd &embeddings() const { return embeddings_; }
  const std::string &checkpoint_id() const { return checkpoint_id_; }
  int size() const { return static_cast<int>(labels_.size()); }
  int dim() const { return static_cast<int>(embeddings_.cols()); }

 private:
  LabelIndex(std::vector<LabelEntry> labels, Eigen::MatrixXd embeddings,
             std::string checkpoint_id);

  std::vector<LabelEntry> labels_;
  Eigen::MatrixXd embeddings_;
  std::string checkpoint_id_;
};

struct ScoredLabel {
  std::string label;
  double score = 0;

  bool operator==(const ScoredLabel &) const = default;
};

struct Prediction {
  std::string instance_id;
  // Every candidate, by non-increasing score, ties by ascending raw label.
  std::vector<ScoredLabel> ranked;
  std::set<std::string> selected;
};

// Cosine similarity of `query` against every index row, ranked.
std::vector<ScoredLabel> RankLabels(const Eigen::VectorXd &query,
                                    const LabelIndex &index);

// The first k ranked labels. Throws ValidationError unless 1 <= k <= size.
Prediction SelectTopK(std::string instance_id, std::vector<ScoredLabel> ranked,
                      int k);

// Every label scoring >= tau. May be empty.
Prediction SelectByThreshold(std::string instance_id,
                             std::vector<ScoredLabel> ranked, double tau);

// Binds an encoder to an index built under the same checkpoint.
class Predictor {
 public:
  // Throws ValidationError when the index checkpoint differs from the
  // encoder's current parameters.
  Predictor(const Encoder &encoder, const LabelIndex &index,
            bool include_description = true);

  std::vector<ScoredLabel> Rank(const TypingInstance &instance) const;
  Prediction TopK(const TypingInstance &instance, int k) const;
  Prediction Threshold(const TypingInstance &instance, double tau) const;

  const LabelIndex &index() const { return index_; }

 private:
  const Encoder &encoder_;
  const LabelIndex &index_;
  bool include_description_;
};

Prediction PredictTopK(const TypingInstance &instance, const LabelIndex &index,
                       const Encoder &encoder, int k,
                       bool include_description = true);
Prediction PredictThreshold(const TypingInstance &instance,
                            const LabelIndex &index, const Encoder &encoder,
                            double tau, bool include_description = true);

using LabelSets = std::vector<std::set<std::string>>;
// Scores predictions against gold; higher is better.
using SetMetric = std::function<double(const LabelSets &gold, const LabelSets &pred)>;

// Grid search over midpoints of consecutive observed similarities with
// -inf/+inf sentinels. Ties go to the lower threshold.
double TuneThreshold(std::span<const std::vector<ScoredLabel>> ranked,
                     const LabelSets &gold, const SetMetric &metric);

double TuneThreshold(std::span<const TypingInstance> dev,
                     const LabelIndex &index, const Encoder &encoder,
                     const SetMetric &metric, bool include_description = true);

// Label-embedding file: one JSON header line
// {schema_version, dim, count, dtype, checkpoint_id, seed}, then
// count x dim little-endian f32 values, row-major. The companion labels file
// holds one raw label per line.
void WriteLabelEmbeddings(const LabelIndex &index,
                          const std::string &embeddings_path,
                          const std::string &labels_path, int64_t seed);
LabelIndex ReadLabelEmbeddings(const std::string &embeddings_path,
                               const std::string &labels_path);

}  // namespace semtype

#endif  // SEMTYPE_INFERENCE_H_
