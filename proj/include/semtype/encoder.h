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

#ifndef SEMTYPE_ENCODER_H_
#define SEMTYPE_ENCODER_H_

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "semtype/backbone.h"
#include "semtype/tokenizer.h"

namespace semtype {

// A finite, non-empty real vector in the shared input/label space.
class Embedding {
 public:
  // Throws ValidationError on empty or non-finite values.
  explicit Embedding(Eigen::VectorXd values);

  const Eigen::VectorXd &values() const { return values_; }
  int dim() const { return static_cast<int>(values_.size()); }

  bool operator==(const Embedding &other) const {
    return values_.size() == other.values_.size() && values_ == other.values_;
  }

 private:
  Eigen::VectorXd values_;
};

// Cosine of the angle between u and v, clamped to [-1, 1]. Rejects
// mismatched dimensions and all-zero vectors.
double CosineSimilarity(const Eigen::VectorXd &u, const Eigen::VectorXd &v);
double CosineSimilarity(const Embedding &u, const Embedding &v);

struct CosineGradient {
  double value = 0;
  Eigen::VectorXd d_u;
  Eigen::VectorXd d_v;
};

// Unclamped cosine together with its partial derivatives.
CosineGradient CosineWithGradient(const Eigen::VectorXd &u,
                                  const Eigen::VectorXd &v);

struct EncoderConfig {
  int dim = 32;
  int max_sequence_length = 128;
  std::string vocabulary_spec = std::string(Vocabulary::kSpec);
  std::string backbone_spec = "attention-pool";
};

enum class EncodeMode { kTrain, kEval };

// Result of encoding a batch. In train mode it also carries the tapes
// needed to push gradients back into the encoder parameters.
struct EncodedBatch {
  std::vector<Embedding> embeddings;
  std::vector<std::unique_ptr<BackboneTape>> tapes;
  EncodeMode mode = EncodeMode::kEval;
};

// Receives truncation warnings. Defaults to std::clog.
using WarningHandler = std::function<void(const std::string &)>;
void SetWarningHandler(WarningHandler handler);

// The single shared encoder for inputs and labels.
class Encoder {
 public:
  Encoder(EncoderConfig config, Vocabulary vocab,
          std::unique_ptr<Backbone> backbone);

  // Builds a freshly initialized trainable backbone per config.
  static Encoder Create(EncoderConfig config, Vocabulary vocab, uint64_t seed);

  Encoder(const Encoder &other);
  Encoder &operator=(const Encoder &other);
  Encoder(Encoder &&) = default;
  Encoder &operator=(Encoder &&) = default;

  // One embedding per text, pooled at the sequence-start position. Throws
  // ValidationError on an empty list. Eval mode is deterministic and safe
  // for concurrent callers.
  EncodedBatch EncodeBatch(std::span<const std::string> texts,
                           EncodeMode mode) const;

  std::vector<Embedding> Encode(std::span<const std::string> texts) const;
  Embedding Encode(const std::string &text) const;

  // Accumulates parameter gradients given d(loss)/d(embedding) for every
  // embedding of a train-mode batch. `param_grads` has parameter_count()
  // entries.
  void Backward(const EncodedBatch &batch,
                std::span<const Eigen::VectorXd> grad_embeddings,
                std::span<double> param_grads) const;

  const EncoderConfig &config() const { return config_; }
  const Vocabulary &vocabulary() const { return vocab_; }
  const Backbone &backbone() const { return *backbone_; }

  bool trainable() const { return backbone_->trainable(); }
  std::span<double> parameter_values();
  std::span<const double> parameter_values() const;
  size_t parameter_count() const;

  // Identifies the vocabulary, backbone and current parameter values.
  std::string CheckpointId() const;

 private:
  std::vector<int> TokenIds(const std::string &text) const;

  EncoderConfig config_;
  Vocabulary vocab_;
  std::unique_ptr<Backbone> backbone_;
};

}  // namespace semtype

#endif  // SEMTYPE_ENCODER_H_
