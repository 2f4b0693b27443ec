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

#ifndef SEMTYPE_BACKBONE_H_
#define SEMTYPE_BACKBONE_H_

#include <memory>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "semtype/parameters.h"

namespace semtype {

// Opaque per-text forward state kept for the backward pass.
class BackboneTape {
 public:
  virtual ~BackboneTape() = default;
};

// A sequence encoder producing one output vector per input position.
// Pooling always reads position 0, where the tokenizer places the
// sequence-start symbol.
class Backbone {
 public:
  virtual ~Backbone() = default;

  virtual std::string spec() const = 0;
  virtual int dim() const = 0;
  virtual std::unique_ptr<Backbone> Clone() const = 0;

  // Positionwise outputs, shape ids.size() x dim().
  virtual Eigen::MatrixXd Forward(std::span<const int> ids) const = 0;

  // Output at the sequence-start position. When `tape` is non-null the
  // backbone records what BackwardStart needs. Must equal
  // Forward(ids).row(0) bitwise.
  virtual Eigen::VectorXd ForwardStart(
      std::span<const int> ids, std::unique_ptr<BackboneTape> *tape) const;

  virtual bool trainable() const { return false; }

  // Accumulates d(loss)/d(parameters) into `param_grads` (laid out like
  // parameters()->values()) given d(loss)/d(start output).
  virtual void BackwardStart(const BackboneTape &tape,
                             const Eigen::VectorXd &grad_output,
                             std::span<double> param_grads) const;

  virtual ParameterSet *parameters() { return nullptr; }
  virtual const ParameterSet *parameters() const { return nullptr; }
};

// o_i = P tanh(x_i + mean_j x_j) over trainable word embeddings x, with the
// sequence-start symbol acting as a learned start token.
class MeanBagBackbone : public Backbone {
 public:
  static constexpr std::string_view kSpec = "mean-bag";

  MeanBagBackbone(int vocab_size, int dim, uint64_t seed);

  std::string spec() const override { return std::string(kSpec); }
  int dim() const override { return dim_; }
  std::unique_ptr<Backbone> Clone() const override;
  Eigen::MatrixXd Forward(std::span<const int> ids) const override;
  Eigen::VectorXd ForwardStart(std::span<const int> ids,
                               std::unique_ptr<BackboneTape> *tape) const override;
  bool trainable() const override { return true; }
  void BackwardStart(const BackboneTape &tape, const Eigen::VectorXd &grad_output,
                     std::span<double> param_grads) const override;
  ParameterSet *parameters() override { return &params_; }
  const ParameterSet *parameters() const override { return &params_; }

 private:
  Eigen::VectorXd Position(std::span<const int> ids, int i,
                           const Eigen::VectorXd &mean,
                           Eigen::VectorXd *hidden) const;
  Eigen::VectorXd Mean(std::span<const int> ids) const;

  int dim_;
  ParameterSet params_;
  int embeddings_;
  int projection_;
};

// One single-head self-attention layer over trainable word embeddings:
//   h_i = x_i + sum_j softmax_j(q_i . k_j / sqrt(a)) v_j
//   o_i = h_i + W_o tanh(h_i)
class AttentionBackbone : public Backbone {
 public:
  static constexpr std::string_view kSpec = "attention-pool";

  AttentionBackbone(int vocab_size, int dim, int attention_dim, uint64_t seed);

  std::string spec() const override { return std::string(kSpec); }
  int dim() const override { return dim_; }
  std::unique_ptr<Backbone> Clone() const override;
  Eigen::MatrixXd Forward(std::span<const int> ids) const override;
  Eigen::VectorXd ForwardStart(std::span<const int> ids,
                               std::unique_ptr<BackboneTape> *tape) const override;
  bool trainable() const override { return true; }
  void BackwardStart(const BackboneTape &tape, const Eigen::VectorXd &grad_output,
                     std::span<double> param_grads) const override;
  ParameterSet *parameters() override { return &params_; }
  const ParameterSet *parameters() const override { return &params_; }

 private:
  struct Projections;
  class Tape;

  Projections Project(std::span<const int> ids) const;
  Eigen::VectorXd Position(const Projections &p, int i, Tape *tape) const;

  int dim_;
  int attention_dim_;
  ParameterSet params_;
  int embeddings_;
  int query_;
  int key_;
  int value_;
  int output_;
};

// Builds a trainable backbone from its spec name ("mean-bag" or
// "attention-pool"). Throws ValidationError for unknown specs.
std::unique_ptr<Backbone> MakeBackbone(const std::string &spec, int vocab_size,
                                       int dim, uint64_t seed);

}  // namespace semtype

#endif  // SEMTYPE_BACKBONE_H_
