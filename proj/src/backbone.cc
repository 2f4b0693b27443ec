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

#include "semtype/backbone.h"

#include <cmath>

#include "semtype/errors.h"

namespace semtype {

Eigen::VectorXd Backbone::ForwardStart(std::span<const int> ids,
                                       std::unique_ptr<BackboneTape> *tape) const {
  if (tape != nullptr) tape->reset();
  return Forward(ids).row(0).transpose();
}

void Backbone::BackwardStart(const BackboneTape &, const Eigen::VectorXd &,
                             std::span<double>) const {
  throw RuntimeFailure("backbone '" + spec() + "' is not trainable");
}

// MeanBagBackbone.

namespace {

class MeanBagTape : public BackboneTape {
 public:
  std::vector<int> ids;
  Eigen::VectorXd hidden;
};

void CheckIds(std::span<const int> ids, int vocab_size) {
  if (ids.empty()) throw ValidationError("backbone input must be non-empty");
  for (int id : ids) {
    if (id < 0 || id >= vocab_size) {
      throw ValidationError("token id " + std::to_string(id) +
                            " outside vocabulary of size " +
                            std::to_string(vocab_size));
    }
  }
}

}  // namespace

MeanBagBackbone::MeanBagBackbone(int vocab_size, int dim, uint64_t seed)
    : dim_(dim) {
  if (vocab_size < 1 || dim < 1) {
    throw ValidationError("mean-bag backbone needs positive sizes");
  }
  std::mt19937_64 rng(seed);
  embeddings_ = params_.AddBlock("embeddings", vocab_size, dim);
  projection_ = params_.AddBlock("projection", dim, dim);
  params_.InitNormal(embeddings_, 1.0 / std::sqrt(dim), rng);
  params_.InitNormal(projection_, 1.0 / std::sqrt(dim), rng);
}

std::unique_ptr<Backbone> MeanBagBackbone::Clone() const {
  return std::make_unique<MeanBagBackbone>(*this);
}

Eigen::VectorXd MeanBagBackbone::Mean(std::span<const int> ids) const {
  auto table = params_.Matrix(embeddings_);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim_);
  for (int id : ids) mean += table.row(id).transpose();
  return mean / static_cast<double>(ids.size());
}

Eigen::VectorXd MeanBagBackbone::Position(std::span<const int> ids, int i,
                                          const Eigen::VectorXd &mean,
                                          Eigen::VectorXd *hidden) const {
  Eigen::VectorXd h =
      (params_.Matrix(embeddings_).row(ids[i]).transpose() + mean)
          .array()
          .tanh()
          .matrix();
  Eigen::VectorXd out = params_.Matrix(projection_) * h;
  if (hidden != nullptr) *hidden = std::move(h);
  return out;
}

Eigen::MatrixXd MeanBagBackbone::Forward(std::span<const int> ids) const {
  CheckIds(ids, params_.blocks()[embeddings_].rows);
  const Eigen::VectorXd mean = Mean(ids);
  Eigen::MatrixXd out(ids.size(), dim_);
  for (size_t i = 0; i < ids.size(); ++i) {
    out.row(i) = Position(ids, static_cast<int>(i), mean, nullptr).transpose();
  }
  return out;
}

Eigen::VectorXd MeanBagBackbone::ForwardStart(
    std::span<const int> ids, std::unique_ptr<BackboneTape> *tape) const {
  CheckIds(ids, params_.blocks()[embeddings_].rows);
  const Eigen::VectorXd mean = Mean(ids);
  if (tape == nullptr) return Position(ids, 0, mean, nullptr);
  auto t = std::make_unique<MeanBagTape>();
  t->ids.assign(ids.begin(), ids.end());
  Eigen::VectorXd out = Position(ids, 0, mean, &t->hidden);
  *tape = std::move(t);
  return out;
}

void MeanBagBackbone::BackwardStart(const BackboneTape &tape,
                                    const Eigen::VectorXd &grad_output,
                                    std::span<double> param_grads) const {
  const auto &t = dynamic_cast<const MeanBagTape &>(tape);
  auto d_table = params_.Matrix(embeddings_, param_grads);
  auto d_projection = params_.Matrix(projection_, param_grads);

  d_projection.noalias() += grad_output * t.hidden.transpose();
  Eigen::VectorXd d_hidden =
      params_.Matrix(projection_).transpose() * grad_output;
  Eigen::VectorXd d_pre =
      d_hidden.array() * (1.0 - t.hidden.array().square());

  d_table.row(t.ids[0]) += d_pre.transpose();
  const Eigen::VectorXd share = d_pre / static_cast<double>(t.ids.size());
  for (int id : t.ids) d_table.row(id) += share.transpose();
}

// AttentionBackbone.

struct AttentionBackbone::Projections {
  std::vector<int> ids;
  Eigen::MatrixXd inputs;  // L x d
  Eigen::MatrixXd keys;    // L x a
  Eigen::MatrixXd values;  // L x d
};

class AttentionBackbone::Tape : public BackboneTape {
 public:
  Projections projections;
  Eigen::VectorXd query;
  Eigen::VectorXd attention;
  Eigen::VectorXd activation;
};

AttentionBackbone::AttentionBackbone(int vocab_size, int dim,
                                     int attention_dim, uint64_t seed)
    : dim_(dim), attention_dim_(attention_dim) {
  if (vocab_size < 1 || dim < 1 || attention_dim < 1) {
    throw ValidationError("attention backbone needs positive sizes");
  }
  std::mt19937_64 rng(seed);
  embeddings_ = params_.AddBlock("embeddings", vocab_size, dim);
  query_ = params_.AddBlock("query", attention_dim, dim);
  key_ = params_.AddBlock("key", attention_dim, dim);
  value_ = params_.AddBlock("value", dim, dim);
  output_ = params_.AddBlock("output", dim, dim);
  const double scale = 1.0 / std::sqrt(dim);
  params_.InitNormal(embeddings_, scale, rng);
  params_.InitNormal(query_, scale, rng);
  params_.InitNormal(key_, scale, rng);
  params_.InitNormal(value_, scale, rng);
  params_.InitNormal(output_, scale, rng);
}

std::unique_ptr<Backbone> AttentionBackbone::Clone() const {
  return std::make_unique<AttentionBackbone>(*this);
}

AttentionBackbone::Projections AttentionBackbone::Project(
    std::span<const int> ids) const {
  CheckIds(ids, params_.blocks()[embeddings_].rows);
  auto table = params_.Matrix(embeddings_);
  Projections p;
  p.ids.assign(ids.begin(), ids.end());
  p.inputs.resize(ids.size(), dim_);
  for (size_t i = 0; i < ids.size(); ++i) p.inputs.row(i) = table.row(ids[i]);
  p.keys = p.inputs * params_.Matrix(key_).transpose();
  p.values = p.inputs * params_.Matrix(value_).transpose();
  return p;
}

Eigen::VectorXd AttentionBackbone::Position(const Projections &p, int i,
                                            Tape *tape) const {
  const Eigen::VectorXd x = p.inputs.row(i).transpose();
  Eigen::VectorXd query = params_.Matrix(query_) * x;
  Eigen::VectorXd scores = p.keys * query / std::sqrt(attention_dim_);
  Eigen::VectorXd attention = (scores.array() - scores.maxCoeff()).exp();
  attention /= attention.sum();
  const Eigen::VectorXd hidden = x + p.values.transpose() * attention;
  Eigen::VectorXd activation = hidden.array().tanh();
  Eigen::VectorXd out = hidden + params_.Matrix(output_) * activation;
  if (tape != nullptr) {
    tape->query = std::move(query);
    tape->attention = std::move(attention);
    tape->activation = std::move(activation);
  }
  return out;
}

Eigen::MatrixXd AttentionBackbone::Forward(std::span<const int> ids) const {
  const Projections p = Project(ids);
  Eigen::MatrixXd out(ids.size(), dim_);
  for (size_t i = 0; i < ids.size(); ++i) {
    out.row(i) = Position(p, static_cast<int>(i), nullptr).transpose();
  }
  return out;
}

Eigen::VectorXd AttentionBackbone::ForwardStart(
    std::span<const int> ids, std::unique_ptr<BackboneTape> *tape) const {
  if (tape == nullptr) return Position(Project(ids), 0, nullptr);
  auto t = std::make_unique<Tape>();
  t->projections = Project(ids);
  Eigen::VectorXd out = Position(t->projections, 0, t.get());
  *tape = std::move(t);
  return out;
}

void AttentionBackbone::BackwardStart(const BackboneTape &tape,
                                      const Eigen::VectorXd &grad_output,
                                      std::span<double> param_grads) const {
  const auto &t = dynamic_cast<const Tape &>(tape);
  const Projections &p = t.projections;
  auto wq = params_.Matrix(query_);
  auto wk = params_.Matrix(key_);
  auto wv = params_.Matrix(value_);
  auto wo = params_.Matrix(output_);
  auto d_table = params_.Matrix(embeddings_, param_grads);
  auto d_wq = params_.Matrix(query_, param_grads);
  auto d_wk = params_.Matrix(key_, param_grads);
  auto d_wv = params_.Matrix(value_, param_grads);
  auto d_wo = params_.Matrix(output_, param_grads);

  d_wo.noalias() += grad_output * t.activation.transpose();
  const Eigen::VectorXd d_hidden =
      grad_output + ((wo.transpose() * grad_output).array() *
                     (1.0 - t.activation.array().square()))
                        .matrix();

  Eigen::MatrixXd d_inputs = Eigen::MatrixXd::Zero(p.inputs.rows(), dim_);
  d_inputs.row(0) += d_hidden.transpose();

  // Attention mixture c = V^T a.
  const Eigen::VectorXd d_attention = p.values * d_hidden;
  const Eigen::MatrixXd d_values = t.attention * d_hidden.transpose();
  d_wv.noalias() += d_values.transpose() * p.inputs;
  d_inputs.noalias() += d_values * wv;

  // Softmax, then the scaled dot products.
  Eigen::VectorXd d_scores =
      t.attention.array() * (d_attention.array() - t.attention.dot(d_attention));
  d_scores /= std::sqrt(attention_dim_);
  const Eigen::VectorXd d_query = p.keys.transpose() * d_scores;
  const Eigen::MatrixXd d_keys = d_scores * t.query.transpose();
  d_wk.noalias() += d_keys.transpose() * p.inputs;
  d_inputs.noalias() += d_keys * wk;
  d_wq.noalias() += d_query * p.inputs.row(0);
  d_inputs.row(0) += (wq.transpose() * d_query).transpose();

  for (size_t i = 0; i < p.ids.size(); ++i) {
    d_table.row(p.ids[i]) += d_inputs.row(i);
  }
}

std::unique_ptr<Backbone> MakeBackbone(const std::string &spec, int vocab_size,
                                       int dim, uint64_t seed) {
  if (spec == MeanBagBackbone::kSpec) {
    return std::make_unique<MeanBagBackbone>(vocab_size, dim, seed);
  }
  if (spec == AttentionBackbone::kSpec) {
    return std::make_unique<AttentionBackbone>(vocab_size, dim, dim, seed);
  }
  throw ValidationError("unknown backbone spec '" + spec + "'");
}

}  // namespace semtype
