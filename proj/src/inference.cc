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

#include "semtype/inference.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "semtype/errors.h"
#include "semtype/io.h"

namespace semtype {

LabelIndex::LabelIndex(std::vector<LabelEntry> labels,
                       Eigen::MatrixXd embeddings, std::string checkpoint_id)
    : labels_(std::move(labels)),
      embeddings_(std::move(embeddings)),
      checkpoint_id_(std::move(checkpoint_id)) {}

static std::vector<LabelEntry> CheckedEntries(std::span<const std::string> labels) {
  if (labels.empty()) throw ValidationError("label index needs at least one label");
  std::set<std::string> seen;
  std::vector<LabelEntry> entries;
  entries.reserve(labels.size());
  for (const std::string &label : labels) {
    if (!seen.insert(label).second) {
      throw ValidationError("duplicate label '" + label + "' in label index");
    }
    entries.push_back({label, VerbalizeLabel(label)});
  }
  return entries;
}

LabelIndex LabelIndex::Build(std::span<const std::string> labels,
                             const Encoder &encoder) {
  std::vector<LabelEntry> entries = CheckedEntries(labels);
  std::vector<std::string> texts;
  texts.reserve(entries.size());
  for (const LabelEntry &e : entries) texts.push_back(e.verbalized);
  const std::vector<Embedding> encoded = encoder.Encode(texts);
  Eigen::MatrixXd rows(encoded.size(), encoder.config().dim);
  for (size_t i = 0; i < encoded.size(); ++i) {
    rows.row(i) = encoded[i].values().transpose();
  }
  return LabelIndex(std::move(entries), std::move(rows), encoder.CheckpointId());
}

LabelIndex LabelIndex::FromEmbeddings(std::vector<std::string> labels,
                                      Eigen::MatrixXd embeddings,
                                      std::string checkpoint_id) {
  std::vector<LabelEntry> entries = CheckedEntries(labels);
  if (embeddings.rows() != static_cast<Eigen::Index>(entries.size())) {
    throw ValidationError("label index has " + std::to_string(entries.size()) +
                          " labels but " + std::to_string(embeddings.rows()) +
                          " embedding rows");
  }
  if (embeddings.cols() < 1 || !embeddings.allFinite()) {
    throw ValidationError("label embeddings must be finite and non-empty");
  }
  return LabelIndex(std::move(entries), std::move(embeddings),
                    std::move(checkpoint_id));
}

std::vector<ScoredLabel> RankLabels(const Eigen::VectorXd &query,
                                    const LabelIndex &index) {
  std::vector<ScoredLabel> ranked;
  ranked.reserve(index.size());
  for (int i = 0; i < index.size(); ++i) {
    ranked.push_back({index.labels()[i].raw,
                      CosineSimilarity(query, index.embeddings().row(i).transpose())});
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const ScoredLabel &a, const ScoredLabel &b) {
              if (a.score != b.score) return a.score > b.score;
              return a.label < b.label;
            });
  return ranked;
}

Prediction SelectTopK(std::string instance_id, std::vector<ScoredLabel> ranked,
                      int k) {
  if (k < 1 || k > static_cast<int>(ranked.size())) {
    throw ValidationError("k = " + std::to_string(k) + " outside [1, " +
                          std::to_string(ranked.size()) + "]");
  }
  Prediction out;
  out.instance_id = std::move(instance_id);
  for (int i = 0; i < k; ++i) out.selected.insert(ranked[i].label);
  out.ranked = std::move(ranked);
  return out;
}

Prediction SelectByThreshold(std::string instance_id,
                             std::vector<ScoredLabel> ranked, double tau) {
  Prediction out;
  out.instance_id = std::move(instance_id);
  for (const ScoredLabel &s : ranked) {
    if (s.score >= tau) out.selected.insert(s.label);
  }
  out.ranked = std::move(ranked);
  return out;
}

Predictor::Predictor(const Encoder &encoder, const LabelIndex &index,
                     bool include_description)
    : encoder_(encoder), index_(index), include_description_(include_description) {
  const std::string live = encoder.CheckpointId();
  if (live != index.checkpoint_id()) {
    throw ValidationError("label index was built under checkpoint " +
                          index.checkpoint_id() + " but the encoder is at " +
                          live);
  }
  if (index.dim() != encoder.config().dim) {
    throw ValidationError("label index dim differs from encoder dim");
  }
}

std::vector<ScoredLabel> Predictor::Rank(const TypingInstance &instance) const {
  const FormattedInput input = FormatInput(instance, include_description_);
  return RankLabels(encoder_.Encode(input.text).values(), index_);
}

Prediction Predictor::TopK(const TypingInstance &instance, int k) const {
  if (k < 1 || k > index_.size()) {
    throw ValidationError("k = " + std::to_string(k) + " outside [1, " +
                          std::to_string(index_.size()) + "]");
  }
  return SelectTopK(instance.id, Rank(instance), k);
}

Prediction Predictor::Threshold(const TypingInstance &instance,
                                double tau) const {
  return SelectByThreshold(instance.id, Rank(instance), tau);
}

Prediction PredictTopK(const TypingInstance &instance, const LabelIndex &index,
                       const Encoder &encoder, int k, bool include_description) {
  return Predictor(encoder, index, include_description).TopK(instance, k);
}

Prediction PredictThreshold(const TypingInstance &instance,
                            const LabelIndex &index, const Encoder &encoder,
                            double tau, bool include_description) {
  return Predictor(encoder, index, include_description).Threshold(instance, tau);
}

double TuneThreshold(std::span<const std::vector<ScoredLabel>> ranked,
                     const LabelSets &gold, const SetMetric &metric) {
  if (ranked.empty()) throw ValidationError("threshold tuning needs a dev set");
  if (ranked.size() != gold.size()) {
    throw ValidationError("dev predictions and gold sets differ in length");
  }
  std::vector<double> scores;
  for (const auto &list : ranked) {
    for (const ScoredLabel &s : list) scores.push_back(s.score);
  }
  std::sort(scores.begin(), scores.end());
  scores.erase(std::unique(scores.begin(), scores.end()), scores.end());

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> grid;
  grid.reserve(scores.size() + 1);
  grid.push_back(-kInf);
  for (size_t i = 0; i + 1 < scores.size(); ++i) {
    grid.push_back(0.5 * (scores[i] + scores[i + 1]));
  }
  grid.push_back(kInf);

  double best_tau = grid.front();
  double best_score = -kInf;
  LabelSets pred(ranked.size());
  for (double tau : grid) {
    for (size_t i = 0; i < ranked.size(); ++i) {
      pred[i].clear();
      for (const ScoredLabel &s : ranked[i]) {
        if (s.score >= tau) pred[i].insert(s.label);
      }
    }
    const double value = metric(gold, pred);
    if (value > best_score) {
      best_score = value;
      best_tau = tau;
    }
  }
  return best_tau;
}

double TuneThreshold(std::span<const TypingInstance> dev,
                     const LabelIndex &index, const Encoder &encoder,
                     const SetMetric &metric, bool include_description) {
  if (dev.empty()) throw ValidationError("threshold tuning needs a dev set");
  const Predictor predictor(encoder, index, include_description);
  std::vector<std::vector<ScoredLabel>> ranked;
  LabelSets gold;
  for (const TypingInstance &instance : dev) {
    ranked.push_back(predictor.Rank(instance));
    gold.push_back(instance.gold_labels);
  }
  return TuneThreshold(ranked, gold, metric);
}

void WriteLabelEmbeddings(const LabelIndex &index,
                          const std::string &embeddings_path,
                          const std::string &labels_path, int64_t seed) {
  nlohmann::ordered_json header;
  header["schema_version"] = 1;
  header["dim"] = index.dim();
  header["count"] = index.size();
  header["dtype"] = "f32-le";
  header["checkpoint_id"] = index.checkpoint_id();
  header["seed"] = seed;

  std::string out = header.dump();
  out += '\n';
  for (int r = 0; r < index.size(); ++r) {
    for (int c = 0; c < index.dim(); ++c) {
      AppendF32(&out, static_cast<float>(index.embeddings()(r, c)));
    }
  }
  std::string labels;
  for (const LabelEntry &e : index.labels()) {
    if (e.raw.find('\n') != std::string::npos) {
      throw ValidationError("label '" + e.raw + "' contains a newline");
    }
    labels += e.raw;
    labels += '\n';
  }
  WriteFileAtomic(embeddings_path, out);
  WriteFileAtomic(labels_path, labels);
}

LabelIndex ReadLabelEmbeddings(const std::string &embeddings_path,
                               const std::string &labels_path) {
  const std::string data = ReadFile(embeddings_path);
  const size_t newline = data.find('\n');
  if (newline == std::string::npos) {
    throw RuntimeFailure(embeddings_path + ": missing header line");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(data.substr(0, newline));
  } catch (const nlohmann::json::exception &e) {
    throw RuntimeFailure(embeddings_path + ": bad header: " + e.what());
  }
  if (header.value("schema_version", 0) != 1 ||
      header.value("dtype", std::string()) != "f32-le") {
    throw RuntimeFailure(embeddings_path + ": unsupported schema or dtype");
  }
  const int64_t dim = header.at("dim").get<int64_t>();
  const int64_t count = header.at("count").get<int64_t>();
  if (dim < 1 || count < 1) {
    throw RuntimeFailure(embeddings_path + ": dim and count must be positive");
  }
  ByteReader reader(std::string_view(data).substr(newline + 1));
  if (reader.remaining() != static_cast<size_t>(dim * count) * sizeof(float)) {
    throw RuntimeFailure(embeddings_path + ": payload size does not match header");
  }
  Eigen::MatrixXd rows(count, dim);
  for (int64_t r = 0; r < count; ++r) {
    for (int64_t c = 0; c < dim; ++c) rows(r, c) = reader.F32();
  }

  std::vector<std::string> labels;
  std::istringstream lines(ReadFile(labels_path));
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    labels.push_back(line);
  }
  if (static_cast<int64_t>(labels.size()) != count) {
    throw RuntimeFailure(labels_path + " lists " + std::to_string(labels.size()) +
                         " labels, header says " + std::to_string(count));
  }
  return LabelIndex::FromEmbeddings(std::move(labels), std::move(rows),
                                    header.at("checkpoint_id").get<std::string>());
}

}  // namespace semtype
