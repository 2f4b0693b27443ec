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

#include "semtype/evaluation.h"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "semtype/errors.h"

namespace semtype {

std::string_view ProtocolName(Protocol protocol) {
  switch (protocol) {
    case Protocol::kMacro: return "macro";
    case Protocol::kMicro: return "micro";
    case Protocol::kNway: return "nway";
  }
  return "unknown";
}

Protocol ParseProtocol(std::string_view name) {
  for (Protocol p : {Protocol::kMacro, Protocol::kMicro, Protocol::kNway}) {
    if (ProtocolName(p) == name) return p;
  }
  throw ValidationError("unknown protocol '" + std::string(name) + "'");
}

double HarmonicF1(double precision, double recall) {
  if (precision + recall == 0) return 0;
  return 2 * precision * recall / (precision + recall);
}

MetricsReport MacroPrf(const LabelSets &gold, const LabelSets &pred) {
  if (gold.size() != pred.size()) {
    throw ValidationError("gold and predictions differ in length");
  }
  MetricsReport report;
  report.protocol = Protocol::kMacro;
  double precision_sum = 0, recall_sum = 0;
  int64_t with_predictions = 0, gold_labels = 0, predicted = 0, correct = 0;
  for (size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].empty()) {
      throw ValidationError("instance #" + std::to_string(i) +
                            " has an empty gold label set");
    }
    int64_t overlap = 0;
    for (const std::string &label : pred[i]) overlap += gold[i].contains(label);
    if (!pred[i].empty()) {
      precision_sum += static_cast<double>(overlap) / pred[i].size();
      ++with_predictions;
    }
    recall_sum += static_cast<double>(overlap) / gold[i].size();
    gold_labels += gold[i].size();
    predicted += pred[i].size();
    correct += overlap;
  }
  report.precision = with_predictions > 0 ? precision_sum / with_predictions : 0;
  report.recall = gold.empty() ? 0 : recall_sum / gold.size();
  report.f1 = HarmonicF1(report.precision, report.recall);
  report.support_counts = {
      {"instances", static_cast<int64_t>(gold.size())},
      {"instances_with_predictions", with_predictions},
      {"gold_labels", gold_labels},
      {"predicted_labels", predicted},
      {"correct_labels", correct},
      {"precision_undefined", with_predictions == 0 ? 1 : 0},
  };
  return report;
}

MetricsReport MicroPrf(std::span<const std::string> gold,
                       std::span<const std::string> pred,
                       const std::string &abstain) {
  if (gold.size() != pred.size()) {
    throw ValidationError("gold and predictions differ in length");
  }
  int64_t correct = 0, predicted = 0, relations = 0;
  for (size_t i = 0; i < gold.size(); ++i) {
    const bool guessed = pred[i] != abstain;
    predicted += guessed;
    relations += gold[i] != abstain;
    correct += guessed && pred[i] == gold[i];
  }
  MetricsReport report;
  report.protocol = Protocol::kMicro;
  if (predicted == 0 && relations == 0) {
    report.precision = report.recall = 1;
  } else {
    report.precision = predicted > 0 ? static_cast<double>(correct) / predicted : 0;
    report.recall = relations > 0 ? static_cast<double>(correct) / relations : 0;
  }
  report.f1 = HarmonicF1(report.precision, report.recall);
  report.support_counts = {
      {"instances", static_cast<int64_t>(gold.size())},
      {"predicted", predicted},
      {"gold", relations},
      {"correct", correct},
  };
  return report;
}

RelationPool GroupByRelation(std::span<const TypingInstance> instances) {
  RelationPool pool;
  for (const TypingInstance &instance : instances) {
    if (instance.gold_labels.size() != 1) {
      throw ValidationError("episodic pools need single-label instances; '" +
                            instance.id + "' has " +
                            std::to_string(instance.gold_labels.size()));
    }
    pool[*instance.gold_labels.begin()].push_back(instance);
  }
  return pool;
}

Episode SampleEpisode(const RelationPool &pool, int n_way, Rng &rng) {
  if (n_way < 1) throw ValidationError("n_way must be positive");
  if (static_cast<int>(pool.size()) < n_way) {
    throw ValidationError("relation pool has " + std::to_string(pool.size()) +
                          " relations, fewer than N = " + std::to_string(n_way));
  }
  std::vector<const std::string *> relations;
  for (const auto &[relation, instances] : pool) {
    if (instances.empty()) {
      throw ValidationError("relation '" + relation + "' has no instances");
    }
    relations.push_back(&relation);
  }
  // Partial Fisher-Yates: the first n_way slots become a uniform sample.
  for (int i = 0; i < n_way; ++i) {
    const size_t j = i + UniformIndex(rng, relations.size() - i);
    std::swap(relations[i], relations[j]);
  }
  Episode episode;
  for (int i = 0; i < n_way; ++i) {
    episode.candidate_relations.push_back(*relations[i]);
  }
  episode.gold = episode.candidate_relations[UniformIndex(rng, n_way)];
  const auto &instances = pool.at(episode.gold);
  episode.query = instances[UniformIndex(rng, instances.size())];
  return episode;
}

std::string EncoderEpisodeScorer::Top1(const Episode &episode) const {
  const LabelIndex index =
      LabelIndex::Build(episode.candidate_relations, encoder_);
  const Predictor predictor(encoder_, index, include_description_);
  return *predictor.TopK(episode.query, 1).selected.begin();
}

MetricsReport NwayZeroShotAccuracy(const EpisodeScorer &scorer,
                                   std::span<const Episode> episodes) {
  if (episodes.empty()) throw ValidationError("no episodes to score");
  int64_t correct = 0;
  for (const Episode &episode : episodes) {
    const std::string guess = scorer.Top1(episode);
    const auto &c = episode.candidate_relations;
    if (std::find(c.begin(), c.end(), guess) == c.end()) {
      throw ValidationError("scorer returned '" + guess +
                            "', which is not one of the episode candidates");
    }
    correct += guess == episode.gold;
  }
  MetricsReport report;
  report.protocol = Protocol::kNway;
  const double accuracy = static_cast<double>(correct) / episodes.size();
  report.accuracy = accuracy;
  report.precision = report.recall = report.f1 = accuracy;
  report.support_counts = {
      {"episodes", static_cast<int64_t>(episodes.size())},
      {"correct", correct},
      {"n_way", static_cast<int64_t>(episodes.front().candidate_relations.size())},
  };
  return report;
}

std::map<std::string, int64_t> CountLabels(std::span<const TypingInstance> train) {
  std::map<std::string, int64_t> counts;
  for (const TypingInstance &instance : train) {
    for (const std::string &label : instance.gold_labels) ++counts[label];
  }
  return counts;
}

std::optional<std::string> FrequencyBucket(int64_t count) {
  if (count == 0) return "0";
  if (count <= 5) return "1-5";
  if (count <= 10) return "6-10";
  return std::nullopt;
}

std::map<std::string, MetricsReport> BucketedMacroPrf(
    const LabelSets &gold, const LabelSets &pred,
    const std::map<std::string, int64_t> &train_counts,
    std::span<const std::string> candidate_labels) {
  if (gold.size() != pred.size()) {
    throw ValidationError("gold and predictions differ in length");
  }
  std::map<std::string, std::set<std::string>> buckets;
  for (const std::string &label : candidate_labels) {
    auto it = train_counts.find(label);
    const int64_t count = it == train_counts.end() ? 0 : it->second;
    if (auto bucket = FrequencyBucket(count)) buckets[*bucket].insert(label);
  }
  std::map<std::string, MetricsReport> out;
  for (const auto &[bucket, labels] : buckets) {
    LabelSets bucket_gold, bucket_pred;
    for (size_t i = 0; i < gold.size(); ++i) {
      std::set<std::string> g, p;
      for (const std::string &label : gold[i]) {
        if (labels.contains(label)) g.insert(label);
      }
      if (g.empty()) continue;
      for (const std::string &label : pred[i]) {
        if (labels.contains(label)) p.insert(label);
      }
      bucket_gold.push_back(std::move(g));
      bucket_pred.push_back(std::move(p));
    }
    if (!bucket_gold.empty()) out[bucket] = MacroPrf(bucket_gold, bucket_pred);
  }
  return out;
}

AblationReport RunDescriptionAblation(
    const std::function<MetricsReport(bool include_description)> &evaluate) {
  return {evaluate(true), evaluate(false)};
}

nlohmann::ordered_json ReportToJson(const MetricsReport &report,
                                    std::optional<int64_t> seed) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["protocol"] = std::string(ProtocolName(report.protocol));
  j["precision"] = report.precision;
  j["recall"] = report.recall;
  j["f1"] = report.f1;
  j["accuracy"] = report.accuracy ? nlohmann::ordered_json(*report.accuracy)
                                  : nlohmann::ordered_json(nullptr);
  j["support_counts"] = nlohmann::ordered_json::object();
  for (const auto &[key, value] : report.support_counts) {
    j["support_counts"][key] = value;
  }
  if (seed) j["seed"] = *seed;
  return j;
}

std::string FormatReportTable(const MetricsReport &report) {
  std::ostringstream os;
  os << std::left << std::setw(10) << "protocol" << std::setw(10) << "P"
     << std::setw(10) << "R" << std::setw(10) << "F1/acc" << "supports\n";
  os << std::setw(10) << ProtocolName(report.protocol) << std::fixed
     << std::setprecision(4) << std::setw(10) << report.precision
     << std::setw(10) << report.recall << std::setw(10)
     << (report.accuracy ? *report.accuracy : report.f1);
  bool first = true;
  for (const auto &[key, value] : report.support_counts) {
    os << (first ? "" : " ") << key << "=" << value;
    first = false;
  }
  os << "\n";
  return os.str();
}

}  // namespace semtype
