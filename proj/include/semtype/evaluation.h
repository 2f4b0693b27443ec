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

#ifndef SEMTYPE_EVALUATION_H_
#define SEMTYPE_EVALUATION_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "semtype/encoder.h"
#include "semtype/formatting.h"
#include "semtype/inference.h"
#include "semtype/training.h"

namespace semtype {

enum class Protocol { kMacro, kMicro, kNway };

std::string_view ProtocolName(Protocol protocol);
Protocol ParseProtocol(std::string_view name);

struct MetricsReport {
  Protocol protocol = Protocol::kMacro;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::optional<double> accuracy;
  std::map<std::string, int64_t> support_counts;
};

// Harmonic mean, 0 when both inputs are 0.
double HarmonicF1(double precision, double recall);

// Instance-averaged precision (over instances with at least one prediction)
// and recall (over all instances). When no instance has a prediction,
// precision is reported as 0 and support_counts["precision_undefined"] = 1.
// Throws ValidationError on misaligned input or an empty gold set.
MetricsReport MacroPrf(const LabelSets &gold, const LabelSets &pred);

// Single-label micro scores where `abstain` (e.g. "no_relation") counts
// neither as a prediction nor as a gold relation. With neither predictions
// nor gold relations the scores are vacuously 1.
MetricsReport MicroPrf(std::span<const std::string> gold,
                       std::span<const std::string> pred,
                       const std::string &abstain);

struct Episode {
  std::vector<std::string> candidate_relations;
  TypingInstance query;
  std::string gold;
};

using RelationPool = std::map<std::string, std::vector<TypingInstance>>;

// N distinct relations drawn uniformly, a uniform gold among them and a
// uniform query from the gold relation's instances.
Episode SampleEpisode(const RelationPool &pool, int n_way, Rng &rng);

// Groups instances by their single gold label.
RelationPool GroupByRelation(std::span<const TypingInstance> instances);

// Anything that can pick one of an episode's candidates.
class EpisodeScorer {
 public:
  virtual ~EpisodeScorer() = default;
  virtual std::string Top1(const Episode &episode) const = 0;
};

// Ranks an episode's candidates with a label index built over only those
// candidates.
class EncoderEpisodeScorer : public EpisodeScorer {
 public:
  explicit EncoderEpisodeScorer(const Encoder &encoder,
                                bool include_description = true)
      : encoder_(encoder), include_description_(include_description) {}
  std::string Top1(const Episode &episode) const override;

 private:
  const Encoder &encoder_;
  bool include_description_;
};

MetricsReport NwayZeroShotAccuracy(const EpisodeScorer &scorer,
                                   std::span<const Episode> episodes);

// Occurrence-count buckets for few-shot analysis: "0", "1-5", "6-10".
// Labels seen more than 10 times belong to no bucket.
std::map<std::string, int64_t> CountLabels(std::span<const TypingInstance> train);
std::optional<std::string> FrequencyBucket(int64_t count);

// Macro scores per bucket, restricting gold and predictions to the
// bucket's labels. Instances with no gold label in a bucket are skipped for
// that bucket; empty buckets are omitted.
std::map<std::string, MetricsReport> BucketedMacroPrf(
    const LabelSets &gold, const LabelSets &pred,
    const std::map<std::string, int64_t> &train_counts,
    std::span<const std::string> candidate_labels);

struct AblationReport {
  MetricsReport with_description;
  MetricsReport without_description;
};

// Runs the same evaluation with and without task descriptions.
AblationReport RunDescriptionAblation(
    const std::function<MetricsReport(bool include_description)> &evaluate);

nlohmann::ordered_json ReportToJson(const MetricsReport &report,
                                    std::optional<int64_t> seed = std::nullopt);

// Fixed-order table: protocol, P, R, F1/acc, supports.
std::string FormatReportTable(const MetricsReport &report);

}  // namespace semtype

#endif  // SEMTYPE_EVALUATION_H_
