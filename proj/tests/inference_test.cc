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

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.h"
#include "semtype/errors.h"
#include "semtype/evaluation.h"
#include "semtype/io.h"
#include "synthetic.h"

namespace semtype {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LabelIndex TwoRowIndex() {
  Eigen::MatrixXd rows(2, 2);
  rows << 1, 0, 0, 1;
  return LabelIndex::FromEmbeddings({"label1", "label2"}, rows, "ckpt");
}

std::vector<ScoredLabel> Scores(std::vector<std::pair<std::string, double>> items) {
  std::vector<ScoredLabel> out;
  for (auto &[l, s] : items) out.push_back({l, s});
  return out;
}

Encoder SmallEncoder(const std::vector<std::string> &labels) {
  std::vector<std::string> texts = {"the cat sat on the mat ."};
  for (const auto &l : labels) texts.push_back(VerbalizeLabel(l));
  EncoderConfig config;
  config.dim = 8;
  return Encoder::Create(config, Vocabulary::Build(texts), 4);
}

TEST(LabelIndexTest, BuildMatchesIndividualEncodes) {
  const std::vector<std::string> labels = {"per:spouse", "city", "org:founded_by"};
  const Encoder encoder = SmallEncoder(labels);
  const LabelIndex index = LabelIndex::Build(labels, encoder);
  ASSERT_EQ(index.size(), 3);
  EXPECT_EQ(index.dim(), 8);
  EXPECT_EQ(index.checkpoint_id(), encoder.CheckpointId());
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(Eigen::VectorXd(index.embeddings().row(i).transpose()),
              encoder.Encode(VerbalizeLabel(labels[i])).values());
    EXPECT_EQ(index.labels()[i].verbalized, VerbalizeLabel(labels[i]));
  }
}

TEST(LabelIndexTest, RejectsEmptyAndDuplicates) {
  const Encoder encoder = SmallEncoder({"a"});
  EXPECT_THROW(LabelIndex::Build({}, encoder), ValidationError);
  const std::vector<std::string> dup = {"a", "b", "a"};
  EXPECT_THROW(LabelIndex::Build(dup, encoder), ValidationError);
}

TEST(LabelIndexTest, UnseenLabelIsRankable) {
  const Encoder encoder = SmallEncoder({"city"});
  const std::vector<std::string> labels = {"city", "volcano_observatory"};
  const LabelIndex index = LabelIndex::Build(labels, encoder);
  const TypingInstance instance =
      testing::EntityInstance("q", "the", "cat", "sat .", {"city"});
  const Predictor predictor(encoder, index);
  EXPECT_EQ(predictor.Rank(instance).size(), 2u);
}

TEST(PredictorTest, RejectsStaleIndex) {
  Encoder encoder = SmallEncoder({"city"});
  const std::vector<std::string> labels = {"city"};
  const LabelIndex index = LabelIndex::Build(labels, encoder);
  encoder.parameter_values()[3] += 0.5;
  EXPECT_THROW(Predictor(encoder, index), ValidationError);
  const LabelIndex rebuilt = LabelIndex::Build(labels, encoder);
  EXPECT_NE(rebuilt.checkpoint_id(), index.checkpoint_id());
}

TEST(PredictorTest, ConsistentWithRankingPipeline) {
  const std::vector<std::string> labels = {"city", "river", "per:spouse", "bird"};
  const Encoder encoder = SmallEncoder(labels);
  const LabelIndex index = LabelIndex::Build(labels, encoder);
  const TypingInstance instance =
      testing::EntityInstance("q", "the", "cat", "sat on the mat .", {"city"});
  const Prediction top1 = PredictTopK(instance, index, encoder, 1);
  const auto ranked =
      RankLabels(encoder.Encode(FormatInput(instance, true).text).values(), index);
  EXPECT_EQ(top1.ranked, ranked);
  EXPECT_EQ(top1.selected, std::set<std::string>{ranked[0].label});
  const Prediction all = PredictThreshold(instance, index, encoder, -1.0);
  EXPECT_EQ(all.selected.size(), labels.size());
  EXPECT_EQ(all.ranked.front().label, *top1.selected.begin());
}

TEST(SelectTopKTest, Examples) {
  const LabelIndex index = TwoRowIndex();
  Eigen::VectorXd q(2);
  q << 0.9, 0.1;
  const Prediction p = SelectTopK("i", RankLabels(q, index), 1);
  EXPECT_EQ(p.selected, std::set<std::string>{"label1"});
  EXPECT_EQ(SelectTopK("i", RankLabels(q, index), 2).selected.size(), 2u);
  EXPECT_THROW(SelectTopK("i", RankLabels(q, index), 3), ValidationError);
  EXPECT_THROW(SelectTopK("i", RankLabels(q, index), 0), ValidationError);
}

TEST(SelectTopKTest, TiesBreakByLabel) {
  Eigen::MatrixXd rows(3, 2);
  rows << 1, 0, 2, 0, 0, 1;
  const LabelIndex index = LabelIndex::FromEmbeddings({"zeta", "alpha", "mid"}, rows, "c");
  Eigen::VectorXd q(2);
  q << 1, 0;
  const auto ranked = RankLabels(q, index);
  EXPECT_EQ(ranked[0].label, "alpha");
  EXPECT_EQ(ranked[1].label, "zeta");
  EXPECT_EQ(SelectTopK("i", ranked, 1).selected, std::set<std::string>{"alpha"});
}

TEST(SelectTopKTest, MatchesBruteForceAndIsScaleInvariant) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd rows(20, 4);
    std::vector<std::string> labels;
    for (int i = 0; i < 20; ++i) {
      labels.push_back("l" + std::to_string((i * 7) % 20));
      for (int j = 0; j < 4; ++j) rows(i, j) = normal(rng);
    }
    Eigen::VectorXd q(4);
    for (int j = 0; j < 4; ++j) q[j] = normal(rng);
    const LabelIndex index = LabelIndex::FromEmbeddings(labels, rows, "c");
    const LabelIndex scaled = LabelIndex::FromEmbeddings(labels, 3.5 * rows, "c");
    for (int k : {1, 5, 20}) {
      const auto oracle = testing::BruteForceTopK(q, rows, labels, k);
      const Prediction p = SelectTopK("i", RankLabels(q, index), k);
      EXPECT_EQ(p.selected, std::set<std::string>(oracle.begin(), oracle.end()));
      EXPECT_EQ(SelectTopK("i", RankLabels(Eigen::VectorXd(0.25 * q), scaled), k).selected,
                p.selected);
    }
  }
}

TEST(SelectByThresholdTest, Cases) {
  const auto scores = Scores({{"a", 0.9}, {"b", 0.6}, {"c", 0.2}});
  EXPECT_EQ(SelectByThreshold("i", scores, 0.5).selected, (std::set<std::string>{"a", "b"}));
  EXPECT_EQ(SelectByThreshold("i", scores, -1.0).selected.size(), 3u);
  EXPECT_TRUE(SelectByThreshold("i", scores, 1.0 + 1e-9).selected.empty());
  EXPECT_EQ(SelectByThreshold("i", scores, 0.6).selected, (std::set<std::string>{"a", "b"}));
}

TEST(SelectByThresholdTest, Nesting) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(-1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ScoredLabel> scores;
    for (int i = 0; i < 10; ++i) scores.push_back({"l" + std::to_string(i), unit(rng)});
    std::vector<double> taus;
    for (int i = 0; i < 20; ++i) taus.push_back(unit(rng));
    std::sort(taus.begin(), taus.end());
    for (size_t i = 1; i < taus.size(); ++i) {
      const auto lo = SelectByThreshold("i", scores, taus[i - 1]).selected;
      const auto hi = SelectByThreshold("i", scores, taus[i]).selected;
      EXPECT_TRUE(std::includes(lo.begin(), lo.end(), hi.begin(), hi.end()));
    }
  }
}

double MacroF1(const LabelSets &g, const LabelSets &p) { return MacroPrf(g, p).f1; }

TEST(TuneThresholdTest, SeparableDev) {
  std::vector<std::vector<ScoredLabel>> ranked = {
      Scores({{"a", 0.95}, {"b", 0.5}, {"c", 0.1}}),
      Scores({{"b", 0.8}, {"c", 0.85}, {"a", 0.3}}),
      Scores({{"c", 0.9}, {"a", 0.45}, {"b", -0.2}}),
  };
  const LabelSets gold = {{"a"}, {"b", "c"}, {"c"}};
  const double tau = TuneThreshold(ranked, gold, MacroF1);
  EXPECT_GT(tau, 0.5);
  EXPECT_LE(tau, 0.8);
  LabelSets pred;
  for (const auto &r : ranked) pred.push_back(SelectByThreshold("", r, tau).selected);
  EXPECT_EQ(MacroF1(gold, pred), 1.0);
}

TEST(TuneThresholdTest, DegenerateCases) {
  const std::vector<std::vector<ScoredLabel>> single = {Scores({{"a", 0.3}})};
  EXPECT_LE(TuneThreshold(single, {{"a"}}, MacroF1), 0.3);

  // Every candidate is a negative: the metric penalizes false positives.
  const std::vector<std::vector<ScoredLabel>> negatives = {
      Scores({{"a", 0.3}, {"b", 0.1}}), Scores({{"a", 0.7}, {"b", -0.4}})};
  const SetMetric fewer_false_positives = [](const LabelSets &g, const LabelSets &p) {
    double fp = 0;
    for (size_t i = 0; i < g.size(); ++i) {
      for (const auto &l : p[i]) fp += !g[i].contains(l);
    }
    return -fp;
  };
  EXPECT_EQ(TuneThreshold(negatives, {{}, {}}, fewer_false_positives), kInf);
  EXPECT_THROW(TuneThreshold(std::vector<std::vector<ScoredLabel>>{}, {}, MacroF1),
               ValidationError);
}

TEST(TuneThresholdTest, TiesPreferLowerThreshold) {
  // A constant metric makes every grid point tie.
  const std::vector<std::vector<ScoredLabel>> ranked = {Scores({{"a", 0.2}, {"b", 0.5}})};
  const SetMetric constant = [](const LabelSets &, const LabelSets &) { return 0.0; };
  EXPECT_EQ(TuneThreshold(ranked, {{"a"}}, constant), -kInf);
}

TEST(LabelEmbeddingFileTest, RoundTripAndLayout) {
  const std::vector<std::string> labels = {"per:spouse", "city", "org:founded_by"};
  const Encoder encoder = SmallEncoder(labels);
  const LabelIndex index = LabelIndex::Build(labels, encoder);
  const std::string dir = ::testing::TempDir() + "/label_file";
  WriteLabelEmbeddings(index, dir + "/l.emb", dir + "/l.txt", 42);

  const std::string bytes = ReadFile(dir + "/l.emb");
  const size_t newline = bytes.find('\n');
  const auto header = nlohmann::json::parse(bytes.substr(0, newline));
  EXPECT_EQ(header["schema_version"], 1);
  EXPECT_EQ(header["dim"], 8);
  EXPECT_EQ(header["count"], 3);
  EXPECT_EQ(header["dtype"], "f32-le");
  EXPECT_EQ(header["checkpoint_id"], encoder.CheckpointId());
  EXPECT_EQ(header["seed"], 42);
  ASSERT_EQ(bytes.size() - newline - 1, 3u * 8u * 4u);
  // Row 1, column 2, decoded by hand.
  const size_t offset = newline + 1 + (1 * 8 + 2) * 4;
  uint32_t bits = 0;
  for (int b = 3; b >= 0; --b) {
    bits = (bits << 8) | static_cast<unsigned char>(bytes[offset + b]);
  }
  float value;
  std::memcpy(&value, &bits, 4);
  EXPECT_EQ(value, static_cast<float>(index.embeddings()(1, 2)));
  EXPECT_EQ(ReadFile(dir + "/l.txt"), "per:spouse\ncity\norg:founded_by\n");

  const LabelIndex back = ReadLabelEmbeddings(dir + "/l.emb", dir + "/l.txt");
  EXPECT_EQ(back.checkpoint_id(), index.checkpoint_id());
  ASSERT_EQ(back.size(), 3);
  for (int r = 0; r < 3; ++r) {
    EXPECT_EQ(back.labels()[r].raw, labels[r]);
    for (int c = 0; c < 8; ++c) {
      EXPECT_EQ(back.embeddings()(r, c), static_cast<float>(index.embeddings()(r, c)));
    }
  }
}

TEST(LabelEmbeddingFileTest, RejectsTruncatedPayload) {
  const LabelIndex index = TwoRowIndex();
  const std::string dir = ::testing::TempDir() + "/label_file_bad";
  WriteLabelEmbeddings(index, dir + "/l.emb", dir + "/l.txt", 1);
  std::string bytes = ReadFile(dir + "/l.emb");
  bytes.pop_back();
  WriteFileAtomic(dir + "/l.emb", bytes);
  EXPECT_ANY_THROW(ReadLabelEmbeddings(dir + "/l.emb", dir + "/l.txt"));
}

}  // namespace
}  // namespace semtype
