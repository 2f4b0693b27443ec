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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails. Every tolerance and time budget is
// fixed here; none is read from the environment.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gradient_check.h"
#include "oracles.h"
#include "semtype/evaluation.h"
#include "semtype/formatting.h"
#include "semtype/inference.h"
#include "semtype/training.h"
#include "synthetic.h"

namespace semtype {
namespace {

using testing::CompositionalCorpus;
using testing::RelationCorpus;
using testing::TwelveTypeCorpus;
using testing::VocabularyFor;

// Desk-scale settings shared by the learning criteria. The margin is the
// library default; the learning rate suits a randomly initialized encoder.
constexpr int kDeskDim = 32;
constexpr double kDeskLearningRate = 1e-3;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Format(const char *fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

EncoderConfig DeskEncoder(int dim = kDeskDim, const std::string &backbone = "attention-pool") {
  EncoderConfig config;
  config.dim = dim;
  config.backbone_spec = backbone;
  return config;
}

TrainingConfig DeskTraining(int epochs, int batch_size = 64) {
  TrainingConfig config;
  config.learning_rate = kDeskLearningRate;
  config.epochs = epochs;
  config.batch_size = batch_size;
  config.seed = 1;
  return config;
}

double Top1Accuracy(const Encoder &encoder, std::span<const TypingInstance> instances,
                    std::span<const std::string> labels, bool include_description = true) {
  const LabelIndex index = LabelIndex::Build(labels, encoder);
  const Predictor predictor(encoder, index, include_description);
  int correct = 0;
  for (const TypingInstance &instance : instances) {
    correct += predictor.TopK(instance, 1).selected == instance.gold_labels;
  }
  return static_cast<double>(correct) / instances.size();
}

// 1. Hinge values on a grid. Similarities are s = i/50 - 1 and margins
// g/50, so the exact zero region is i - j >= g in integers.
Outcome LossCorrectness() {
  int checked = 0, value_mismatch = 0, region_mismatch = 0;
  for (int g : {0, 5, 15}) {
    const double margin = g / 50.0;
    for (int i = 0; i <= 100; ++i) {
      for (int j = 0; j <= 100; ++j) {
        const double sim_pos = i / 50.0 - 1.0;
        const double sim_neg = j / 50.0 - 1.0;
        const double loss = MarginLoss(sim_pos, sim_neg, margin);
        const double oracle = std::max(sim_neg - sim_pos + margin, 0.0);
        value_mismatch += loss != oracle;
        const bool exact_zero = i - j >= g;
        // Away from the boundary the loss is at least one grid step.
        if (exact_zero) {
          region_mismatch += loss > 1e-15;
        } else {
          region_mismatch += loss < 0.02 - 1e-12;
        }
        ++checked;
      }
    }
  }
  Outcome out;
  out.pass = checked == 3 * 101 * 101 && value_mismatch == 0 && region_mismatch == 0;
  out.detail = Format("%d points, %d value mismatches, %d zero-region mismatches", checked,
                      value_mismatch, region_mismatch);
  return out;
}

// 2. Analytic batch gradients against central differences.
Outcome GradientCheck() {
  const std::vector<TaskData> data = {TwelveTypeCorpus(3, 21), RelationCorpus(3, 22)};
  const Vocabulary vocab = VocabularyFor(data);
  Rng rng(2);
  double worst = 0;
  int cases = 0, active = 0, failures = 0;
  const double margins[] = {0.1, 0.3, 1.0, 2.0};
  for (int c = 0; c < 100; ++c) {
    const std::string backbone = c % 2 == 0 ? "attention-pool" : "mean-bag";
    Encoder encoder = Encoder::Create(DeskEncoder(6, backbone), vocab, 1000 + c);
    TrainingConfig config;
    config.margin = margins[UniformIndex(rng, 4)];
    const Trainer trainer(&encoder, config, 10);
    const auto stream = MixDatasets(data, {}, rng);
    auto triples = BuildTriples(stream, data, c % 3 != 0, rng);
    triples.resize(1 + UniformIndex(rng, 6));
    const auto cmp = testing::CompareGradients(&encoder, trainer, triples);
    const double err = cmp.RelativeError();
    worst = std::max(worst, err);
    failures += !(err < 1e-4);
    active += cmp.loss > 0;
    ++cases;
  }
  Outcome out;
  out.pass = cases == 100 && failures == 0 && active >= 50;
  out.detail = Format("%d cases (%d with active hinge), max relative error %.3g, "
                      "tolerance 1e-4", cases, active, worst);
  return out;
}

// 3. Ranking and top-k against a full sort.
Outcome RetrievalOracle() {
  Rng rng(3);
  std::normal_distribution<double> normal;
  int trials = 0, mismatches = 0, tie_trials = 0;
  for (int t = 0; t < 200; ++t) {
    Eigen::MatrixXd rows(50, 8);
    std::vector<std::string> labels;
    std::set<std::string> used;
    while (labels.size() < 50) {
      std::string name;
      const int len = 1 + UniformIndex(rng, 3);
      for (int i = 0; i < len; ++i) name += static_cast<char>('a' + UniformIndex(rng, 4));
      if (used.insert(name).second) labels.push_back(name);
    }
    for (int i = 0; i < 50; ++i) {
      for (int j = 0; j < 8; ++j) rows(i, j) = normal(rng);
    }
    // Every fourth trial copies rows (optionally doubled, which keeps the
    // cosine bitwise) so several labels tie exactly.
    if (t % 4 == 0) {
      ++tie_trials;
      for (int i = 1; i < 50; i += 2) rows.row(i) = (i % 4 == 1 ? 1.0 : 2.0) * rows.row(i - 1);
    }
    Eigen::VectorXd query(8);
    for (int j = 0; j < 8; ++j) query[j] = normal(rng);
    if (t % 8 == 4) query = rows.row(6).transpose();
    const LabelIndex index = LabelIndex::FromEmbeddings(labels, rows, "oracle");
    const std::vector<ScoredLabel> ranked = RankLabels(query, index);
    const auto full = testing::BruteForceTopK(query, rows, labels, 50);
    for (int i = 0; i < 50; ++i) mismatches += ranked[i].label != full[i];
    for (int k : {1, 5, 50}) {
      const auto oracle = testing::BruteForceTopK(query, rows, labels, k);
      const Prediction p = SelectTopK("q", ranked, k);
      mismatches += p.selected != std::set<std::string>(oracle.begin(), oracle.end());
    }
    ++trials;
  }
  Outcome out;
  out.pass = trials == 200 && mismatches == 0;
  out.detail = Format("%d indexes (%d with exact ties), k in {1,5,50}, %d mismatches",
                      trials, tie_trials, mismatches);
  return out;
}

// 4. Metric fixtures and an exhaustive micro sweep.
Outcome MetricOracles() {
  const MetricsReport macro = MacroPrf({{"person", "artist"}, {"company"}}, {{"person"}, {}});
  const std::vector<std::string> gold = {"r1", "no_relation", "r2"};
  const std::vector<std::string> pred = {"r1", "r2", "no_relation"};
  const MetricsReport micro = MicroPrf(gold, pred, "no_relation");
  const bool fixtures = std::abs(macro.precision - 1.0) <= 1e-9 &&
                        std::abs(macro.recall - 0.25) <= 1e-9 &&
                        std::abs(macro.f1 - 0.4) <= 1e-9 &&
                        std::abs(micro.precision - 0.5) <= 1e-9 &&
                        std::abs(micro.recall - 0.5) <= 1e-9 &&
                        std::abs(micro.f1 - 0.5) <= 1e-9;
  const std::vector<std::string> alphabet = {"r1", "r2", "NA"};
  int assignments = 0, mismatches = 0;
  for (int code = 0; code < 729; ++code) {
    std::vector<std::string> g(3), p(3);
    int c = code;
    for (int i = 0; i < 3; ++i, c /= 3) g[i] = alphabet[c % 3];
    for (int i = 0; i < 3; ++i, c /= 3) p[i] = alphabet[c % 3];
    const MetricsReport r = MicroPrf(g, p, "NA");
    const testing::MicroOracle o = testing::CountMicro(g, p, "NA");
    mismatches += r.precision != o.precision || r.recall != o.recall || r.f1 != o.f1;
    ++assignments;
  }
  Outcome out;
  out.pass = fixtures && assignments == 729 && mismatches == 0;
  out.detail = Format("macro P=%.9f R=%.9f F1=%.9f; micro P=%.9f R=%.9f F1=%.9f; "
                      "%d assignments, %d mismatches",
                      macro.precision, macro.recall, macro.f1, micro.precision,
                      micro.recall, micro.f1, assignments, mismatches);
  return out;
}

// 5. Overfitting a twelve-type corpus.
Outcome EndToEndLearning() {
  const std::vector<TaskData> data = {TwelveTypeCorpus(20, 7)};
  Encoder encoder = Encoder::Create(DeskEncoder(), VocabularyFor(data), 3);
  const double before = Top1Accuracy(encoder, data[0].instances, data[0].labels);
  const TrainResult result = TrainLoop(&encoder, data, DeskTraining(200), {});
  const double after = Top1Accuracy(encoder, data[0].instances, data[0].labels);
  Outcome out;
  out.pass = data[0].instances.size() == 240 && after >= 0.95;
  out.detail = Format("240 instances, 12 labels, 200 epochs, margin %.1f: train top-1 "
                      "%.4f -> %.4f (threshold 0.95), loss %.4f -> %.4f",
                      TrainingConfig{}.margin, before, after, result.epoch_losses.front(),
                      result.epoch_losses.back());
  return out;
}

// 6. Unseen labels that recombine seen words.
Outcome ZeroShotGeneralization() {
  const CompositionalCorpus corpus = testing::MakeCompositionalCorpus(20, 500, 11);
  const std::vector<TaskData> data = {corpus.train};
  Encoder encoder = Encoder::Create(DeskEncoder(), VocabularyFor(data, corpus.all_labels), 3);
  TrainLoop(&encoder, data, DeskTraining(100), {});
  // Candidates are all sixteen labels, so a uniform guess is right 1/16 of
  // the time.
  const double baseline = 1.0 / corpus.all_labels.size();
  const double accuracy = Top1Accuracy(encoder, corpus.held_out_test, corpus.all_labels);
  bool unseen = true;
  for (const TypingInstance &t : corpus.train.instances) {
    for (const std::string &l : corpus.held_out_labels) unseen &= !t.gold_labels.contains(l);
  }
  Outcome out;
  out.pass = unseen && corpus.held_out_labels.size() == 4 &&
             corpus.held_out_test.size() == 500 && accuracy >= 3 * baseline;
  out.detail = Format("4 held-out labels, 500 test instances: top-1 %.4f vs random "
                      "baseline %.4f (need >= %.4f)", accuracy, baseline, 3 * baseline);
  return out;
}

// 7. Joint training against single-task runs with the same total steps.
Outcome MultiTaskParity() {
  const TaskData typing = TwelveTypeCorpus(20, 7, "typing");
  const TaskData relation = RelationCorpus(32, 5, "relation");
  const TaskData typing_test = TwelveTypeCorpus(10, 70, "typing");
  const TaskData relation_test = RelationCorpus(10, 50, "relation");
  const std::vector<TaskData> both = {typing, relation};
  const Vocabulary vocab = VocabularyFor(both);
  // 240 + 192 triples per epoch, both divisible by the batch size, so the
  // joint run takes exactly as many steps as the two single runs together.
  const int epochs = 100;
  const TrainingConfig config = DeskTraining(epochs, 16);

  auto run = [&](const std::vector<TaskData> &tasks, double *typing_acc,
                 double *relation_acc) {
    Encoder encoder = Encoder::Create(DeskEncoder(), vocab, 3);
    const TrainResult r = TrainLoop(&encoder, tasks, config, {});
    if (typing_acc) *typing_acc = Top1Accuracy(encoder, typing_test.instances, typing.labels);
    if (relation_acc) {
      *relation_acc = Top1Accuracy(encoder, relation_test.instances, relation.labels);
    }
    return r.steps;
  };
  double single_typing = 0, single_relation = 0, joint_typing = 0, joint_relation = 0;
  const int64_t steps_typing = run({typing}, &single_typing, nullptr);
  const int64_t steps_relation = run({relation}, nullptr, &single_relation);
  const int64_t steps_joint = run(both, &joint_typing, &joint_relation);
  const double gap_typing = std::abs(joint_typing - single_typing);
  const double gap_relation = std::abs(joint_relation - single_relation);
  Outcome out;
  out.pass = steps_joint == steps_typing + steps_relation && gap_typing <= 0.05 &&
             gap_relation <= 0.05;
  out.detail = Format("steps %lld+%lld vs joint %lld; typing %.4f single / %.4f joint, "
                      "relation %.4f single / %.4f joint (max gap 0.05)",
                      static_cast<long long>(steps_typing),
                      static_cast<long long>(steps_relation),
                      static_cast<long long>(steps_joint), single_typing, joint_typing,
                      single_relation, joint_relation);
  return out;
}

// 8. Threshold nesting and tuning.
Outcome ThresholdBehavior() {
  const TaskData data = TwelveTypeCorpus(9, 13);
  const std::vector<TaskData> tasks = {data};
  const Encoder encoder = Encoder::Create(DeskEncoder(), VocabularyFor(tasks), 8);
  const LabelIndex index = LabelIndex::Build(data.labels, encoder);
  const Predictor predictor(encoder, index);
  Rng rng(8);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  int instances = 0, violations = 0;
  for (int i = 0; i < 100; ++i) {
    const TypingInstance &instance = data.instances[UniformIndex(rng, data.instances.size())];
    std::vector<double> taus(20);
    for (double &t : taus) t = unit(rng);
    std::sort(taus.begin(), taus.end());
    std::vector<std::set<std::string>> selected;
    for (double t : taus) selected.push_back(predictor.Threshold(instance, t).selected);
    for (size_t a = 0; a < taus.size(); ++a) {
      for (size_t b = a + 1; b < taus.size(); ++b) {
        violations += !std::includes(selected[a].begin(), selected[a].end(),
                                     selected[b].begin(), selected[b].end());
      }
    }
    ++instances;
  }

  // Separable dev: positives in [0.8, 1], negatives in [-1, 0.5].
  std::uniform_real_distribution<double> pos(0.8, 1.0), neg(-1.0, 0.5);
  std::vector<std::vector<ScoredLabel>> ranked;
  LabelSets gold;
  for (int i = 0; i < 50; ++i) {
    std::vector<ScoredLabel> scores;
    std::set<std::string> g;
    for (int l = 0; l < 10; ++l) {
      const std::string label = "t" + std::to_string(l);
      const bool positive = l == i % 10 || UniformIndex(rng, 4) == 0;
      if (positive) g.insert(label);
      scores.push_back({label, positive ? pos(rng) : neg(rng)});
    }
    scores.push_back({"edge_pos", 0.8});
    scores.push_back({"edge_neg", 0.5});
    g.insert("edge_pos");
    ranked.push_back(scores);
    gold.push_back(g);
  }
  const SetMetric macro_f1 = [](const LabelSets &g, const LabelSets &p) {
    return MacroPrf(g, p).f1;
  };
  const double tau = TuneThreshold(ranked, gold, macro_f1);
  LabelSets pred;
  for (const auto &r : ranked) pred.push_back(SelectByThreshold("", r, tau).selected);
  const double f1 = macro_f1(gold, pred);
  Outcome out;
  out.pass = instances == 100 && violations == 0 && tau > 0.5 && tau <= 0.8 && f1 == 1.0;
  out.detail = Format("%d instances x 20 thresholds, %d nesting violations; tuned tau "
                      "%.4f in (0.5, 0.8], dev F1 %.4f",
                      instances, violations, tau, f1);
  return out;
}

class GoldOracle : public EpisodeScorer {
 public:
  std::string Top1(const Episode &e) const override { return e.gold; }
};

class UniformGuess : public EpisodeScorer {
 public:
  explicit UniformGuess(uint64_t seed) : rng_(seed) {}
  std::string Top1(const Episode &e) const override {
    return e.candidate_relations[UniformIndex(rng_, e.candidate_relations.size())];
  }

 private:
  mutable Rng rng_;
};

// 9. Episodic protocol.
Outcome EpisodicProtocol() {
  const TaskData data = RelationCorpus(5, 31);
  RelationPool pool = GroupByRelation(data.instances);
  // Ten relations: the six of the corpus plus four renamed copies.
  for (int extra = 0; extra < 4; ++extra) {
    const std::string name = "extra_" + std::to_string(extra);
    for (TypingInstance copy : pool.begin()->second) {
      copy.gold_labels = {name};
      pool[name].push_back(copy);
    }
  }
  const int episodes = 10000;
  const double chi2_99_9dof = 21.665994333461924;
  bool pass = pool.size() == 10;
  std::ostringstream detail;
  Rng rng(9);
  for (int n : {5, 10}) {
    std::vector<Episode> sampled;
    std::map<std::string, int> gold_counts;
    for (int i = 0; i < episodes; ++i) {
      sampled.push_back(SampleEpisode(pool, n, rng));
      ++gold_counts[sampled.back().gold];
    }
    const double oracle = *NwayZeroShotAccuracy(GoldOracle(), sampled).accuracy;
    const double random = *NwayZeroShotAccuracy(UniformGuess(100 + n), sampled).accuracy;
    const double p = 1.0 / n;
    const double sigma = std::sqrt(p * (1 - p) / episodes);
    double chi2 = 0;
    const double expected = episodes / 10.0;
    for (const auto &[relation, count] : gold_counts) {
      chi2 += (count - expected) * (count - expected) / expected;
    }
    chi2 += (10 - static_cast<int>(gold_counts.size())) * expected;
    pass &= oracle == 1.0 && std::abs(random - p) <= 3 * sigma && chi2 < chi2_99_9dof;
    detail << Format("N=%d: oracle %.4f, random %.4f (1/N=%.4f, 3 sigma=%.4f), "
                     "gold chi2 %.2f < %.2f; ",
                     n, oracle, random, p, 3 * sigma, chi2, chi2_99_9dof);
  }
  Outcome out;
  out.pass = pass;
  out.detail = detail.str();
  out.detail.resize(out.detail.size() - 2);
  return out;
}

// 10. Formatting without descriptions, and the ablation harness around it.
Outcome AblationHarness() {
  std::vector<TypingInstance> fixtures = {
      {"ritek", TaskKind::kLexicalEntity,
       {"Currently", "Ritek", "is", "the", "largest", "producer", "of", "OLEDs", "."},
       {{1, 2, SpanRole::kEntity, std::nullopt}}, {"company"}},
      {"herrera", TaskKind::kRelational,
       {"Herrera", "'s", "wife", "Ramona", "died", "in", "1991", "."},
       {{0, 1, SpanRole::kSubject, "person"}, {3, 4, SpanRole::kObject, "person"}},
       {"per:spouse"}},
      {"siege", TaskKind::kLexicalEvent,
       {"The", "siege", "began", "on", "15", "September", "."},
       {{2, 3, SpanRole::kTrigger, std::nullopt}}, {"Process_start"}},
  };
  for (const TaskData &d : {TwelveTypeCorpus(20, 7), RelationCorpus(32, 5),
                            testing::MakeCompositionalCorpus(20, 0, 11).train}) {
    fixtures.insert(fixtures.end(), d.instances.begin(), d.instances.end());
  }
  int checked = 0, failures = 0;
  for (const TypingInstance &instance : fixtures) {
    const std::string with = FormatInput(instance, true).text;
    const std::string without = FormatInput(instance, false).text;
    failures += !(without.size() < with.size() && with.compare(0, without.size(), without) == 0);
    ++checked;
  }

  // The harness evaluates one trained model under both settings.
  const std::vector<TaskData> data = {TwelveTypeCorpus(20, 7)};
  Encoder encoder = Encoder::Create(DeskEncoder(), VocabularyFor(data), 3);
  TrainLoop(&encoder, data, DeskTraining(20), {});
  const LabelIndex index = LabelIndex::Build(data[0].labels, encoder);
  const AblationReport report = RunDescriptionAblation([&](bool include) {
    const Predictor predictor(encoder, index, include);
    LabelSets gold, pred;
    for (const TypingInstance &t : data[0].instances) {
      gold.push_back(t.gold_labels);
      pred.push_back(predictor.TopK(t, 1).selected);
    }
    return MacroPrf(gold, pred);
  });
  Outcome out;
  out.pass = checked > 0 && failures == 0;
  out.detail = Format("%d formatted inputs, %d not strict prefixes; ablation F1 with "
                      "description %.4f, without %.4f",
                      checked, failures, report.with_description.f1,
                      report.without_description.f1);
  return out;
}

struct Criterion {
  int id;
  const char *name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace semtype

int main() {
  using namespace semtype;
  const std::vector<Criterion> criteria = {
      {1, "loss correctness", 1, LossCorrectness},
      {2, "gradient check", 120, GradientCheck},
      {3, "retrieval oracle", 60, RetrievalOracle},
      {4, "metric oracles", 60, MetricOracles},
      {5, "end-to-end learning", 300, EndToEndLearning},
      {6, "zero-shot label generalization", 300, ZeroShotGeneralization},
      {7, "multi-task parity", 600, MultiTaskParity},
      {8, "threshold behavior", 60, ThresholdBehavior},
      {9, "episodic protocol", 120, EpisodicProtocol},
      {10, "ablation harness", 10, AblationHarness},
  };
  int failed = 0;
  for (const Criterion &c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception &e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds < c.budget_seconds;
    const bool pass = outcome.pass && in_time;
    failed += !pass;
    std::printf("criterion %2d %s: %s | %s | %.2f s (budget %.0f s)\n", c.id,
                pass ? "PASS" : "FAIL", c.name, outcome.detail.c_str(), seconds,
                c.budget_seconds);
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
