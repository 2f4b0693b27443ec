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

#include "semtype/pipeline.h"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "semtype/checkpoint.h"
#include "semtype/errors.h"
#include "semtype/io.h"

namespace semtype {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

constexpr int kRankedTopN = 10;

std::string Resolve(const fs::path &base, const std::string &path) {
  const fs::path p(path);
  return p.is_absolute() ? p.string() : (base / p).lexically_normal().string();
}

template <typename T>
T Get(const json &j, const char *key, const std::string &where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception &e) {
    throw ValidationError(where + ": field '" + key + "': " + e.what());
  }
}

template <typename T>
T GetOr(const json &j, const char *key, T fallback, const std::string &where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return Get<T>(j, key, where);
}

TrainingConfig TrainingFromJson(const json &j, const std::string &where) {
  if (!j.is_object()) throw ValidationError(where + ": training must be an object");
  static const std::set<std::string> kKeys = {
      "margin",       "learning_rate",      "batch_size", "epochs",
      "warmup_ratio", "gradient_clip_norm", "seed",       "upsampling_factors"};
  for (const auto &item : j.items()) {
    if (!kKeys.contains(item.key())) {
      throw ValidationError(where + ": unknown training key '" + item.key() + "'");
    }
  }
  TrainingConfig c;
  c.margin = GetOr(j, "margin", c.margin, where);
  c.learning_rate = GetOr(j, "learning_rate", c.learning_rate, where);
  c.batch_size = GetOr(j, "batch_size", c.batch_size, where);
  c.epochs = GetOr(j, "epochs", c.epochs, where);
  c.warmup_ratio = GetOr(j, "warmup_ratio", c.warmup_ratio, where);
  c.gradient_clip_norm = GetOr(j, "gradient_clip_norm", c.gradient_clip_norm, where);
  c.seed = GetOr<int64_t>(j, "seed", c.seed, where);
  c.upsampling_factors = GetOr(j, "upsampling_factors", c.upsampling_factors, where);
  c.Validate();
  return c;
}

ordered_json TauJson(double tau) {
  if (std::isinf(tau)) return tau > 0 ? "inf" : "-inf";
  return tau;
}

double TauFromJson(const json &j, const std::string &where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw ValidationError(where + ": tau must be a number, \"inf\" or \"-inf\"");
}

struct Options {
  std::string config;
  std::string task;
  std::string protocol;
  std::string split;
  std::string predictions;
  std::string output;
  std::optional<int> k;
  std::optional<double> tau;
  int n_way = 5;
  int episodes = 1000;
  std::optional<int64_t> seed;
  bool no_task_description = false;
};

struct Context {
  RunConfig config;
  int64_t seed = 0;
  bool include_description = true;
  std::string output_dir;
};

Context MakeContext(const Options &opts) {
  Context ctx;
  ctx.config = LoadRunConfig(opts.config);
  ctx.seed = opts.seed.value_or(ctx.config.seed);
  ctx.config.training.seed = ctx.seed;
  ctx.include_description =
      ctx.config.include_description && !opts.no_task_description;
  ctx.output_dir = opts.output.empty() ? ctx.config.output_dir : opts.output;
  return ctx;
}

Dataset LoadSplit(const DatasetSpec &spec, const std::string &split) {
  std::optional<std::string> path;
  if (split == "train") path = spec.instances_path;
  else if (split == "dev") path = spec.dev_path;
  else if (split == "test") path = spec.test_path;
  else throw ValidationError("unknown split '" + split + "'");
  if (!path) {
    throw ValidationError("task '" + spec.task_id + "' has no " + split + " split");
  }
  return LoadDataset(*path, spec.labels_path, spec.task_kind);
}

Encoder LoadModel(const Context &ctx) {
  const std::string path = CheckpointPath(ctx.output_dir);
  if (!fs::exists(path)) {
    throw ValidationError("no checkpoint at " + path + "; run train first");
  }
  return LoadCheckpoint(path);
}

// Reuses an exported label-embedding file when it matches the checkpoint.
LabelIndex IndexFor(const Encoder &encoder, const Context &ctx,
                    const DatasetSpec &spec, const Dataset &data) {
  const std::string emb = LabelEmbeddingsPath(ctx.output_dir, spec.task_id);
  const std::string txt = LabelListPath(ctx.output_dir, spec.task_id);
  if (fs::exists(emb) && fs::exists(txt)) {
    LabelIndex index = ReadLabelEmbeddings(emb, txt);
    if (index.checkpoint_id() == encoder.CheckpointId() &&
        index.dim() == encoder.config().dim) {
      return index;
    }
  }
  return LabelIndex::Build(data.labels, encoder);
}

double ReadThreshold(const Context &ctx, const std::string &task_id) {
  const std::string path = ThresholdPath(ctx.output_dir, task_id);
  if (!fs::exists(path)) {
    throw ValidationError("task '" + task_id +
                          "' uses threshold selection; pass --tau or run "
                          "tune-threshold first");
  }
  json j;
  try {
    j = json::parse(ReadFile(path));
  } catch (const json::exception &e) {
    throw RuntimeFailure(path + ": " + e.what());
  }
  return TauFromJson(j.at("tau"), path);
}

std::vector<Prediction> PredictAll(const Predictor &predictor,
                                   std::span<const TypingInstance> instances,
                                   const Selection &selection, double tau) {
  std::vector<Prediction> out;
  out.reserve(instances.size());
  for (const TypingInstance &instance : instances) {
    if (selection.kind == Selection::Kind::kTopK) {
      out.push_back(predictor.TopK(instance, selection.k));
    } else {
      out.push_back(predictor.Threshold(instance, tau));
    }
  }
  return out;
}

struct StoredPrediction {
  std::set<std::string> selected;
  std::vector<std::string> ranked;
};

std::map<std::string, StoredPrediction> ReadPredictions(const std::string &path) {
  std::istringstream in(ReadFile(path));
  std::map<std::string, StoredPrediction> out;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(line_number);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception &e) {
      throw ValidationError(where + ": malformed JSON: " + e.what());
    }
    StoredPrediction p;
    const std::string id = Get<std::string>(j, "instance_id", where);
    for (const auto &label : Get<std::vector<std::string>>(j, "selected", where)) {
      p.selected.insert(label);
    }
    if (j.contains("ranked_topN")) {
      for (const auto &entry : j.at("ranked_topN")) {
        p.ranked.push_back(Get<std::string>(entry, "label", where));
      }
    }
    out[id] = std::move(p);
  }
  return out;
}

// Top-ranked selected label, or `abstain` when nothing was selected.
std::string SingleLabel(const StoredPrediction &p, const std::string &abstain) {
  if (p.selected.empty()) return abstain;
  for (const std::string &label : p.ranked) {
    if (p.selected.contains(label)) return label;
  }
  return *p.selected.begin();
}

StoredPrediction Store(const Prediction &p) {
  StoredPrediction s;
  s.selected = p.selected;
  for (const ScoredLabel &r : p.ranked) s.ranked.push_back(r.label);
  return s;
}

std::string SingleGold(const TypingInstance &instance) {
  if (instance.gold_labels.size() != 1) {
    throw ValidationError("micro scoring needs exactly one gold label; '" +
                          instance.id + "' has " +
                          std::to_string(instance.gold_labels.size()));
  }
  return *instance.gold_labels.begin();
}

MetricsReport ScoreStored(const DatasetSpec &spec, Protocol protocol,
                          std::span<const TypingInstance> instances,
                          const std::map<std::string, StoredPrediction> &preds) {
  auto lookup = [&](const TypingInstance &instance) -> const StoredPrediction & {
    auto it = preds.find(instance.id);
    if (it == preds.end()) {
      throw ValidationError("no prediction for instance '" + instance.id + "'");
    }
    return it->second;
  };
  if (protocol == Protocol::kMacro) {
    LabelSets gold, pred;
    for (const TypingInstance &instance : instances) {
      gold.push_back(instance.gold_labels);
      pred.push_back(lookup(instance).selected);
    }
    return MacroPrf(gold, pred);
  }
  std::vector<std::string> gold, pred;
  for (const TypingInstance &instance : instances) {
    gold.push_back(SingleGold(instance));
    pred.push_back(SingleLabel(lookup(instance), spec.abstain_label));
  }
  return MicroPrf(gold, pred, spec.abstain_label);
}

int Train(const Options &opts, std::ostream &out) {
  Context ctx = MakeContext(opts);
  std::map<std::string, int> factors;
  std::vector<TaskData> data = LoadTrainingData(ctx.config, &factors);
  TrainingConfig training = ctx.config.training;
  training.upsampling_factors = factors;

  std::vector<std::pair<const DatasetSpec *, Dataset>> dev_sets;
  for (const DatasetSpec &spec : ctx.config.datasets) {
    if (spec.dev_path) dev_sets.emplace_back(&spec, LoadSplit(spec, "dev"));
  }

  Encoder encoder = Encoder::Create(ctx.config.encoder,
                                    BuildRunVocabulary(ctx.config, data),
                                    static_cast<uint64_t>(ctx.seed));
  fs::create_directories(ctx.output_dir);
  const std::string checkpoint = CheckpointPath(ctx.output_dir);
  SaveCheckpoint(encoder, checkpoint, ctx.seed);

  std::string log;
  std::string dev_log;
  TrainOptions options;
  options.include_description = ctx.include_description;
  options.dev_every_epochs = ctx.config.dev_every_epochs;
  options.on_step = [&](const StepRecord &r) {
    ordered_json j;
    j["schema_version"] = 1;
    j["seed"] = ctx.seed;
    j["step"] = r.step;
    j["epoch"] = r.epoch;
    j["task"] = r.task;
    j["loss"] = r.loss;
    j["grad_norm"] = r.grad_norm;
    j["lr"] = r.learning_rate;
    log += j.dump();
    log += '\n';
  };
  int last_dev_epoch = -1;
  double last_dev = 0;
  if (!dev_sets.empty()) {
    options.dev_metric = [&](const Encoder &e) {
      double total = 0;
      for (const auto &[spec, dev] : dev_sets) {
        total += DevScore(e, *spec, dev, ctx.include_description);
      }
      return total / dev_sets.size();
    };
  }
  options.persist = [&](const Encoder &e, int epoch) {
    SaveCheckpoint(e, checkpoint, ctx.seed);
    WriteFileAtomic(TrainLogPath(ctx.output_dir), log);
    last_dev_epoch = epoch;
  };

  const TrainResult result = TrainLoop(&encoder, data, training, options);
  WriteFileAtomic(TrainLogPath(ctx.output_dir), log);

  for (size_t i = 0; i < result.dev_history.size(); ++i) {
    ordered_json j;
    j["schema_version"] = 1;
    j["seed"] = ctx.seed;
    j["evaluation"] = i;
    j["score"] = result.dev_history[i];
    dev_log += j.dump();
    dev_log += '\n';
    last_dev = result.dev_history[i];
  }
  WriteFileAtomic((fs::path(ctx.output_dir) / "dev_history.jsonl").string(),
                  dev_log);

  ordered_json summary;
  summary["schema_version"] = 1;
  summary["seed"] = ctx.seed;
  summary["steps"] = result.steps;
  summary["epoch_losses"] = result.epoch_losses;
  summary["best_epoch"] = result.best_epoch;
  summary["best_dev"] = dev_sets.empty() ? ordered_json(nullptr)
                                         : ordered_json(result.best_dev);
  summary["checkpoint_epoch"] = last_dev_epoch;
  WriteFileAtomic((fs::path(ctx.output_dir) / "train_summary.json").string(),
                  summary.dump(2) + "\n");

  out << "trained " << result.steps << " steps over " << training.epochs
      << " epochs";
  if (!result.epoch_losses.empty()) {
    out << "; loss " << result.epoch_losses.front() << " -> "
        << result.epoch_losses.back();
  }
  if (!dev_sets.empty()) out << "; best dev " << result.best_dev;
  (void)last_dev;
  out << "\ncheckpoint: " << checkpoint << "\n";
  return 0;
}

std::vector<const DatasetSpec *> SelectTasks(const Context &ctx,
                                             const std::string &task) {
  std::vector<const DatasetSpec *> specs;
  if (task.empty()) {
    for (const DatasetSpec &spec : ctx.config.datasets) specs.push_back(&spec);
  } else {
    specs.push_back(&ctx.config.Task(task));
  }
  return specs;
}

int EmbedLabels(const Options &opts, std::ostream &out) {
  const Context ctx = MakeContext(opts);
  const Encoder encoder = LoadModel(ctx);
  for (const DatasetSpec *spec : SelectTasks(ctx, opts.task)) {
    const LabelIndex index =
        LabelIndex::Build(ReadLabels(spec->labels_path), encoder);
    WriteLabelEmbeddings(index, LabelEmbeddingsPath(ctx.output_dir, spec->task_id),
                         LabelListPath(ctx.output_dir, spec->task_id), ctx.seed);
    out << spec->task_id << ": " << index.size() << " labels -> "
        << LabelEmbeddingsPath(ctx.output_dir, spec->task_id) << "\n";
  }
  return 0;
}

int TuneThresholdCommand(const Options &opts, std::ostream &out) {
  if (opts.task.empty()) throw ValidationError("tune-threshold needs --task");
  const Context ctx = MakeContext(opts);
  const DatasetSpec &spec = ctx.config.Task(opts.task);
  const Dataset dev = LoadSplit(spec, opts.split.empty() ? "dev" : opts.split);
  const Encoder encoder = LoadModel(ctx);
  const LabelIndex index = IndexFor(encoder, ctx, spec, dev);
  const double tau = TuneThreshold(
      dev.instances, index, encoder,
      [](const LabelSets &g, const LabelSets &p) { return MacroPrf(g, p).f1; },
      ctx.include_description);
  ordered_json j;
  j["schema_version"] = 1;
  j["seed"] = ctx.seed;
  j["task"] = spec.task_id;
  j["tau"] = TauJson(tau);
  WriteFileAtomic(ThresholdPath(ctx.output_dir, spec.task_id), j.dump(2) + "\n");
  out << j.dump() << "\n";
  return 0;
}

Selection ResolveSelection(const Options &opts, const DatasetSpec &spec,
                           const Context &ctx, double *tau) {
  if (opts.k && opts.tau) throw ValidationError("pass either --k or --tau, not both");
  if (opts.k) return {Selection::Kind::kTopK, *opts.k};
  if (opts.tau) {
    *tau = *opts.tau;
    return {Selection::Kind::kThreshold, 1};
  }
  if (spec.selection.kind == Selection::Kind::kThreshold) {
    *tau = ReadThreshold(ctx, spec.task_id);
  }
  return spec.selection;
}

int Predict(const Options &opts, std::ostream &out) {
  if (opts.task.empty()) throw ValidationError("predict needs --task");
  const Context ctx = MakeContext(opts);
  const DatasetSpec &spec = ctx.config.Task(opts.task);
  const std::string split = opts.split.empty() ? "test" : opts.split;
  const Dataset data = LoadSplit(spec, split);
  double tau = 0;
  const Selection selection = ResolveSelection(opts, spec, ctx, &tau);
  const Encoder encoder = LoadModel(ctx);
  const LabelIndex index = IndexFor(encoder, ctx, spec, data);
  const Predictor predictor(encoder, index, ctx.include_description);
  const std::vector<Prediction> predictions =
      PredictAll(predictor, data.instances, selection, tau);

  std::string lines;
  for (const Prediction &p : predictions) {
    ordered_json j;
    j["schema_version"] = 1;
    j["seed"] = ctx.seed;
    j["instance_id"] = p.instance_id;
    j["selected"] = std::vector<std::string>(p.selected.begin(), p.selected.end());
    j["ranked_topN"] = ordered_json::array();
    for (size_t i = 0; i < p.ranked.size() && i < kRankedTopN; ++i) {
      ordered_json r;
      r["label"] = p.ranked[i].label;
      r["score"] = p.ranked[i].score;
      j["ranked_topN"].push_back(std::move(r));
    }
    lines += j.dump();
    lines += '\n';
  }
  const std::string path = PredictionsPath(ctx.output_dir, spec.task_id, split);
  WriteFileAtomic(path, lines);
  out << predictions.size() << " predictions -> " << path << "\n";
  return 0;
}

int Evaluate(const Options &opts, std::ostream &out) {
  if (opts.task.empty()) throw ValidationError("evaluate needs --task");
  const Context ctx = MakeContext(opts);
  const DatasetSpec &spec = ctx.config.Task(opts.task);
  const std::string split = opts.split.empty() ? "test" : opts.split;
  const Dataset data = LoadSplit(spec, split);
  const Protocol protocol =
      opts.protocol.empty() ? spec.EffectiveProtocol() : ParseProtocol(opts.protocol);

  MetricsReport report;
  if (protocol == Protocol::kNway) {
    const Encoder encoder = LoadModel(ctx);
    const RelationPool pool = GroupByRelation(data.instances);
    Rng rng(static_cast<uint64_t>(ctx.seed));
    if (opts.episodes < 1) throw ValidationError("--episodes must be positive");
    std::vector<Episode> episodes;
    for (int i = 0; i < opts.episodes; ++i) {
      episodes.push_back(SampleEpisode(pool, opts.n_way, rng));
    }
    report = NwayZeroShotAccuracy(
        EncoderEpisodeScorer(encoder, ctx.include_description), episodes);
  } else if (!opts.predictions.empty()) {
    report = ScoreStored(spec, protocol, data.instances,
                         ReadPredictions(opts.predictions));
  } else {
    double tau = 0;
    const Selection selection = ResolveSelection(opts, spec, ctx, &tau);
    const Encoder encoder = LoadModel(ctx);
    const LabelIndex index = IndexFor(encoder, ctx, spec, data);
    const Predictor predictor(encoder, index, ctx.include_description);
    std::map<std::string, StoredPrediction> stored;
    for (const Prediction &p : PredictAll(predictor, data.instances, selection, tau)) {
      stored[p.instance_id] = Store(p);
    }
    report = ScoreStored(spec, protocol, data.instances, stored);
  }

  const std::string path =
      (fs::path(ctx.output_dir) /
       ("metrics_" + spec.task_id + "_" + std::string(ProtocolName(protocol)) + ".json"))
          .string();
  WriteFileAtomic(path, ReportToJson(report, ctx.seed).dump(2) + "\n");
  out << FormatReportTable(report);
  out << std::fixed << std::setprecision(4) << "P=" << report.precision
      << " R=" << report.recall << " F1=" << report.f1;
  if (report.accuracy) out << " acc=" << *report.accuracy;
  out << "\n";
  return 0;
}

}  // namespace

Selection ParseSelection(const std::string &text) {
  if (text == "threshold") return {Selection::Kind::kThreshold, 1};
  if (text == "top1") return {Selection::Kind::kTopK, 1};
  if (text.starts_with("topk:")) {
    try {
      size_t used = 0;
      const int k = std::stoi(text.substr(5), &used);
      if (used == text.size() - 5 && k >= 1) return {Selection::Kind::kTopK, k};
    } catch (const std::exception &) {
    }
  }
  throw ValidationError("selection must be \"threshold\", \"top1\" or "
                        "\"topk:K\", got '" + text + "'");
}

Protocol DatasetSpec::EffectiveProtocol() const {
  if (protocol) return *protocol;
  return selection.kind == Selection::Kind::kThreshold ? Protocol::kMacro
                                                       : Protocol::kMicro;
}

const DatasetSpec &RunConfig::Task(const std::string &task_id) const {
  for (const DatasetSpec &spec : datasets) {
    if (spec.task_id == task_id) return spec;
  }
  throw ValidationError("no task '" + task_id + "' in run config");
}

RunConfig LoadRunConfig(const std::string &path) {
  json j;
  try {
    j = json::parse(ReadFile(path));
  } catch (const json::exception &e) {
    throw ValidationError(path + ": malformed JSON: " + e.what());
  } catch (const RuntimeFailure &e) {
    throw ValidationError(e.what());
  }
  if (!j.is_object()) throw ValidationError(path + ": run config must be an object");
  const fs::path base = fs::path(path).parent_path();

  RunConfig config;
  config.seed = GetOr<int64_t>(j, "seed", 0, path);
  config.output_dir = Resolve(base, GetOr<std::string>(j, "output_dir", "output", path));
  config.include_description = GetOr(j, "include_description", true, path);
  config.dev_every_epochs = GetOr(j, "dev_every_epochs", 1, path);
  if (config.dev_every_epochs < 1) {
    throw ValidationError(path + ": dev_every_epochs must be positive");
  }

  if (j.contains("encoder")) {
    const json &e = j.at("encoder");
    config.encoder.dim = GetOr(e, "dim", config.encoder.dim, path);
    config.encoder.max_sequence_length =
        GetOr(e, "max_sequence_length", config.encoder.max_sequence_length, path);
    config.encoder.vocabulary_spec =
        GetOr(e, "vocabulary_spec", config.encoder.vocabulary_spec, path);
    config.encoder.backbone_spec =
        GetOr(e, "backbone_spec", config.encoder.backbone_spec, path);
  }
  if (j.contains("training")) {
    const json &t = j.at("training");
    if (t.is_string()) {
      config.training =
          ParseTrainingConfig(ReadFile(Resolve(base, t.get<std::string>())));
    } else {
      config.training = TrainingFromJson(t, path + ": training");
    }
  }
  config.training.seed = config.seed;

  if (!j.contains("datasets") || !j.at("datasets").is_array() ||
      j.at("datasets").empty()) {
    throw ValidationError(path + ": datasets must be a non-empty array");
  }
  std::set<std::string> ids;
  for (const json &d : j.at("datasets")) {
    DatasetSpec spec;
    const std::string where = path + ": dataset";
    spec.task_id = Get<std::string>(d, "task_id", where);
    if (!ids.insert(spec.task_id).second) {
      throw ValidationError(path + ": duplicate task_id '" + spec.task_id + "'");
    }
    spec.task_kind = ParseTaskKind(Get<std::string>(d, "task_kind", where));
    spec.instances_path = Resolve(base, Get<std::string>(d, "instances_path", where));
    spec.labels_path = Resolve(base, Get<std::string>(d, "labels_path", where));
    if (d.contains("dev_path")) {
      spec.dev_path = Resolve(base, Get<std::string>(d, "dev_path", where));
    }
    if (d.contains("test_path")) {
      spec.test_path = Resolve(base, Get<std::string>(d, "test_path", where));
    }
    spec.selection = ParseSelection(GetOr<std::string>(d, "selection", "top1", where));
    spec.upsampling = GetOr(d, "upsampling", 1, where);
    if (spec.upsampling < 1) {
      throw ValidationError(where + " '" + spec.task_id +
                            "': upsampling must be a positive integer");
    }
    spec.abstain_label = GetOr<std::string>(d, "abstain_label", "", where);
    if (d.contains("protocol")) {
      spec.protocol = ParseProtocol(Get<std::string>(d, "protocol", where));
    }
    config.datasets.push_back(std::move(spec));
  }
  return config;
}

std::vector<TaskData> LoadTrainingData(const RunConfig &config,
                                       std::map<std::string, int> *factors) {
  *factors = config.training.upsampling_factors;
  std::vector<TaskData> out;
  for (const DatasetSpec &spec : config.datasets) {
    Dataset data = LoadDataset(spec.instances_path, spec.labels_path, spec.task_kind);
    if (data.instances.empty()) {
      throw ValidationError("training split for task '" + spec.task_id +
                            "' is empty");
    }
    auto it = factors->find(spec.task_id);
    if (it == factors->end()) {
      (*factors)[spec.task_id] = spec.upsampling;
    } else if (spec.upsampling != 1 && it->second != spec.upsampling) {
      throw ValidationError("task '" + spec.task_id +
                            "' has conflicting upsampling factors");
    }
    out.push_back({spec.task_id, std::move(data.instances), std::move(data.labels)});
  }
  return out;
}

Vocabulary BuildRunVocabulary(const RunConfig &config,
                              std::span<const TaskData> data) {
  std::vector<std::string> texts;
  for (const TaskData &task : data) {
    for (const TypingInstance &instance : task.instances) {
      texts.push_back(FormatInput(instance, true).text);
    }
    for (const std::string &label : task.labels) {
      texts.push_back(VerbalizeLabel(label));
    }
  }
  // Candidate labels of every task are admissible at inference time.
  for (const DatasetSpec &spec : config.datasets) {
    for (const std::string &label : ReadLabels(spec.labels_path)) {
      texts.push_back(VerbalizeLabel(label));
    }
  }
  return Vocabulary::Build(texts);
}

double DevScore(const Encoder &encoder, const DatasetSpec &spec,
                const Dataset &dev, bool include_description) {
  const LabelIndex index = LabelIndex::Build(dev.labels, encoder);
  const Predictor predictor(encoder, index, include_description);
  if (spec.selection.kind == Selection::Kind::kThreshold) {
    const SetMetric macro_f1 = [](const LabelSets &g, const LabelSets &p) {
      return MacroPrf(g, p).f1;
    };
    std::vector<std::vector<ScoredLabel>> ranked;
    LabelSets gold;
    for (const TypingInstance &instance : dev.instances) {
      ranked.push_back(predictor.Rank(instance));
      gold.push_back(instance.gold_labels);
    }
    const double tau = TuneThreshold(ranked, gold, macro_f1);
    LabelSets pred;
    for (auto &r : ranked) pred.push_back(SelectByThreshold("", r, tau).selected);
    return macro_f1(gold, pred);
  }
  std::map<std::string, StoredPrediction> stored;
  for (const Prediction &p :
       PredictAll(predictor, dev.instances, spec.selection, 0)) {
    stored[p.instance_id] = Store(p);
  }
  const Protocol protocol =
      spec.selection.k == 1 ? Protocol::kMicro : Protocol::kMacro;
  return ScoreStored(spec, protocol, dev.instances, stored).f1;
}

std::string CheckpointPath(const std::string &output_dir) {
  return (fs::path(output_dir) / "checkpoint.bin").string();
}
std::string TrainLogPath(const std::string &output_dir) {
  return (fs::path(output_dir) / "train_log.jsonl").string();
}
std::string LabelEmbeddingsPath(const std::string &output_dir,
                                const std::string &task_id) {
  return (fs::path(output_dir) / ("labels_" + task_id + ".emb")).string();
}
std::string LabelListPath(const std::string &output_dir,
                          const std::string &task_id) {
  return (fs::path(output_dir) / ("labels_" + task_id + ".txt")).string();
}
std::string ThresholdPath(const std::string &output_dir,
                          const std::string &task_id) {
  return (fs::path(output_dir) / ("threshold_" + task_id + ".json")).string();
}
std::string PredictionsPath(const std::string &output_dir,
                            const std::string &task_id,
                            const std::string &split) {
  return (fs::path(output_dir) / ("predictions_" + task_id + "_" + split + ".jsonl"))
      .string();
}

int RunCommand(const std::vector<std::string> &args, std::ostream &out,
               std::ostream &err) {
  CLI::App app("Unified semantic typing: train, tune, predict and evaluate",
               "semtype");
  app.require_subcommand(1);
  Options opts;

  auto common = [&](CLI::App *cmd) {
    cmd->add_option("--config", opts.config, "Run configuration (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--output", opts.output, "Output directory override");
    cmd->add_option("--seed", opts.seed, "Seed override");
    cmd->add_flag("--no-task-description", opts.no_task_description,
                  "Format inputs without the task description");
  };
  auto task = [&](CLI::App *cmd) {
    cmd->add_option("--task", opts.task, "Task id from the run config");
  };
  auto split = [&](CLI::App *cmd, const std::string &fallback) {
    cmd->add_option("--split", opts.split, "train, dev or test (default " + fallback + ")")
        ->check(CLI::IsMember({"train", "dev", "test"}));
  };
  auto selection = [&](CLI::App *cmd) {
    cmd->add_option("--k", opts.k, "Top-k selection")->check(CLI::PositiveNumber);
    cmd->add_option("--tau", opts.tau, "Similarity threshold selection");
  };

  CLI::App *train = app.add_subcommand("train", "Train an encoder");
  common(train);
  CLI::App *evaluate = app.add_subcommand("evaluate", "Score a task");
  common(evaluate);
  task(evaluate);
  split(evaluate, "test");
  selection(evaluate);
  evaluate->add_option("--protocol", opts.protocol, "macro, micro or nway")
      ->check(CLI::IsMember({"macro", "micro", "nway"}));
  evaluate->add_option("--predictions", opts.predictions,
                       "Score this predictions file instead of running the model")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--n-way", opts.n_way, "Candidates per episode")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--episodes", opts.episodes, "Number of episodes")
      ->check(CLI::PositiveNumber);
  CLI::App *predict = app.add_subcommand("predict", "Write predictions");
  common(predict);
  task(predict);
  split(predict, "test");
  selection(predict);
  CLI::App *embed = app.add_subcommand("embed-labels", "Export label embeddings");
  common(embed);
  task(embed);
  CLI::App *tune = app.add_subcommand("tune-threshold", "Tune tau on a dev split");
  common(tune);
  task(tune);
  split(tune, "dev");

  std::vector<const char *> argv;
  argv.push_back("semtype");
  for (const std::string &a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (train->parsed()) return Train(opts, out);
    if (evaluate->parsed()) return Evaluate(opts, out);
    if (predict->parsed()) return Predict(opts, out);
    if (embed->parsed()) return EmbedLabels(opts, out);
    if (tune->parsed()) return TuneThresholdCommand(opts, out);
  } catch (const ValidationError &e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const RuntimeFailure &e) {
    err << "failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    err << "failure: " << e.what() << "\n";
    return 2;
  }
  err << app.help();
  return 1;
}

}  // namespace semtype
