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

#include "semtype/training.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "semtype/errors.h"

namespace semtype {
namespace {

std::string Trim(const std::string &s) {
  const size_t begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const size_t end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double ParseDouble(const std::string &key, const std::string &value) {
  try {
    size_t used = 0;
    double out = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception &) {
    throw ValidationError("config key '" + key + "' expects a number, got '" +
                          value + "'");
  }
}

int64_t ParseInt(const std::string &key, const std::string &value) {
  try {
    size_t used = 0;
    long long out = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception &) {
    throw ValidationError("config key '" + key + "' expects an integer, got '" +
                          value + "'");
  }
}

}  // namespace

uint64_t UniformIndex(Rng &rng, uint64_t n) {
  if (n == 0) throw ValidationError("cannot draw from an empty range");
  const uint64_t limit = std::numeric_limits<uint64_t>::max() -
                         std::numeric_limits<uint64_t>::max() % n;
  uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return draw % n;
}

void TrainingConfig::Validate() const {
  if (!(margin >= 0)) throw ValidationError("margin must be non-negative");
  if (!(learning_rate > 0)) throw ValidationError("learning_rate must be positive");
  if (batch_size < 1) throw ValidationError("batch_size must be positive");
  if (epochs < 0) throw ValidationError("epochs must be non-negative");
  if (!(warmup_ratio >= 0 && warmup_ratio <= 1)) {
    throw ValidationError("warmup_ratio must lie in [0, 1]");
  }
  if (!(gradient_clip_norm > 0)) {
    throw ValidationError("gradient_clip_norm must be positive");
  }
  for (const auto &[task, factor] : upsampling_factors) {
    if (factor < 1) {
      throw ValidationError("upsampling factor for task '" + task +
                            "' must be a positive integer");
    }
  }
}

TrainingConfig ParseTrainingConfig(const std::string &text) {
  TrainingConfig config;
  std::istringstream lines(text);
  std::string line;
  int line_number = 0;
  while (std::getline(lines, line)) {
    ++line_number;
    if (const size_t hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(line_number) +
                            ": expected key = value");
    }
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    if (key == "margin") {
      config.margin = ParseDouble(key, value);
    } else if (key == "learning_rate") {
      config.learning_rate = ParseDouble(key, value);
    } else if (key == "batch_size") {
      config.batch_size = static_cast<int>(ParseInt(key, value));
    } else if (key == "epochs") {
      config.epochs = static_cast<int>(ParseInt(key, value));
    } else if (key == "warmup_ratio") {
      config.warmup_ratio = ParseDouble(key, value);
    } else if (key == "gradient_clip_norm") {
      config.gradient_clip_norm = ParseDouble(key, value);
    } else if (key == "seed") {
      config.seed = ParseInt(key, value);
    } else if (key == "upsampling_factors") {
      config.upsampling_factors.clear();
      std::istringstream entries(value);
      std::string entry;
      while (std::getline(entries, entry, ',')) {
        entry = Trim(entry);
        if (entry.empty()) continue;
        const size_t colon = entry.rfind(':');
        if (colon == std::string::npos) {
          throw ValidationError("upsampling_factors entry '" + entry +
                                "' must look like task:factor");
        }
        config.upsampling_factors[Trim(entry.substr(0, colon))] =
            static_cast<int>(ParseInt(key, Trim(entry.substr(colon + 1))));
      }
    } else {
      throw ValidationError("config line " + std::to_string(line_number) +
                            ": unknown key '" + key + "'");
    }
  }
  config.Validate();
  return config;
}

std::string FormatTrainingConfig(const TrainingConfig &config) {
  std::ostringstream os;
  os.precision(17);
  os << "margin = " << config.margin << "\n"
     << "learning_rate = " << config.learning_rate << "\n"
     << "batch_size = " << config.batch_size << "\n"
     << "epochs = " << config.epochs << "\n"
     << "warmup_ratio = " << config.warmup_ratio << "\n"
     << "gradient_clip_norm = " << config.gradient_clip_norm << "\n"
     << "seed = " << config.seed << "\n"
     << "upsampling_factors = ";
  bool first = true;
  for (const auto &[task, factor] : config.upsampling_factors) {
    if (!first) os << ",";
    os << task << ":" << factor;
    first = false;
  }
  os << "\n";
  return os.str();
}

std::string SampleNegative(std::span<const std::string> candidates,
                           const std::set<std::string> &positives, Rng &rng) {
  std::vector<const std::string *> pool;
  pool.reserve(candidates.size());
  for (const std::string &label : candidates) {
    if (!positives.contains(label)) pool.push_back(&label);
  }
  if (pool.empty()) {
    throw ValidationError(
        "no valid negative: every candidate label is a positive");
  }
  return *pool[UniformIndex(rng, pool.size())];
}

double MarginLoss(double sim_pos, double sim_neg, double margin) {
  return MarginLossWithGradient(sim_pos, sim_neg, margin).loss;
}

MarginLossGradient MarginLossWithGradient(double sim_pos, double sim_neg,
                                          double margin) {
  if (!(margin >= 0)) throw ValidationError("margin must be non-negative");
  if (!(sim_pos >= -1 && sim_pos <= 1 && sim_neg >= -1 && sim_neg <= 1)) {
    throw ValidationError("similarities must lie in [-1, 1]");
  }
  MarginLossGradient out;
  const double violation = sim_neg - sim_pos + margin;
  if (violation > 0) {
    out.loss = violation;
    out.d_sim_pos = -1;
    out.d_sim_neg = 1;
  }
  return out;
}

std::vector<MixedItem> MixDatasets(std::span<const TaskData> datasets,
                                   const std::map<std::string, int> &factors,
                                   Rng &rng) {
  std::vector<MixedItem> stream;
  for (size_t d = 0; d < datasets.size(); ++d) {
    const TaskData &data = datasets[d];
    if (data.instances.empty()) {
      throw ValidationError("dataset for task '" + data.task_id + "' is empty");
    }
    int factor = 1;
    if (auto it = factors.find(data.task_id); it != factors.end()) {
      factor = it->second;
    }
    if (factor < 1) {
      throw ValidationError("upsampling factor for task '" + data.task_id +
                            "' must be positive");
    }
    for (int r = 0; r < factor; ++r) {
      for (size_t i = 0; i < data.instances.size(); ++i) {
        stream.push_back({d, i});
      }
    }
  }
  for (size_t i = stream.size(); i > 1; --i) {
    std::swap(stream[i - 1], stream[UniformIndex(rng, i)]);
  }
  return stream;
}

std::vector<TrainingTriple> BuildTriples(std::span<const MixedItem> stream,
                                         std::span<const TaskData> datasets,
                                         bool include_description, Rng &rng) {
  std::vector<TrainingTriple> triples;
  for (const MixedItem &item : stream) {
    const TaskData &data = datasets[item.dataset];
    const TypingInstance &instance = data.instances[item.instance];
    const FormattedInput input = FormatInput(instance, include_description);
    for (const std::string &positive : instance.gold_labels) {
      TrainingTriple triple;
      triple.input = input;
      triple.positive_label = positive;
      triple.negative_label =
          SampleNegative(data.labels, instance.gold_labels, rng);
      triple.task_id = data.task_id;
      triple.instance_id = instance.id;
      triples.push_back(std::move(triple));
    }
  }
  return triples;
}

Trainer::Trainer(Encoder *encoder, TrainingConfig config, int64_t total_steps)
    : encoder_(encoder), config_(std::move(config)), total_steps_(total_steps) {
  config_.Validate();
  if (!encoder_->trainable()) {
    throw ValidationError("encoder backbone is not trainable");
  }
  warmup_steps_ = static_cast<int64_t>(
      std::ceil(config_.warmup_ratio * static_cast<double>(total_steps_)));
  first_moment_.assign(encoder_->parameter_count(), 0.0);
  second_moment_.assign(encoder_->parameter_count(), 0.0);
}

double Trainer::LearningRateAt(int64_t step) const {
  if (step < warmup_steps_) {
    return config_.learning_rate * static_cast<double>(step + 1) /
           static_cast<double>(warmup_steps_);
  }
  const double remaining = static_cast<double>(total_steps_ - step);
  const double span =
      static_cast<double>(std::max<int64_t>(1, total_steps_ - warmup_steps_));
  return config_.learning_rate * std::max(0.0, remaining / span);
}

double Trainer::LossAndGradient(std::span<const TrainingTriple> batch,
                                std::vector<double> *gradient) const {
  if (batch.empty()) throw ValidationError("training batch must be non-empty");

  // Encode every distinct text once; inputs and labels share the encoder.
  std::vector<std::string> texts;
  std::unordered_map<std::string, size_t> slot;
  auto intern = [&](const std::string &text) {
    auto [it, inserted] = slot.emplace(text, texts.size());
    if (inserted) texts.push_back(text);
    return it->second;
  };
  struct Slots {
    size_t input, positive, negative;
  };
  std::vector<Slots> slots;
  slots.reserve(batch.size());
  for (const TrainingTriple &t : batch) {
    if (t.positive_label == t.negative_label) {
      throw ValidationError("triple for '" + t.instance_id +
                            "' uses the same positive and negative label");
    }
    slots.push_back({intern(t.input.text), intern(VerbalizeLabel(t.positive_label)),
                     intern(VerbalizeLabel(t.negative_label))});
  }

  EncodedBatch encoded;
  try {
    encoded = encoder_->EncodeBatch(texts, EncodeMode::kTrain);
  } catch (const ValidationError &e) {
    // Non-finite parameters surface as invalid embeddings; name the first
    // triple that cannot be encoded.
    for (size_t i = 0; i < batch.size(); ++i) {
      try {
        encoder_->Encode(texts[slots[i].input]);
        encoder_->Encode(texts[slots[i].positive]);
        encoder_->Encode(texts[slots[i].negative]);
      } catch (const ValidationError &) {
        throw RuntimeFailure("non-finite loss for triple #" + std::to_string(i) +
                             " (instance '" + batch[i].instance_id + "', " +
                             batch[i].positive_label + " vs " +
                             batch[i].negative_label + "): " + e.what());
      }
    }
    throw;
  }
  std::vector<Eigen::VectorXd> grads(texts.size(),
                                     Eigen::VectorXd::Zero(encoder_->config().dim));
  const double scale = 1.0 / static_cast<double>(batch.size());
  double total = 0;
  for (size_t i = 0; i < batch.size(); ++i) {
    const Eigen::VectorXd &u = encoded.embeddings[slots[i].input].values();
    const Eigen::VectorXd &v = encoded.embeddings[slots[i].positive].values();
    const Eigen::VectorXd &w = encoded.embeddings[slots[i].negative].values();
    const CosineGradient pos = CosineWithGradient(u, v);
    const CosineGradient neg = CosineWithGradient(u, w);
    const MarginLossGradient hinge = MarginLossWithGradient(
        std::clamp(pos.value, -1.0, 1.0), std::clamp(neg.value, -1.0, 1.0),
        config_.margin);
    if (!std::isfinite(hinge.loss)) {
      throw RuntimeFailure("non-finite loss for triple #" + std::to_string(i) +
                           " (instance '" + batch[i].instance_id + "', " +
                           batch[i].positive_label + " vs " +
                           batch[i].negative_label + ")");
    }
    total += hinge.loss;
    if (hinge.d_sim_pos != 0) {
      grads[slots[i].input] += scale * (hinge.d_sim_pos * pos.d_u +
                                        hinge.d_sim_neg * neg.d_u);
      grads[slots[i].positive] += scale * hinge.d_sim_pos * pos.d_v;
      grads[slots[i].negative] += scale * hinge.d_sim_neg * neg.d_v;
    }
  }
  const double loss = total * scale;
  if (!std::isfinite(loss)) throw RuntimeFailure("non-finite batch loss");

  if (gradient != nullptr) {
    gradient->assign(encoder_->parameter_count(), 0.0);
    encoder_->Backward(encoded, grads, *gradient);
  }
  return loss;
}

StepResult Trainer::Step(std::span<const TrainingTriple> batch) {
  std::vector<double> gradient;
  StepResult result;
  result.loss = LossAndGradient(batch, &gradient);

  double squared = 0;
  for (double g : gradient) squared += g * g;
  result.grad_norm = std::sqrt(squared);
  if (!std::isfinite(result.grad_norm)) {
    throw RuntimeFailure("non-finite gradient norm at step " +
                         std::to_string(step_));
  }
  if (result.grad_norm > config_.gradient_clip_norm) {
    const double clip = config_.gradient_clip_norm / (result.grad_norm + 1e-6);
    for (double &g : gradient) g *= clip;
  }

  result.learning_rate = LearningRateAt(step_);
  ++step_;
  const double bias1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step_));
  const double bias2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step_));
  std::span<double> params = encoder_->parameter_values();
  for (size_t i = 0; i < params.size(); ++i) {
    const double g = gradient[i];
    first_moment_[i] = kAdamBeta1 * first_moment_[i] + (1 - kAdamBeta1) * g;
    second_moment_[i] = kAdamBeta2 * second_moment_[i] + (1 - kAdamBeta2) * g * g;
    const double m = first_moment_[i] / bias1;
    const double v = second_moment_[i] / bias2;
    params[i] -= result.learning_rate * m / (std::sqrt(v) + kAdamEpsilon);
  }
  return result;
}

int64_t CountTrainingSteps(std::span<const TaskData> datasets,
                           const TrainingConfig &config) {
  int64_t triples = 0;
  for (const TaskData &data : datasets) {
    int factor = 1;
    if (auto it = config.upsampling_factors.find(data.task_id);
        it != config.upsampling_factors.end()) {
      factor = it->second;
    }
    for (const TypingInstance &instance : data.instances) {
      triples += static_cast<int64_t>(instance.gold_labels.size()) * factor;
    }
  }
  const int64_t per_epoch = (triples + config.batch_size - 1) / config.batch_size;
  return per_epoch * config.epochs;
}

TrainResult TrainLoop(Encoder *encoder, std::span<const TaskData> datasets,
                      const TrainingConfig &config, const TrainOptions &options) {
  config.Validate();
  if (datasets.empty()) throw ValidationError("training needs at least one dataset");
  std::set<std::string> task_ids;
  for (const TaskData &data : datasets) {
    if (!task_ids.insert(data.task_id).second) {
      throw ValidationError("duplicate task id '" + data.task_id + "'");
    }
  }
  TrainResult result;
  result.best_dev = -std::numeric_limits<double>::infinity();
  if (config.epochs == 0) return result;

  Trainer trainer(encoder, config, CountTrainingSteps(datasets, config));
  Rng rng(static_cast<uint64_t>(config.seed));
  const int dev_every = std::max(1, options.dev_every_epochs);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const std::vector<MixedItem> stream =
        MixDatasets(datasets, config.upsampling_factors, rng);
    const std::vector<TrainingTriple> triples =
        BuildTriples(stream, datasets, options.include_description, rng);

    double epoch_loss = 0;
    int batches = 0;
    for (size_t begin = 0; begin < triples.size();
         begin += static_cast<size_t>(config.batch_size)) {
      const size_t end =
          std::min(triples.size(), begin + static_cast<size_t>(config.batch_size));
      std::span<const TrainingTriple> batch(triples.data() + begin, end - begin);
      const StepResult step = trainer.Step(batch);
      epoch_loss += step.loss;
      ++batches;
      if (options.on_step) {
        std::set<std::string> tasks;
        for (const TrainingTriple &t : batch) tasks.insert(t.task_id);
        StepRecord record;
        record.step = trainer.steps_taken() - 1;
        record.epoch = epoch;
        for (const std::string &task : tasks) {
          if (!record.task.empty()) record.task += '+';
          record.task += task;
        }
        record.loss = step.loss;
        record.grad_norm = step.grad_norm;
        record.learning_rate = step.learning_rate;
        options.on_step(record);
      }
    }
    result.epoch_losses.push_back(epoch_loss / std::max(1, batches));

    const bool last = epoch + 1 == config.epochs;
    if (options.dev_metric && ((epoch + 1) % dev_every == 0 || last)) {
      const double score = options.dev_metric(*encoder);
      result.dev_history.push_back(score);
      if (score > result.best_dev) {
        result.best_dev = score;
        result.best_epoch = epoch;
        if (options.persist) options.persist(*encoder, epoch);
      }
    } else if (!options.dev_metric && options.persist) {
      options.persist(*encoder, epoch);
    }
  }
  result.steps = trainer.steps_taken();
  return result;
}

}  // namespace semtype
