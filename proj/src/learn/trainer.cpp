// Copyright 2026 The LayoutSpace Authors
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

#include "layoutspace/learn/trainer.hpp"

#include "layoutspace/cluster/metrics.hpp"
#include "layoutspace/core/error.hpp"
#include "layoutspace/core/rng.hpp"
#include "layoutspace/core/vector_ops.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace layoutspace::learn {
namespace {

class Sgd {
 public:
  explicit Sgd(double momentum) : momentum_(momentum) {}

  template <class Param, class Grad>
  void step(const std::string& name, Param& param, const Grad& grad, double lr) {
    Eigen::MatrixXd& v = velocity_[name];
    if (v.size() == 0) v = Eigen::MatrixXd::Zero(param.rows(), param.cols());
    v = momentum_ * v + grad;
    param -= lr * v;
  }

 private:
  double momentum_;
  std::map<std::string, Eigen::MatrixXd> velocity_;
};

struct Split {
  Matrix features;
  std::vector<int> labels;
};

struct Metrics {
  double silhouette;
  double dbi;
};

Metrics evaluate(const MetricModel& model, const Split& val) {
  const Matrix z = model.embed(val.features);
  try {
    const auto m = cluster::labeled_metrics(z, val.labels, DistanceMetric::Cosine);
    return {m.silhouette_mean, m.dbi};
  } catch (const Error& e) {
    if (e.code() != Errc::DegenerateCentroids && e.code() != Errc::TooFewClasses) throw;
    const auto s = cluster::silhouette_samples(z, val.labels, DistanceMetric::Cosine);
    return {cluster::mean(s), std::numeric_limits<double>::infinity()};
  }
}

bool better(const Metrics& a, const Metrics& b) {
  if (a.silhouette != b.silhouette) return a.silhouette > b.silhouette;
  return a.dbi < b.dbi;
}

Stage stage_for(std::size_t epoch_index, const StageSchedule& s) {
  if (epoch_index < s.warmup_epochs) return Stage::Warmup;
  if (epoch_index < s.warmup_epochs + s.partial_epochs) return Stage::Partial;
  return Stage::Full;
}

}  // namespace

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::Warmup: return "warmup";
    case Stage::Partial: return "partial";
    case Stage::Full: return "full";
  }
  return "warmup";
}

Matrix MetricModel::embed(const Matrix& features) const {
  return projection_forward(projection, backbone_forward(backbone, features));
}

MetricModel init_metric_model(Eigen::Index input_dim, std::size_t classes, const TrainerConfig& config) {
  Rng rng(derive_seed(config.rng_seed, 1));
  MetricModel model;
  model.backbone = Backbone::init(input_dim, config.backbone_rank, config.backbone_depth, rng);
  model.projection = ProjectionHead::init(input_dim, config.hidden_width, config.embedding_dim, config.dropout, rng);
  model.arcface.weights = Matrix(static_cast<Eigen::Index>(classes), config.embedding_dim);
  for (Eigen::Index i = 0; i < model.arcface.weights.size(); ++i) model.arcface.weights.data()[i] = rng.normal();
  model.arcface.normalize_rows();
  model.arcface.scale = config.scale;
  model.arcface.margin = config.margin;
  model.centers.centers = Matrix::Zero(static_cast<Eigen::Index>(classes), config.embedding_dim);
  model.centers.learning_rate = config.center_learning_rate;
  return model;
}

TrainResult train_metric_head(std::span<const EmbeddingRecord> dataset, const TrainerConfig& config,
                              const std::function<bool(double)>& progress) {
  config.weights.validate();
  if (config.batch_size < 2) throw Error(Errc::InvalidArgument, "batch size must be at least 2");

  std::vector<const EmbeddingRecord*> train_rows;
  std::vector<const EmbeddingRecord*> val_rows;
  for (const auto& r : dataset) {
    if (!r.split) continue;
    if (!r.layout_label) throw Error(Errc::InvalidLabel, "record '" + r.sample_id + "' has no layout label");
    if (*r.split == SplitTag::Train) train_rows.push_back(&r);
    if (*r.split == SplitTag::Val) val_rows.push_back(&r);
  }
  if (train_rows.empty()) throw Error(Errc::EmptySplit, "no training records");
  if (val_rows.empty()) throw Error(Errc::EmptySplit, "no validation records");

  std::map<std::string, int> class_index;
  for (const auto* r : train_rows) class_index.emplace(*r->layout_label, 0);
  std::vector<std::string> names;
  for (auto& [name, id] : class_index) {
    id = static_cast<int>(names.size());
    names.push_back(name);
  }

  auto gather = [&](const std::vector<const EmbeddingRecord*>& rows) {
    Split s;
    const std::size_t dim = rows.front()->vector.size();
    s.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i]->vector.size() != dim) throw Error(Errc::DimensionMismatch, "mixed record dimensions");
      for (std::size_t j = 0; j < dim; ++j) {
        s.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i]->vector[j];
      }
      const auto it = class_index.find(*rows[i]->layout_label);
      if (it == class_index.end()) {
        throw Error(Errc::UnknownClass, "validation class '" + *rows[i]->layout_label + "' absent from training split");
      }
      s.labels.push_back(it->second);
    }
    return s;
  };
  const Split train = gather(train_rows);
  const Split val = gather(val_rows);
  if (train.features.cols() != val.features.cols()) throw Error(Errc::DimensionMismatch, "split dimensions differ");

  TrainResult result;
  MetricModel model = init_metric_model(train.features.cols(), names.size(), config);
  model.class_names = names;
  {
    // Centers start at the class means of the initial embedding.
    const Matrix z0 = model.embed(train.features);
    std::vector<int> counts(names.size(), 0);
    for (Eigen::Index i = 0; i < z0.rows(); ++i) {
      model.centers.centers.row(train.labels[static_cast<std::size_t>(i)]) += z0.row(i);
      ++counts[static_cast<std::size_t>(train.labels[static_cast<std::size_t>(i)])];
    }
    for (std::size_t c = 0; c < counts.size(); ++c) {
      if (counts[c] > 0) model.centers.centers.row(static_cast<Eigen::Index>(c)) /= counts[c];
    }
  }

  const Metrics initial = evaluate(model, val);
  result.initial_val_silhouette = initial.silhouette;
  result.initial_val_dbi = initial.dbi;
  result.best_val_silhouette = initial.silhouette;
  result.best_val_dbi = initial.dbi;
  result.model = model;
  if (config.epochs == 0) return result;

  const SupConConfig supcon{config.temperature};
  const std::size_t n = static_cast<std::size_t>(train.features.rows());
  const std::size_t depth = model.backbone.blocks.size();
  Sgd sgd(config.momentum);
  std::uint64_t step = 0;
  const std::uint64_t dropout_seed = derive_seed(config.rng_seed, 2);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  bool have_best = false;
  Metrics best{};

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const Stage stage = stage_for(epoch, config.stages);
    std::size_t trainable = 0;
    double backbone_lr = 0.0;
    if (stage == Stage::Partial) {
      trainable = std::min(config.stages.partial_blocks, depth);
      backbone_lr = config.stages.backbone_learning_rate;
    } else if (stage == Stage::Full) {
      trainable = depth;
      backbone_lr = config.stages.backbone_learning_rate * config.stages.full_lr_fraction;
    }

    Rng epoch_rng(derive_seed(config.rng_seed, 1000 + epoch));
    epoch_rng.shuffle(order);

    EpochRecord record;
    record.epoch = epoch + 1;
    record.stage = stage;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end = std::min(n, start + config.batch_size);
      if (end - start < 2) continue;
      Batch batch;
      Matrix x(static_cast<Eigen::Index>(end - start), train.features.cols());
      for (std::size_t k = start; k < end; ++k) {
        x.row(static_cast<Eigen::Index>(k - start)) = train.features.row(static_cast<Eigen::Index>(order[k]));
        batch.labels.push_back(train.labels[order[k]]);
      }

      std::vector<BlockCache> block_caches;
      const Matrix features = backbone_forward(model.backbone, x, trainable > 0 ? &block_caches : nullptr);
      ProjectionCache pcache;
      batch.embeddings = projection_forward(model.projection, features, true, dropout_seed, step, &pcache);

      const LossBundle loss = composite_loss(batch, model.arcface, supcon, model.centers, config.weights);
      if (!std::isfinite(loss.value)) {
        throw Error(Errc::NonFiniteLoss, "non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                                             std::to_string(batches) + ", stage " + std::string(to_string(stage)));
      }
      // Component values for the history (unweighted).
      if (config.weights.arcface > 0.0) record.arcface += arcface_loss(batch, model.arcface).value;
      if (config.weights.supcon > 0.0) record.supcon += supcon_loss(batch, supcon).value;
      if (config.weights.center > 0.0) record.center += center_loss(batch, model.centers).value;
      record.total += loss.value;

      ProjectionGrad pgrad;
      const Matrix grad_features = projection_backward(model.projection, pcache, loss.grad_embeddings, pgrad);
      const double lr = config.learning_rate;
      sgd.step("proj.hidden.w", model.projection.hidden.weight, pgrad.hidden.weight, lr);
      sgd.step("proj.hidden.b", model.projection.hidden.bias, pgrad.hidden.bias, lr);
      sgd.step("proj.norm.gamma", model.projection.norm.gamma, pgrad.norm.gamma, lr);
      sgd.step("proj.norm.beta", model.projection.norm.beta, pgrad.norm.beta, lr);
      sgd.step("proj.output.w", model.projection.output.weight, pgrad.output.weight, lr);
      sgd.step("proj.output.b", model.projection.output.bias, pgrad.output.bias, lr);
      if (loss.grad_arcface_weights) {
        sgd.step("arcface.w", model.arcface.weights, *loss.grad_arcface_weights, lr);
        model.arcface.normalize_rows();
      }
      if (trainable > 0) {
        const auto bgrads = backbone_backward(model.backbone, block_caches, grad_features, trainable);
        for (std::size_t k = 0; k < bgrads.size(); ++k) {
          const std::size_t b = depth - trainable + k;
          auto& block = model.backbone.blocks[b];
          const std::string key = "backbone." + std::to_string(b);
          sgd.step(key + ".down.w", block.down.weight, bgrads[k].down.weight, backbone_lr);
          sgd.step(key + ".down.b", block.down.bias, bgrads[k].down.bias, backbone_lr);
          sgd.step(key + ".up.w", block.up.weight, bgrads[k].up.weight, backbone_lr);
          sgd.step(key + ".up.b", block.up.bias, bgrads[k].up.bias, backbone_lr);
        }
      }
      if (config.weights.center > 0.0) model.centers = update_centers(batch, model.centers);
      ++step;
      ++batches;
    }
    if (batches > 0) {
      record.arcface /= batches;
      record.supcon /= batches;
      record.center /= batches;
      record.total /= batches;
    }

    const Metrics m = evaluate(model, val);
    record.val_silhouette = m.silhouette;
    record.val_dbi = m.dbi;
    result.history.push_back(record);
    if (!have_best || better(m, best)) {
      have_best = true;
      best = m;
      result.model = model;
      result.best_epoch = epoch + 1;
      result.best_val_silhouette = m.silhouette;
      result.best_val_dbi = m.dbi;
    }
    if (progress && !progress(static_cast<double>(epoch + 1) / static_cast<double>(config.epochs))) {
      throw Error(Errc::Canceled, "training canceled");
    }
  }
  return result;
}

}  // namespace layoutspace::learn
