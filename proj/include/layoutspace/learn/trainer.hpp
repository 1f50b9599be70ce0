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

#pragma once

#include "layoutspace/core/types.hpp"
#include "layoutspace/learn/losses.hpp"
#include "layoutspace/learn/network.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace layoutspace::learn {

/// Gradual unfreezing: heads only, then the top blocks, then everything at a
/// reduced rate. Epochs beyond warmup + partial run in the full stage.
struct StageSchedule {
  std::size_t warmup_epochs = 2;
  std::size_t partial_epochs = 4;
  std::size_t partial_blocks = 1;
  double backbone_learning_rate = 0.01;
  double full_lr_fraction = 0.1;
};

enum class Stage { Warmup, Partial, Full };
std::string_view to_string(Stage stage);

struct TrainerConfig {
  LossWeights weights;
  double scale = 30.0;
  double margin = 0.5;
  double temperature = 0.1;
  double center_learning_rate = 0.5;
  std::size_t epochs = 20;
  std::size_t batch_size = 64;
  double learning_rate = 0.05;
  double momentum = 0.9;
  StageSchedule stages;
  Eigen::Index hidden_width = 256;
  Eigen::Index embedding_dim = 512;
  double dropout = 0.1;
  std::size_t backbone_depth = 2;
  Eigen::Index backbone_rank = 64;
  std::uint64_t rng_seed = 0;
};

/// Encoder stand-in + projection head + the two trainable loss heads.
struct MetricModel {
  Backbone backbone;
  ProjectionHead projection;
  ArcFaceHead arcface;
  ClassCenters centers;
  std::vector<std::string> class_names;

  /// Inference embedding (dropout off, running batch-norm statistics).
  Matrix embed(const Matrix& features) const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  Stage stage = Stage::Warmup;
  double arcface = 0.0;
  double supcon = 0.0;
  double center = 0.0;
  double total = 0.0;
  double val_silhouette = 0.0;
  double val_dbi = 0.0;
};

struct TrainResult {
  MetricModel model;  // best checkpoint
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;  // 0 = initialization kept
  /// Validation metrics of the untrained initialization.
  double initial_val_silhouette = 0.0;
  double initial_val_dbi = 0.0;
  double best_val_silhouette = 0.0;
  double best_val_dbi = 0.0;
};

MetricModel init_metric_model(Eigen::Index input_dim, std::size_t classes, const TrainerConfig& config);

/// Records need a layout label and a train or val split tag. Progress
/// receives the completed fraction; returning false cancels (Canceled).
TrainResult train_metric_head(std::span<const EmbeddingRecord> dataset, const TrainerConfig& config,
                              const std::function<bool(double)>& progress = {});

}  // namespace layoutspace::learn
