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

#include "layoutspace/app/defaults.hpp"
#include "layoutspace/app/workspace.hpp"
#include "layoutspace/cluster/metrics.hpp"
#include "layoutspace/learn/trainer.hpp"

#include <json.hpp>

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace layoutspace::app {

using Progress = std::function<bool(double)>;

// ---- metrics ----

enum class LabelSource { Layout, Cluster };
LabelSource parse_label_source(std::string_view text);

/// One row of the metrics table.
struct MetricsRow {
  std::string name;
  std::optional<learn::LossWeights> weights;
  std::size_t samples = 0;
  std::size_t classes = 0;
  cluster::LabeledMetrics metrics;
};

/// Scores the records that carry a layout label. `embedder` maps vectors
/// through a trained head first.
MetricsRow metrics_row(const std::string& name, std::span<const EmbeddingRecord> records, DistanceMetric metric,
                       const learn::MetricModel* embedder = nullptr);

/// Copies of the records that carry a layout label (InvalidLabel when none do).
std::vector<EmbeddingRecord> labelled_records(std::span<const EmbeddingRecord> records);

/// Copies of the non-noise records labelled "cluster-<id>".
std::vector<EmbeddingRecord> label_by_cluster(std::span<const EmbeddingRecord> records,
                                              const cluster::ClusterModel& model);

/// Records whose split tag is `split` (all records when empty).
std::vector<EmbeddingRecord> filter_split(std::span<const EmbeddingRecord> records, std::optional<SplitTag> split);

nlohmann::json to_json(const MetricsRow& row);
/// Fixed-width table: Model, weights, Intra-class, Inter-class, Silhouette, DBI.
std::string metrics_table(std::span<const MetricsRow> rows);

// ---- training ----

struct AblationConfig {
  std::string name;
  learn::LossWeights weights;
};

/// ArcFace only, SupCon only, ArcFace + SupCon, all three (with the default
/// center weight).
std::vector<AblationConfig> ablation_configs(double center_weight);

struct AblationResult {
  std::vector<MetricsRow> rows;  // input, untrained head, then one per config
  std::vector<learn::TrainResult> runs;
};

/// Trains each configuration with the same seed and scores the held-out
/// split (test, else val).
AblationResult run_ablation(std::span<const EmbeddingRecord> records, const learn::TrainerConfig& base,
                            std::span<const AblationConfig> configs, DistanceMetric metric,
                            const Progress& progress = {});

nlohmann::json to_json(const learn::TrainResult& result);

// ---- clustering ----

struct ClusterRequest {
  std::optional<std::size_t> k;
  std::size_t k_min = 2;  // select-k range when k is empty
  std::size_t k_max = 10;
  ClusterSpace space = ClusterSpace::Embedding;
  std::optional<std::string> projection;
  std::uint64_t rng_seed = 0;
};

struct ClusterOutcome {
  StoredModel stored;
  std::optional<cluster::SelectKResult> selection;
};

/// Fits k-means on `points` (already in the requested space). Euclidean is
/// used for t-SNE space.
ClusterOutcome fit_clusters(const PointSet& points, const ClusterRequest& request, const Defaults& defaults,
                            const Progress& progress = {});

/// Points for a new fit: the snapshot, or a saved projection of it.
PointSet request_points(const Workspace& ws, const DatasetHandle& ds, const ClusterRequest& request);

nlohmann::json to_json(const cluster::SelectKResult& r);

// ---- discovery ----

/// Label -> centroid of prepared points, for the records that carry a
/// layout label and appear in `points`.
std::map<std::string, RowVector> layout_centroids_in(const PointSet& points, std::span<const EmbeddingRecord> records,
                                                     DistanceMetric metric);

struct QueueOutcome {
  std::vector<discovery::TriageItem> items;
  discovery::AnomalyReport anomalies;
  std::optional<discovery::DetectionReport> detection;
  std::optional<discovery::ExpansionResult> expansion;
};

/// z-scores of the model, anomalous clusters when layout labels exist, and
/// expansion from the book's confirmed seeds, assembled into one queue.
QueueOutcome build_queue(const Workspace& ws, const DatasetHandle& ds, std::optional<std::uint64_t> model_version,
                         const std::vector<std::string>& confirmed_seeds, const Defaults& defaults);

/// Seeds that are not nodes of the graph are dropped.
std::vector<std::string> known_seeds(const discovery::SimilarityGraph& graph, std::span<const std::string> seeds);

/// Current UTC time as 2026-01-31T12:00:00Z.
std::string utc_timestamp();

/// JSON with object keys sorted, as emitted by --json and the service.
std::string dump_sorted(const nlohmann::json& j, int indent = -1);

}  // namespace layoutspace::app
