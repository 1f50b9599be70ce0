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

#include "layoutspace/core/point_set.hpp"
#include "layoutspace/core/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace layoutspace::cluster {

struct ClusterStats {
  int id = 0;
  std::size_t size = 0;
  double mu = 0.0;     // mean member-to-centroid distance
  double sigma = 0.0;  // population std of the same
};

inline constexpr int kNoise = -1;

/// An immutable clustering of one point set. Refinement produces a new
/// model; nothing mutates a model after it is returned.
struct ClusterModel {
  std::uint64_t version = 1;
  std::uint64_t parent_version = 0;
  std::uint64_t snapshot_version = 0;
  std::uint64_t fingerprint = 0;
  DistanceMetric metric = DistanceMetric::Cosine;
  std::uint64_t rng_seed = 0;

  std::vector<std::string> sample_ids;
  std::vector<int> assignment;  // cluster id per sample, kNoise when removed
  std::vector<double> centroid_distance;  // NaN for noise
  std::vector<int> cluster_ids;            // ascending
  Matrix centroids;                        // rows follow cluster_ids, in metric-prepared space
  std::vector<ClusterStats> stats;         // rows follow cluster_ids
  double inertia = 0.0;
  std::vector<double> inertia_trace;  // k-means objective after each assignment step
  std::size_t iterations = 0;
  std::vector<nlohmann::json> log;

  std::size_t k() const { return cluster_ids.size(); }
  /// Row of `cluster_id` in centroids/stats, or throws UnknownCluster.
  std::size_t row_of(int cluster_id) const;
  bool has_cluster(int cluster_id) const;
  std::vector<std::size_t> members(int cluster_id) const;
  std::vector<std::size_t> noise() const;
  /// (d - mu) / sigma with the sigma = 0 -> 0 convention. NaN for noise.
  double zscore(std::size_t sample) const;
};

/// Recomputes centroids, distances, stats and inertia from the assignment.
/// `prepared` must be prepare_points(set.points, model.metric).
void recompute(ClusterModel& model, const Matrix& prepared);

/// k-means objective contribution: squared distance (euclidean) or cosine
/// distance (cosine).
double kmeans_cost(const RowRef& point, const RowRef& reference, DistanceMetric metric);

void check_fresh(const ClusterModel& model, const PointSet& set);

/// Re-derives distances and stats of a deserialized model against its point
/// set (throws StaleModel when the set differs).
void bind(ClusterModel& model, const PointSet& set);

struct KMeansParams {
  std::size_t k = 8;
  std::uint64_t rng_seed = 0;
  DistanceMetric metric = DistanceMetric::Cosine;
  std::size_t max_iter = 300;
  double tol = 1e-6;
  /// Independent k-means++ restarts; the lowest final inertia wins.
  std::size_t n_init = 10;
};

/// k-means++ seeding then Lloyd iterations, repeated n_init times. Empty clusters are reseeded with
/// the point farthest from its centroid. Progress returning false cancels.
ClusterModel kmeans(const PointSet& set, const KMeansParams& params,
                    const std::function<bool(double)>& progress = {});

struct SelectKResult {
  std::size_t k = 0;
  std::vector<std::pair<std::size_t, double>> silhouettes;  // (k, mean silhouette)
};

/// Silhouette sweep over [k_lo, k_hi]; ties resolve to the smaller k.
/// `sample_size` > 0 scores a seeded subsample instead of every point.
SelectKResult select_k(const PointSet& set, std::size_t k_lo, std::size_t k_hi, std::uint64_t rng_seed,
                       DistanceMetric metric = DistanceMetric::Cosine, std::size_t sample_size = 0,
                       const std::function<bool(double)>& progress = {});

struct RefineOp {
  enum class Kind { Split, Merge, RemoveOutliers, Trim };
  Kind kind = Kind::Trim;
  int cluster = -1;        // split/merge target; remove/trim scope (-1 = all)
  int other = -1;          // merge source
  double value = 0.0;      // z_max or percentile

  static RefineOp split(int id) { return {Kind::Split, id, -1, 0.0}; }
  static RefineOp merge(int a, int b) { return {Kind::Merge, a, b, 0.0}; }
  static RefineOp remove_outliers(double z_max, int id = -1) { return {Kind::RemoveOutliers, id, -1, z_max}; }
  static RefineOp trim(double percentile, int id = -1) { return {Kind::Trim, id, -1, percentile}; }
};

nlohmann::json to_json(const RefineOp& op);
RefineOp refine_op_from_json(const nlohmann::json& j);

/// Applies the ops in order and returns a new model (version + 1) whose log
/// has one entry per op.
ClusterModel refine_clusters(const ClusterModel& model, const PointSet& set, std::span<const RefineOp> ops);

/// Linear-interpolated percentile (p in [0, 100]) of `values`.
double percentile(std::vector<double> values, double p);

nlohmann::json model_summary(const ClusterModel& model);
nlohmann::json to_json(const ClusterModel& model);
ClusterModel cluster_model_from_json(const nlohmann::json& j);

}  // namespace layoutspace::cluster
