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
#include <string>
#include <vector>

namespace layoutspace::cluster {

struct TsneParams {
  double perplexity = 30.0;
  std::size_t iterations = 1000;
  std::size_t exaggeration_iters = 250;
  double exaggeration = 12.0;
  double theta = 0.5;
  double learning_rate = 200.0;
  std::uint64_t rng_seed = 0;
  /// Inputs wider than this are reduced with PCA first.
  std::size_t pca_dims = 50;
  /// Exact O(N^2) gradients up to this many points, Barnes-Hut above.
  std::size_t exact_max_points = 5000;
  /// Rows are L2-normalized first under the cosine metric.
  DistanceMetric metric = DistanceMetric::Cosine;
};

struct ProjectionResult {
  std::vector<std::string> sample_ids;
  Matrix coordinates;  // N x 2, centered
  TsneParams params;
  double kl_divergence = 0.0;
  /// KL after each of the final ceil(10%) iterations.
  std::vector<double> kl_tail;
  bool barnes_hut = false;
};

/// Requires N >= 3 * perplexity (PerplexityTooLarge otherwise).
ProjectionResult tsne_project(const PointSet& set, const TsneParams& params,
                              const std::function<bool(double)>& progress = {});

/// Principal-component projection onto the top `dims` axes (signs fixed so
/// the largest-magnitude loading of each axis is positive).
Matrix pca_reduce(const Matrix& points, std::size_t dims);

nlohmann::json to_json(const ProjectionResult& result);
ProjectionResult projection_from_json(const nlohmann::json& j);

}  // namespace layoutspace::cluster
