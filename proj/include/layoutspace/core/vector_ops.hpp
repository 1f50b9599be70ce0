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

#include <span>
#include <vector>

namespace layoutspace {

/// Unit-norm copy of `v`. Throws ZeroVector when ||v|| < 1e-30.
std::vector<double> l2_normalize(std::span<const double> v);

/// Cosine similarity clamped into [-1, 1].
double cosine_similarity(std::span<const double> a, std::span<const double> b);

double distance(std::span<const double> a, std::span<const double> b, DistanceMetric metric);

/// Full symmetric distance matrix with an exact zero diagonal.
Matrix pairwise_distances(std::span<const EmbeddingRecord> records, DistanceMetric metric);

/// Componentwise mean. Throws EmptySet / DimensionMismatch.
std::vector<double> centroid(const std::vector<std::vector<double>>& vectors);

std::vector<double> to_double(std::span<const float> v);

/// Stacks record vectors into an N x D matrix, checking uniform dimension.
Matrix to_matrix(std::span<const EmbeddingRecord> records);

// Metric-prepared point sets. Under the cosine metric every row is
// L2-normalized up front so that distances reduce to 1 - <a, b>; under the
// euclidean metric rows are left untouched.

Matrix prepare_points(const Matrix& points, DistanceMetric metric);

/// Distance between two rows that were passed through prepare_points.
inline double prepared_distance(const RowRef& a, const RowRef& b, DistanceMetric metric) {
  if (metric == DistanceMetric::Cosine) {
    double c = a.dot(b);
    c = c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c);
    return 1.0 - c;
  }
  return (a - b).norm();
}

/// Turns a centroid (mean of prepared rows) into a point comparable with
/// prepared_distance. Cosine centroids are re-normalized; a vanishing
/// centroid throws ZeroVector.
RowVector reference_point(const RowRef& centroid, DistanceMetric metric);

/// Mean of the given rows of `points`.
RowVector mean_of_rows(const Matrix& points, std::span<const std::size_t> rows);

}  // namespace layoutspace
