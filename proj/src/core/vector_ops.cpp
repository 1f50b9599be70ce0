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

#include "layoutspace/core/vector_ops.hpp"

#include "layoutspace/core/error.hpp"

#include <algorithm>
#include <cmath>

namespace layoutspace {
namespace {

void require_same_dim(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(Errc::DimensionMismatch,
                "dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

double norm_of(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

}  // namespace

std::vector<double> l2_normalize(std::span<const double> v) {
  const double norm = norm_of(v);
  if (!(norm >= 1e-30)) throw Error(Errc::ZeroVector, "cannot normalize a zero vector");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / norm;
  return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a.size(), b.size());
  const double na = norm_of(a);
  const double nb = norm_of(b);
  if (!(na >= 1e-30) || !(nb >= 1e-30)) {
    throw Error(Errc::ZeroVector, "cosine similarity of a zero vector");
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

double distance(std::span<const double> a, std::span<const double> b, DistanceMetric metric) {
  require_same_dim(a.size(), b.size());
  if (metric == DistanceMetric::Cosine) return 1.0 - cosine_similarity(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

Matrix pairwise_distances(std::span<const EmbeddingRecord> records, DistanceMetric metric) {
  if (records.empty()) throw Error(Errc::EmptySet, "pairwise distances of an empty set");
  const Matrix points = prepare_points(to_matrix(records), metric);
  const Eigen::Index n = points.rows();
  Matrix out = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = prepared_distance(points.row(i), points.row(j), metric);
      out(i, j) = d;
      out(j, i) = d;
    }
  }
  return out;
}

std::vector<double> centroid(const std::vector<std::vector<double>>& vectors) {
  if (vectors.empty()) throw Error(Errc::EmptySet, "centroid of an empty set");
  std::vector<double> sum(vectors.front().size(), 0.0);
  for (const auto& v : vectors) {
    require_same_dim(sum.size(), v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sum[i] += v[i];
  }
  for (double& x : sum) x /= static_cast<double>(vectors.size());
  return sum;
}

std::vector<double> to_double(std::span<const float> v) {
  return std::vector<double>(v.begin(), v.end());
}

Matrix to_matrix(std::span<const EmbeddingRecord> records) {
  if (records.empty()) return Matrix(0, 0);
  const std::size_t dim = records.front().vector.size();
  Matrix out(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < records.size(); ++i) {
    require_same_dim(dim, records[i].vector.size());
    for (std::size_t j = 0; j < dim; ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = records[i].vector[j];
    }
  }
  return out;
}

Matrix prepare_points(const Matrix& points, DistanceMetric metric) {
  if (metric == DistanceMetric::Euclidean) return points;
  Matrix out = points;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double n = out.row(i).norm();
    if (!(n >= 1e-30)) {
      throw Error(Errc::ZeroVector, "row " + std::to_string(i) + " is a zero vector");
    }
    out.row(i) /= n;
  }
  return out;
}

RowVector reference_point(const RowRef& centroid, DistanceMetric metric) {
  if (metric == DistanceMetric::Euclidean) return centroid;
  const double n = centroid.norm();
  if (!(n >= 1e-30)) throw Error(Errc::ZeroVector, "centroid vanishes under cosine metric");
  return centroid / n;
}

RowVector mean_of_rows(const Matrix& points, std::span<const std::size_t> rows) {
  if (rows.empty()) throw Error(Errc::EmptySet, "mean of an empty row set");
  RowVector sum = RowVector::Zero(points.cols());
  for (std::size_t r : rows) sum += points.row(static_cast<Eigen::Index>(r));
  return sum / static_cast<double>(rows.size());
}

}  // namespace layoutspace
