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

#include "helpers.hpp"

#include <atomic>
#include <cstdio>
#include <unistd.h>

namespace layoutspace::testing {

std::vector<EmbeddingRecord> records_from(const Matrix& points, const std::vector<std::string>& labels) {
  std::vector<EmbeddingRecord> out;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    EmbeddingRecord r;
    char id[32];
    std::snprintf(id, sizeof id, "p%03ld", static_cast<long>(i));
    r.sample_id = id;
    for (Eigen::Index d = 0; d < points.cols(); ++d) r.vector.push_back(static_cast<float>(points(i, d)));
    if (!labels.empty()) r.layout_label = labels[static_cast<std::size_t>(i)];
    out.push_back(std::move(r));
  }
  return out;
}

Matrix gaussian_blobs(const Matrix& centers, std::size_t per_blob, double sigma, Rng& rng, std::vector<int>* labels) {
  const auto n = static_cast<Eigen::Index>(per_blob) * centers.rows();
  Matrix out(n, centers.cols());
  if (labels) labels->clear();
  Eigen::Index row = 0;
  for (Eigen::Index c = 0; c < centers.rows(); ++c) {
    for (std::size_t i = 0; i < per_blob; ++i, ++row) {
      for (Eigen::Index d = 0; d < centers.cols(); ++d) out(row, d) = centers(c, d) + sigma * rng.normal();
      if (labels) labels->push_back(static_cast<int>(c));
    }
  }
  return out;
}

PointSet point_set(const Matrix& points, std::uint64_t snapshot_version) {
  PointSet set;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "p%03ld", static_cast<long>(i));
    set.ids.push_back(id);
  }
  set.points = points;
  set.snapshot_version = snapshot_version;
  return set;
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("layoutspace-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace layoutspace::testing
