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

#include "layoutspace/cluster/export.hpp"

#include "layoutspace/core/error.hpp"

#include <cmath>

namespace layoutspace::cluster {

using nlohmann::json;

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string export_rows_jsonl(const ClusterModel* model, const ProjectionResult* projection) {
  if (!model && !projection) throw Error(Errc::InvalidArgument, "nothing to export");
  const std::vector<std::string>& ids = model ? model->sample_ids : projection->sample_ids;
  if (model && projection && model->sample_ids != projection->sample_ids) {
    throw Error(Errc::SnapshotMismatch, "cluster model and projection cover different samples");
  }
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    json row;
    row["sample_id"] = ids[i];
    row["cluster_id"] = nullptr;
    row["centroid_distance"] = nullptr;
    row["z"] = nullptr;
    row["x"] = nullptr;
    row["y"] = nullptr;
    if (model && model->assignment[i] != kNoise) {
      row["cluster_id"] = model->assignment[i];
      if (!model->centroid_distance.empty()) {
        row["centroid_distance"] = number_or_null(model->centroid_distance[i]);
        row["z"] = number_or_null(model->zscore(i));
      }
    }
    if (projection) {
      row["x"] = projection->coordinates(static_cast<Eigen::Index>(i), 0);
      row["y"] = projection->coordinates(static_cast<Eigen::Index>(i), 1);
    }
    out += row.dump();
    out += '\n';
  }
  return out;
}

}  // namespace layoutspace::cluster
