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

#include "layoutspace/cluster/model.hpp"
#include "layoutspace/cluster/tsne.hpp"

#include <string>

namespace layoutspace::cluster {

/// JSON-lines rows {sample_id, cluster_id, x, y, centroid_distance, z}, one
/// per sample, in sample order. Either input may be null; missing fields are
/// written as null. When both are given they must cover the same ids.
std::string export_rows_jsonl(const ClusterModel* model, const ProjectionResult* projection);

}  // namespace layoutspace::cluster
