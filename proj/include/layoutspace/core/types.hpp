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

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace layoutspace {

/// Row-major so that each sample is a contiguous row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::RowVectorXd;
using RowRef = Eigen::Ref<const RowVector>;

enum class SplitTag { Train, Val, Test };

std::string_view to_string(SplitTag tag);
SplitTag parse_split_tag(std::string_view text);

/// One document's embedding plus identity and annotation.
struct EmbeddingRecord {
  std::string sample_id;
  std::vector<float> vector;
  std::optional<std::string> layout_label;
  std::optional<SplitTag> split;
  std::map<std::string, std::string> metadata;

  friend bool operator==(const EmbeddingRecord&, const EmbeddingRecord&) = default;
};

enum class DistanceMetric { Cosine, Euclidean };

std::string_view to_string(DistanceMetric metric);
DistanceMetric parse_metric(std::string_view text);

}  // namespace layoutspace
