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
#include <string>
#include <vector>

namespace layoutspace::cluster {

/// The four ablation-table columns plus per-sample silhouettes.
struct LabeledMetrics {
  double intra_class_mean = 0.0;
  double inter_class_mean = 0.0;
  double silhouette_mean = 0.0;
  std::vector<double> per_sample_silhouette;
  double dbi = 0.0;
};

/// Labels are arbitrary integers; they are compacted internally. Requires at
/// least two distinct labels. Singleton classes get s(i) = 0 and are left out
/// of the intra-class mean. Coincident class centroids raise
/// DegenerateCentroids.
LabeledMetrics labeled_metrics(const Matrix& points, std::span<const int> labels, DistanceMetric metric);

/// Same, labelling each record by its layout label. Unlabelled records are
/// rejected with InvalidLabel.
LabeledMetrics labeled_metrics(std::span<const EmbeddingRecord> records, DistanceMetric metric);

/// Per-sample silhouette only (no centroid computations, never throws
/// DegenerateCentroids). Used by k selection and cluster refinement.
std::vector<double> silhouette_samples(const Matrix& points, std::span<const int> labels, DistanceMetric metric);

double mean(std::span<const double> values);

/// Maps distinct labels to 0..K-1 in ascending order of first value.
std::vector<int> compact_labels(std::span<const int> labels, int* count = nullptr);

/// Encodes string labels as integers in lexicographic order.
std::vector<int> encode_labels(std::span<const std::string> labels, std::vector<std::string>* names = nullptr);

}  // namespace layoutspace::cluster
