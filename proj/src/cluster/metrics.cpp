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

#include "layoutspace/cluster/metrics.hpp"

#include "layoutspace/core/error.hpp"
#include "layoutspace/core/vector_ops.hpp"

#include <algorithm>
#include <limits>
#include <map>

namespace layoutspace::cluster {
namespace {

// Row i, column c: summed distance from sample i to every other member of class c.
Matrix class_distance_sums(const Matrix& prepared, std::span<const int> labels, int classes,
                           DistanceMetric metric) {
  const Eigen::Index n = prepared.rows();
  Matrix sums = Matrix::Zero(n, classes);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = prepared_distance(prepared.row(i), prepared.row(j), metric);
      sums(i, labels[static_cast<std::size_t>(j)]) += d;
      sums(j, labels[static_cast<std::size_t>(i)]) += d;
    }
  }
  return sums;
}

std::vector<double> silhouette_from_sums(const Matrix& sums, std::span<const int> labels,
                                         const std::vector<int>& sizes) {
  const Eigen::Index n = sums.rows();
  std::vector<double> s(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int own = labels[static_cast<std::size_t>(i)];
    if (sizes[static_cast<std::size_t>(own)] < 2) continue;
    const double a = sums(i, own) / (sizes[static_cast<std::size_t>(own)] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < static_cast<int>(sizes.size()); ++c) {
      if (c == own || sizes[static_cast<std::size_t>(c)] == 0) continue;
      b = std::min(b, sums(i, c) / sizes[static_cast<std::size_t>(c)]);
    }
    const double denom = std::max(a, b);
    s[static_cast<std::size_t>(i)] = denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return s;
}

void check_inputs(const Matrix& points, std::span<const int> labels) {
  if (static_cast<Eigen::Index>(labels.size()) != points.rows()) {
    throw Error(Errc::ShapeMismatch, "label count does not match point count");
  }
}

}  // namespace

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::vector<int> compact_labels(std::span<const int> labels, int* count) {
  std::map<int, int> index;
  for (int y : labels) index.emplace(y, 0);
  int next = 0;
  for (auto& [label, id] : index) id = next++;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int y : labels) out.push_back(index.at(y));
  if (count != nullptr) *count = next;
  return out;
}

std::vector<int> encode_labels(std::span<const std::string> labels, std::vector<std::string>* names) {
  std::map<std::string, int> index;
  for (const auto& y : labels) index.emplace(y, 0);
  int next = 0;
  for (auto& [label, id] : index) id = next++;
  if (names != nullptr) {
    names->clear();
    for (const auto& [label, id] : index) names->push_back(label);
  }
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& y : labels) out.push_back(index.at(y));
  return out;
}

std::vector<double> silhouette_samples(const Matrix& points, std::span<const int> labels, DistanceMetric metric) {
  check_inputs(points, labels);
  int classes = 0;
  const std::vector<int> compact = compact_labels(labels, &classes);
  if (classes < 2) throw Error(Errc::TooFewClasses, "silhouette needs at least two classes");
  std::vector<int> sizes(static_cast<std::size_t>(classes), 0);
  for (int y : compact) ++sizes[static_cast<std::size_t>(y)];
  const Matrix prepared = prepare_points(points, metric);
  return silhouette_from_sums(class_distance_sums(prepared, compact, classes, metric), compact, sizes);
}

LabeledMetrics labeled_metrics(const Matrix& points, std::span<const int> labels, DistanceMetric metric) {
  check_inputs(points, labels);
  int classes = 0;
  const std::vector<int> compact = compact_labels(labels, &classes);
  if (classes < 2) throw Error(Errc::TooFewClasses, "labeled metrics need at least two classes");

  const Matrix prepared = prepare_points(points, metric);
  std::vector<int> sizes(static_cast<std::size_t>(classes), 0);
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(classes));
  for (std::size_t i = 0; i < compact.size(); ++i) {
    ++sizes[static_cast<std::size_t>(compact[i])];
    members[static_cast<std::size_t>(compact[i])].push_back(i);
  }

  const Matrix sums = class_distance_sums(prepared, compact, classes, metric);
  LabeledMetrics out;
  out.per_sample_silhouette = silhouette_from_sums(sums, compact, sizes);
  out.silhouette_mean = mean(out.per_sample_silhouette);

  // Mean within-class pairwise distance per class, averaged over classes.
  double intra_total = 0.0;
  int intra_classes = 0;
  std::vector<double> within(static_cast<std::size_t>(classes), 0.0);
  for (std::size_t i = 0; i < compact.size(); ++i) {
    within[static_cast<std::size_t>(compact[i])] += sums(static_cast<Eigen::Index>(i), compact[i]);
  }
  for (int c = 0; c < classes; ++c) {
    const double m = sizes[static_cast<std::size_t>(c)];
    if (m < 2) continue;
    // Every unordered pair was counted twice in `within`.
    intra_total += within[static_cast<std::size_t>(c)] / (m * (m - 1.0));
    ++intra_classes;
  }
  out.intra_class_mean = intra_classes > 0 ? intra_total / intra_classes : 0.0;

  std::vector<RowVector> refs;
  std::vector<double> scatter(static_cast<std::size_t>(classes), 0.0);
  for (int c = 0; c < classes; ++c) {
    const auto& rows = members[static_cast<std::size_t>(c)];
    refs.push_back(reference_point(mean_of_rows(prepared, rows), metric));
    double s = 0.0;
    for (std::size_t r : rows) s += prepared_distance(prepared.row(static_cast<Eigen::Index>(r)), refs.back(), metric);
    scatter[static_cast<std::size_t>(c)] = s / static_cast<double>(rows.size());
  }

  double inter_total = 0.0;
  int pairs = 0;
  double dbi_total = 0.0;
  Matrix separation(classes, classes);
  for (int i = 0; i < classes; ++i) {
    for (int j = i + 1; j < classes; ++j) {
      const double m = prepared_distance(refs[static_cast<std::size_t>(i)], refs[static_cast<std::size_t>(j)], metric);
      separation(i, j) = m;
      separation(j, i) = m;
      inter_total += m;
      ++pairs;
    }
  }
  out.inter_class_mean = inter_total / pairs;
  for (int i = 0; i < classes; ++i) {
    double worst = 0.0;
    for (int j = 0; j < classes; ++j) {
      if (i == j) continue;
      const double m = separation(i, j);
      if (!(m > 1e-15)) {
        throw Error(Errc::DegenerateCentroids,
                    "classes " + std::to_string(i) + " and " + std::to_string(j) + " share a centroid");
      }
      worst = std::max(worst, (scatter[static_cast<std::size_t>(i)] + scatter[static_cast<std::size_t>(j)]) / m);
    }
    dbi_total += worst;
  }
  out.dbi = dbi_total / classes;
  return out;
}

LabeledMetrics labeled_metrics(std::span<const EmbeddingRecord> records, DistanceMetric metric) {
  std::vector<std::string> labels;
  labels.reserve(records.size());
  for (const auto& r : records) {
    if (!r.layout_label) throw Error(Errc::InvalidLabel, "record '" + r.sample_id + "' has no layout label");
    labels.push_back(*r.layout_label);
  }
  const std::vector<int> encoded = encode_labels(labels);
  return labeled_metrics(to_matrix(records), encoded, metric);
}

}  // namespace layoutspace::cluster
