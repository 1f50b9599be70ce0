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

#include <optional>
#include <vector>

namespace layoutspace::learn {

/// Angular-margin softmax head. Rows of `weights` are class directions and
/// are kept unit-norm between updates; the forward pass re-normalizes them
/// anyway so that gradients are taken w.r.t. the raw parameters.
struct ArcFaceHead {
  Matrix weights;  // C x D
  double scale = 30.0;
  double margin = 0.5;

  void normalize_rows();
  void validate() const;
};

struct SupConConfig {
  double temperature = 0.1;
};

struct ClassCenters {
  Matrix centers;  // K x D
  double learning_rate = 0.5;
};

struct LossWeights {
  double arcface = 1.0;
  double supcon = 1.0;
  double center = 0.003;

  void validate() const;
};

struct Batch {
  Matrix embeddings;  // N x D
  std::vector<int> labels;

  Eigen::Index size() const { return embeddings.rows(); }
};

struct LossBundle {
  double value = 0.0;
  Matrix grad_embeddings;
  std::optional<Matrix> grad_arcface_weights;
  std::optional<Matrix> grad_centers;
  /// Set by SupCon when at least one anchor had no positive in the batch.
  bool warn_no_positives = false;
};

LossBundle arcface_loss(const Batch& batch, const ArcFaceHead& head);
LossBundle supcon_loss(const Batch& batch, const SupConConfig& cfg);
LossBundle center_loss(const Batch& batch, const ClassCenters& centers);

/// c_k <- c_k - alpha * sum_{i: y_i = k}(c_k - z_i) / (1 + n_k).
ClassCenters update_centers(const Batch& batch, const ClassCenters& centers);

/// Weighted sum of the three losses; zero-weight terms are not evaluated.
LossBundle composite_loss(const Batch& batch, const ArcFaceHead& head, const SupConConfig& cfg,
                          const ClassCenters& centers, const LossWeights& weights);

/// The margin-adjusted target cosine used by arcface_loss, exposed for tests.
double arcface_target_logit_cosine(double cos_theta, double margin);

}  // namespace layoutspace::learn
