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

#include "layoutspace/core/rng.hpp"
#include "layoutspace/core/types.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace layoutspace::learn {

/// Fully connected layer y = x W + b with W stored in x out.
struct Dense {
  Matrix weight;
  RowVector bias;

  static Dense init(Eigen::Index in, Eigen::Index out, Rng& rng);

  Eigen::Index in_dim() const { return weight.rows(); }
  Eigen::Index out_dim() const { return weight.cols(); }
  Matrix forward(const Matrix& x) const;
};

struct DenseGrad {
  Matrix weight;
  RowVector bias;
};

/// Returns d loss / d x and fills `grad`.
Matrix dense_backward(const Dense& layer, const Matrix& x, const Matrix& grad_out, DenseGrad& grad);

struct BatchNorm {
  RowVector gamma;
  RowVector beta;
  RowVector running_mean;
  RowVector running_var;
  double momentum = 0.1;
  double eps = 1e-5;

  static BatchNorm init(Eigen::Index width);
};

struct BatchNormCache {
  Matrix normalized;
  RowVector inv_std;
};

struct BatchNormGrad {
  RowVector gamma;
  RowVector beta;
};

/// Training mode uses batch statistics and updates the running averages.
Matrix batchnorm_forward(BatchNorm& bn, const Matrix& x, bool training, BatchNormCache* cache);
Matrix batchnorm_backward(const BatchNorm& bn, const BatchNormCache& cache, const Matrix& grad_out,
                          BatchNormGrad& grad);

/// Inverted dropout keyed by (seed, step, row, column). Returns the mask
/// already scaled by 1 / (1 - rate).
Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, std::uint64_t seed,
                    std::uint64_t step);

Matrix relu(const Matrix& x);

/// Dense -> BatchNorm -> ReLU -> Dropout -> Dense.
struct ProjectionHead {
  Dense hidden;
  BatchNorm norm;
  Dense output;
  double dropout = 0.1;

  static ProjectionHead init(Eigen::Index in, Eigen::Index hidden_width, Eigen::Index out, double dropout,
                             Rng& rng);

  Eigen::Index in_dim() const { return hidden.in_dim(); }
  Eigen::Index out_dim() const { return output.out_dim(); }
};

struct ProjectionCache {
  Matrix input;
  Matrix pre_norm;
  BatchNormCache norm;
  Matrix activated;  // after relu, before dropout
  Matrix mask;
  Matrix dropped;
};

struct ProjectionGrad {
  DenseGrad hidden;
  BatchNormGrad norm;
  DenseGrad output;
};

/// training=false disables dropout and uses running batch-norm statistics.
/// `step` keys the dropout mask.
Matrix projection_forward(ProjectionHead& head, const Matrix& features, bool training,
                          std::uint64_t seed = 0, std::uint64_t step = 0, ProjectionCache* cache = nullptr);

/// Inference-only overload; never touches running statistics.
Matrix projection_forward(const ProjectionHead& head, const Matrix& features);

Matrix projection_backward(const ProjectionHead& head, const ProjectionCache& cache, const Matrix& grad_out,
                           ProjectionGrad& grad);

/// Residual low-rank block x + relu(x V + b) U + c: the desk-scale stand-in
/// for one pretrained encoder block.
struct ResidualBlock {
  Dense down;
  Dense up;
};

struct BlockCache {
  Matrix input;
  Matrix pre;
  Matrix activated;
};

struct BlockGrad {
  DenseGrad down;
  DenseGrad up;
};

struct Backbone {
  std::vector<ResidualBlock> blocks;

  static Backbone init(Eigen::Index width, Eigen::Index rank, std::size_t depth, Rng& rng);
  Eigen::Index width() const;
};

Matrix backbone_forward(const Backbone& net, const Matrix& x, std::vector<BlockCache>* caches = nullptr);

/// Back-propagates through the top `trainable` blocks only; returns the
/// gradients of those blocks ordered bottom to top.
std::vector<BlockGrad> backbone_backward(const Backbone& net, const std::vector<BlockCache>& caches,
                                         const Matrix& grad_out, std::size_t trainable);

}  // namespace layoutspace::learn
