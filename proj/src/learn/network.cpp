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

#include "layoutspace/learn/network.hpp"

#include "layoutspace/core/error.hpp"

#include <cmath>

namespace layoutspace::learn {

Dense Dense::init(Eigen::Index in, Eigen::Index out, Rng& rng) {
  // He-style scaling for the relu stacks used throughout.
  const double scale = std::sqrt(2.0 / static_cast<double>(in));
  Dense d{Matrix(in, out), RowVector::Zero(out)};
  for (Eigen::Index i = 0; i < in; ++i) {
    for (Eigen::Index j = 0; j < out; ++j) d.weight(i, j) = scale * rng.normal();
  }
  return d;
}

Matrix Dense::forward(const Matrix& x) const {
  if (x.cols() != weight.rows()) {
    throw Error(Errc::ShapeMismatch, "dense input width " + std::to_string(x.cols()) + " != " +
                                         std::to_string(weight.rows()));
  }
  Matrix y = x * weight;
  y.rowwise() += bias;
  return y;
}

Matrix dense_backward(const Dense& layer, const Matrix& x, const Matrix& grad_out, DenseGrad& grad) {
  grad.weight = x.transpose() * grad_out;
  grad.bias = grad_out.colwise().sum();
  return grad_out * layer.weight.transpose();
}

BatchNorm BatchNorm::init(Eigen::Index width) {
  return BatchNorm{RowVector::Ones(width), RowVector::Zero(width), RowVector::Zero(width),
                   RowVector::Ones(width)};
}

Matrix batchnorm_forward(BatchNorm& bn, const Matrix& x, bool training, BatchNormCache* cache) {
  if (x.cols() != bn.gamma.cols()) throw Error(Errc::ShapeMismatch, "batch-norm width mismatch");
  RowVector mean;
  RowVector var;
  if (training) {
    const double n = static_cast<double>(x.rows());
    mean = x.colwise().mean();
    var = (x.rowwise() - mean).array().square().colwise().sum() / n;
    const double unbias = x.rows() > 1 ? n / (n - 1.0) : 1.0;
    bn.running_mean = (1.0 - bn.momentum) * bn.running_mean + bn.momentum * mean;
    bn.running_var = (1.0 - bn.momentum) * bn.running_var + bn.momentum * unbias * var;
  } else {
    mean = bn.running_mean;
    var = bn.running_var;
  }
  const RowVector inv_std = (var.array() + bn.eps).rsqrt().matrix();
  Matrix normalized = (x.rowwise() - mean).array().rowwise() * inv_std.array();
  Matrix y = normalized.array().rowwise() * bn.gamma.array();
  y.rowwise() += bn.beta;
  if (cache != nullptr) {
    cache->normalized = std::move(normalized);
    cache->inv_std = inv_std;
  }
  return y;
}

Matrix batchnorm_backward(const BatchNorm& bn, const BatchNormCache& cache, const Matrix& grad_out,
                          BatchNormGrad& grad) {
  const double n = static_cast<double>(grad_out.rows());
  grad.gamma = (grad_out.array() * cache.normalized.array()).colwise().sum().matrix();
  grad.beta = grad_out.colwise().sum();
  const Matrix g_hat = grad_out.array().rowwise() * bn.gamma.array();
  const RowVector mean_g = g_hat.colwise().sum() / n;
  const RowVector mean_gx = (g_hat.array() * cache.normalized.array()).colwise().sum().matrix() / n;
  Matrix out = g_hat.rowwise() - mean_g;
  out -= (cache.normalized.array().rowwise() * mean_gx.array()).matrix();
  return out.array().rowwise() * cache.inv_std.array();
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, std::uint64_t seed,
                    std::uint64_t step) {
  if (rate <= 0.0) return Matrix::Ones(rows, cols);
  const double keep = 1.0 / (1.0 - rate);
  Matrix mask(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double u = counter_uniform(seed, step, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j));
      mask(i, j) = u < rate ? 0.0 : keep;
    }
  }
  return mask;
}

Matrix relu(const Matrix& x) { return x.cwiseMax(0.0); }

ProjectionHead ProjectionHead::init(Eigen::Index in, Eigen::Index hidden_width, Eigen::Index out,
                                    double dropout, Rng& rng) {
  if (!(dropout >= 0.0 && dropout < 1.0)) throw Error(Errc::InvalidArgument, "dropout must lie in [0, 1)");
  ProjectionHead head;
  head.hidden = Dense::init(in, hidden_width, rng);
  head.norm = BatchNorm::init(hidden_width);
  head.output = Dense::init(hidden_width, out, rng);
  head.dropout = dropout;
  return head;
}

Matrix projection_forward(ProjectionHead& head, const Matrix& features, bool training, std::uint64_t seed,
                          std::uint64_t step, ProjectionCache* cache) {
  if (features.cols() != head.in_dim()) {
    throw Error(Errc::ShapeMismatch, "feature width " + std::to_string(features.cols()) +
                                         " does not match projection input " + std::to_string(head.in_dim()));
  }
  if (!training) return projection_forward(static_cast<const ProjectionHead&>(head), features);

  ProjectionCache local;
  ProjectionCache& c = cache != nullptr ? *cache : local;
  c.input = features;
  c.pre_norm = head.hidden.forward(features);
  const Matrix normed = batchnorm_forward(head.norm, c.pre_norm, true, &c.norm);
  c.activated = relu(normed);
  c.mask = dropout_mask(c.activated.rows(), c.activated.cols(), head.dropout, seed, step);
  c.dropped = c.activated.cwiseProduct(c.mask);
  return head.output.forward(c.dropped);
}

Matrix projection_forward(const ProjectionHead& head, const Matrix& features) {
  if (features.cols() != head.in_dim()) {
    throw Error(Errc::ShapeMismatch, "feature width " + std::to_string(features.cols()) +
                                         " does not match projection input " + std::to_string(head.in_dim()));
  }
  BatchNorm frozen = head.norm;
  const Matrix normed = batchnorm_forward(frozen, head.hidden.forward(features), false, nullptr);
  return head.output.forward(relu(normed));
}

Matrix projection_backward(const ProjectionHead& head, const ProjectionCache& cache, const Matrix& grad_out,
                           ProjectionGrad& grad) {
  const Matrix g_dropped = dense_backward(head.output, cache.dropped, grad_out, grad.output);
  Matrix g_act = g_dropped.cwiseProduct(cache.mask);
  // relu'(normed) is nonzero exactly where the activation is positive.
  g_act = (cache.activated.array() > 0.0).select(g_act, 0.0);
  const Matrix g_pre = batchnorm_backward(head.norm, cache.norm, g_act, grad.norm);
  return dense_backward(head.hidden, cache.input, g_pre, grad.hidden);
}

Backbone Backbone::init(Eigen::Index width, Eigen::Index rank, std::size_t depth, Rng& rng) {
  Backbone net;
  for (std::size_t b = 0; b < depth; ++b) {
    ResidualBlock block{Dense::init(width, rank, rng), Dense::init(rank, width, rng)};
    // Small residual branch: a "pretrained" encoder that starts close to the identity.
    block.up.weight *= 0.1;
    net.blocks.push_back(std::move(block));
  }
  return net;
}

Eigen::Index Backbone::width() const {
  return blocks.empty() ? 0 : blocks.front().down.in_dim();
}

Matrix backbone_forward(const Backbone& net, const Matrix& x, std::vector<BlockCache>* caches) {
  Matrix h = x;
  if (caches != nullptr) caches->clear();
  for (const auto& block : net.blocks) {
    Matrix pre = block.down.forward(h);
    Matrix act = relu(pre);
    Matrix next = h + block.up.forward(act);
    if (caches != nullptr) caches->push_back(BlockCache{std::move(h), std::move(pre), std::move(act)});
    h = std::move(next);
  }
  return h;
}

std::vector<BlockGrad> backbone_backward(const Backbone& net, const std::vector<BlockCache>& caches,
                                         const Matrix& grad_out, std::size_t trainable) {
  const std::size_t depth = net.blocks.size();
  trainable = std::min(trainable, depth);
  std::vector<BlockGrad> grads(trainable);
  Matrix g = grad_out;
  for (std::size_t k = 0; k < trainable; ++k) {
    const std::size_t b = depth - 1 - k;
    const auto& block = net.blocks[b];
    const auto& cache = caches[b];
    BlockGrad& bg = grads[trainable - 1 - k];
    Matrix g_act = dense_backward(block.up, cache.activated, g, bg.up);
    g_act = (cache.pre.array() > 0.0).select(g_act, 0.0);
    g += dense_backward(block.down, cache.input, g_act, bg.down);
  }
  return grads;
}

}  // namespace layoutspace::learn
