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

#include "layoutspace/learn/losses.hpp"

#include "layoutspace/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace layoutspace::learn {
namespace {

constexpr double kCosClamp = 1e-7;

struct Normalized {
  Matrix unit;
  Eigen::VectorXd norms;
};

Normalized normalize_rows_checked(const Matrix& m, Errc zero_error, const char* what) {
  Normalized out{m, Eigen::VectorXd(m.rows())};
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double n = m.row(i).norm();
    if (!(n >= 1e-30) || !std::isfinite(n)) {
      throw Error(zero_error, std::string(what) + " row " + std::to_string(i) + " is zero or non-finite");
    }
    out.norms(i) = n;
    out.unit.row(i) /= n;
  }
  return out;
}

// Gradient through x -> x / ||x||, row by row.
Matrix backprop_normalize(const Matrix& grad_unit, const Normalized& n) {
  Matrix out(grad_unit.rows(), grad_unit.cols());
  for (Eigen::Index i = 0; i < grad_unit.rows(); ++i) {
    const auto u = n.unit.row(i);
    const double radial = u.dot(grad_unit.row(i));
    out.row(i) = (grad_unit.row(i) - radial * u) / n.norms(i);
  }
  return out;
}

void check_labels(const Batch& batch, Eigen::Index classes, Errc code) {
  if (static_cast<Eigen::Index>(batch.labels.size()) != batch.size()) {
    throw Error(Errc::ShapeMismatch, "label count does not match batch size");
  }
  for (int y : batch.labels) {
    if (y < 0 || y >= classes) {
      throw Error(code, "label " + std::to_string(y) + " outside [0, " + std::to_string(classes) + ")");
    }
  }
}

double log_sum_exp(const Eigen::VectorXd& v) {
  const double mx = v.maxCoeff();
  return mx + std::log((v.array() - mx).exp().sum());
}

}  // namespace

void ArcFaceHead::normalize_rows() {
  for (Eigen::Index j = 0; j < weights.rows(); ++j) {
    const double n = weights.row(j).norm();
    if (n > 0.0) weights.row(j) /= n;
  }
}

void ArcFaceHead::validate() const {
  if (!(scale > 0.0)) throw Error(Errc::InvalidArgument, "arcface scale must be positive");
  if (!(margin >= 0.0 && margin < std::numbers::pi / 2)) {
    throw Error(Errc::InvalidArgument, "arcface margin must lie in [0, pi/2)");
  }
  if (weights.rows() < 1) throw Error(Errc::InvalidArgument, "arcface head has no classes");
}

void LossWeights::validate() const {
  if (arcface < 0.0 || supcon < 0.0 || center < 0.0) {
    throw Error(Errc::InvalidArgument, "loss weights must be nonnegative");
  }
  if (!(arcface > 0.0 || supcon > 0.0 || center > 0.0)) {
    throw Error(Errc::InvalidArgument, "at least one loss weight must be positive");
  }
}

double arcface_target_logit_cosine(double cos_theta, double margin) {
  const double c = std::clamp(cos_theta, -1.0 + kCosClamp, 1.0 - kCosClamp);
  if (c < std::cos(std::numbers::pi - margin)) return c - margin * std::sin(margin);
  const double sin_theta = std::sqrt(1.0 - c * c);
  return c * std::cos(margin) - sin_theta * std::sin(margin);
}

LossBundle arcface_loss(const Batch& batch, const ArcFaceHead& head) {
  head.validate();
  const Eigen::Index n = batch.size();
  const Eigen::Index classes = head.weights.rows();
  if (n < 1) throw Error(Errc::BatchTooSmall, "empty batch");
  if (head.weights.cols() != batch.embeddings.cols()) {
    throw Error(Errc::ShapeMismatch, "arcface weight width does not match embedding width");
  }
  check_labels(batch, classes, Errc::InvalidLabel);

  const Normalized z = normalize_rows_checked(batch.embeddings, Errc::DegenerateEmbedding, "embedding");
  const Normalized w = normalize_rows_checked(head.weights, Errc::InvalidArgument, "arcface weight");
  const Matrix cosines = z.unit * w.unit.transpose();  // N x C

  const double cos_m = std::cos(head.margin);
  const double sin_m = std::sin(head.margin);
  const double threshold = std::cos(std::numbers::pi - head.margin);
  const double inv_n = 1.0 / static_cast<double>(n);

  Matrix grad_cos = Matrix::Zero(n, classes);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = batch.labels[static_cast<std::size_t>(i)];
    const double raw = cosines(i, y);
    const double c = std::clamp(raw, -1.0 + kCosClamp, 1.0 - kCosClamp);
    double target;
    double d_target;  // d target / d raw cosine
    if (c < threshold) {
      target = c - head.margin * sin_m;
      d_target = 1.0;
    } else {
      const double sin_theta = std::sqrt(1.0 - c * c);
      target = c * cos_m - sin_theta * sin_m;
      d_target = cos_m + c * sin_m / sin_theta;
    }
    if (raw != c) d_target = 0.0;

    Eigen::VectorXd logits = head.scale * cosines.row(i).transpose();
    logits(y) = head.scale * target;
    const double lse = log_sum_exp(logits);
    total += lse - logits(y);

    const Eigen::VectorXd p = (logits.array() - lse).exp();
    for (Eigen::Index j = 0; j < classes; ++j) {
      const double d_logit = (p(j) - (j == y ? 1.0 : 0.0)) * inv_n;
      grad_cos(i, j) = d_logit * head.scale * (j == y ? d_target : 1.0);
    }
  }

  LossBundle out;
  out.value = total * inv_n;
  out.grad_embeddings = backprop_normalize(grad_cos * w.unit, z);
  out.grad_arcface_weights = backprop_normalize(grad_cos.transpose() * z.unit, w);
  return out;
}

LossBundle supcon_loss(const Batch& batch, const SupConConfig& cfg) {
  if (!(cfg.temperature > 0.0)) throw Error(Errc::InvalidArgument, "temperature must be positive");
  const Eigen::Index n = batch.size();
  if (n < 2) throw Error(Errc::BatchTooSmall, "supervised contrastive loss needs at least 2 samples");
  if (static_cast<Eigen::Index>(batch.labels.size()) != n) {
    throw Error(Errc::ShapeMismatch, "label count does not match batch size");
  }

  const Normalized z = normalize_rows_checked(batch.embeddings, Errc::DegenerateEmbedding, "embedding");
  const Matrix sim = (z.unit * z.unit.transpose()) / cfg.temperature;

  // d loss / d sim(i, a), accumulated over anchors that have positives.
  Matrix grad_sim = Matrix::Zero(n, n);
  double total = 0.0;
  Eigen::Index anchors = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int yi = batch.labels[static_cast<std::size_t>(i)];
    Eigen::Index positives = 0;
    for (Eigen::Index a = 0; a < n; ++a) {
      if (a != i && batch.labels[static_cast<std::size_t>(a)] == yi) ++positives;
    }
    if (positives == 0) continue;
    ++anchors;

    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < n; ++a) {
      if (a != i) mx = std::max(mx, sim(i, a));
    }
    double denom = 0.0;
    for (Eigen::Index a = 0; a < n; ++a) {
      if (a != i) denom += std::exp(sim(i, a) - mx);
    }
    const double lse = mx + std::log(denom);

    double positive_sum = 0.0;
    for (Eigen::Index a = 0; a < n; ++a) {
      if (a == i) continue;
      const bool positive = batch.labels[static_cast<std::size_t>(a)] == yi;
      if (positive) positive_sum += sim(i, a);
      grad_sim(i, a) = std::exp(sim(i, a) - lse) -
                       (positive ? 1.0 / static_cast<double>(positives) : 0.0);
    }
    total += lse - positive_sum / static_cast<double>(positives);
  }

  LossBundle out;
  out.warn_no_positives = anchors < n;
  if (anchors == 0) {
    out.value = 0.0;
    out.grad_embeddings = Matrix::Zero(n, batch.embeddings.cols());
    return out;
  }
  const double inv_anchors = 1.0 / static_cast<double>(anchors);
  out.value = total * inv_anchors;
  grad_sim *= inv_anchors / cfg.temperature;
  // sim(i,a) = <u_i, u_a>: row i receives grad_sim(i,a) u_a, row a receives grad_sim(i,a) u_i.
  const Matrix grad_unit = (grad_sim + grad_sim.transpose()) * z.unit;
  out.grad_embeddings = backprop_normalize(grad_unit, z);
  return out;
}

LossBundle center_loss(const Batch& batch, const ClassCenters& centers) {
  const Eigen::Index n = batch.size();
  if (centers.centers.cols() != batch.embeddings.cols()) {
    throw Error(Errc::ShapeMismatch, "center width does not match embedding width");
  }
  check_labels(batch, centers.centers.rows(), Errc::UnknownClass);

  LossBundle out;
  out.grad_embeddings.resize(n, batch.embeddings.cols());
  Matrix grad_centers = Matrix::Zero(centers.centers.rows(), centers.centers.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = batch.labels[static_cast<std::size_t>(i)];
    const RowVector diff = batch.embeddings.row(i) - centers.centers.row(y);
    total += 0.5 * diff.squaredNorm();
    out.grad_embeddings.row(i) = diff;
    grad_centers.row(y) -= diff;
  }
  out.value = total;
  out.grad_centers = std::move(grad_centers);
  return out;
}

ClassCenters update_centers(const Batch& batch, const ClassCenters& centers) {
  if (centers.centers.cols() != batch.embeddings.cols()) {
    throw Error(Errc::ShapeMismatch, "center width does not match embedding width");
  }
  if (!(centers.learning_rate > 0.0 && centers.learning_rate <= 1.0)) {
    throw Error(Errc::InvalidArgument, "center learning rate must lie in (0, 1]");
  }
  check_labels(batch, centers.centers.rows(), Errc::UnknownClass);

  const Eigen::Index k = centers.centers.rows();
  Matrix pull = Matrix::Zero(k, centers.centers.cols());
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < batch.size(); ++i) {
    const int y = batch.labels[static_cast<std::size_t>(i)];
    pull.row(y) += centers.centers.row(y) - batch.embeddings.row(i);
    ++counts[static_cast<std::size_t>(y)];
  }
  ClassCenters out = centers;
  for (Eigen::Index c = 0; c < k; ++c) {
    const int count = counts[static_cast<std::size_t>(c)];
    if (count == 0) continue;
    out.centers.row(c) -= centers.learning_rate * pull.row(c) / (1.0 + count);
  }
  return out;
}

LossBundle composite_loss(const Batch& batch, const ArcFaceHead& head, const SupConConfig& cfg,
                          const ClassCenters& centers, const LossWeights& weights) {
  weights.validate();
  LossBundle out;
  out.grad_embeddings = Matrix::Zero(batch.size(), batch.embeddings.cols());
  if (weights.arcface > 0.0) {
    LossBundle a = arcface_loss(batch, head);
    out.value += weights.arcface * a.value;
    out.grad_embeddings += weights.arcface * a.grad_embeddings;
    out.grad_arcface_weights = weights.arcface * *a.grad_arcface_weights;
  }
  if (weights.supcon > 0.0) {
    LossBundle s = supcon_loss(batch, cfg);
    out.value += weights.supcon * s.value;
    out.grad_embeddings += weights.supcon * s.grad_embeddings;
    out.warn_no_positives = s.warn_no_positives;
  }
  if (weights.center > 0.0) {
    LossBundle c = center_loss(batch, centers);
    out.value += weights.center * c.value;
    out.grad_embeddings += weights.center * c.grad_embeddings;
    out.grad_centers = weights.center * *c.grad_centers;
  }
  return out;
}

}  // namespace layoutspace::learn
