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

#include "layoutspace/oracle/oracles.hpp"

#include "layoutspace/cluster/metrics.hpp"
#include "layoutspace/core/rng.hpp"
#include "layoutspace/learn/losses.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>

namespace layoutspace::oracle {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> unit(std::vector<double> v) {
  const double n = std::sqrt(dot(v, v));
  for (double& x : v) x /= n;
  return v;
}

std::vector<double> mean_of(const Rows& rows) {
  std::vector<double> m(rows.front().size(), 0.0);
  for (const auto& r : rows) {
    for (std::size_t d = 0; d < m.size(); ++d) m[d] += r[d];
  }
  for (double& x : m) x /= static_cast<double>(rows.size());
  return m;
}

Rows from_flat(const std::vector<double>& flat, std::size_t rows, std::size_t cols, std::size_t offset = 0) {
  Rows out(rows, std::vector<double>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) out[i][j] = flat[offset + i * cols + j];
  }
  return out;
}

Matrix to_matrix(const Rows& rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

void append(std::vector<double>& flat, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) flat.push_back(m(i, j));
  }
}

Rows random_rows(Rng& rng, std::size_t n, std::size_t d) {
  Rows r(n, std::vector<double>(d));
  for (auto& row : r) {
    for (double& x : row) x = rng.normal();
  }
  return r;
}

}  // namespace

double distance(const std::vector<double>& a, const std::vector<double>& b, DistanceMetric metric) {
  if (metric == DistanceMetric::Cosine) {
    return 1.0 - std::clamp(dot(a, b) / std::sqrt(dot(a, a) * dot(b, b)), -1.0, 1.0);
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

Metrics brute_force_metrics(const Rows& points, const std::vector<int>& labels, DistanceMetric metric) {
  const std::size_t n = points.size();
  std::map<int, Rows> classes;
  for (std::size_t i = 0; i < n; ++i) {
    classes[labels[i]].push_back(metric == DistanceMetric::Cosine ? unit(points[i]) : points[i]);
  }

  Metrics out;
  out.per_sample.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double a_sum = 0.0;
    std::size_t a_count = 0;
    std::map<int, std::pair<double, std::size_t>> others;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = distance(points[i], points[j], metric);
      if (labels[j] == labels[i]) {
        a_sum += d;
        ++a_count;
      } else {
        others[labels[j]].first += d;
        ++others[labels[j]].second;
      }
    }
    if (a_count == 0) {
      out.per_sample[i] = 0.0;
      continue;
    }
    const double a = a_sum / static_cast<double>(a_count);
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [label, acc] : others) b = std::min(b, acc.first / static_cast<double>(acc.second));
    const double denom = std::max(a, b);
    out.per_sample[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  }
  double s = 0.0;
  for (double v : out.per_sample) s += v;
  out.silhouette = s / static_cast<double>(n);

  double intra = 0.0;
  std::size_t intra_classes = 0;
  std::vector<std::vector<double>> centroids;
  std::vector<double> scatter;
  for (const auto& [label, rows] : classes) {
    if (rows.size() >= 2) {
      double pair_sum = 0.0;
      std::size_t pairs = 0;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = i + 1; j < rows.size(); ++j) {
          pair_sum += distance(rows[i], rows[j], metric);
          ++pairs;
        }
      }
      intra += pair_sum / static_cast<double>(pairs);
      ++intra_classes;
    }
    auto c = mean_of(rows);
    if (metric == DistanceMetric::Cosine) c = unit(c);
    double sc = 0.0;
    for (const auto& r : rows) sc += distance(r, c, metric);
    scatter.push_back(sc / static_cast<double>(rows.size()));
    centroids.push_back(std::move(c));
  }
  out.intra = intra_classes ? intra / static_cast<double>(intra_classes) : 0.0;

  const std::size_t k = centroids.size();
  double inter = 0.0;
  double dbi = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double worst = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      const double m = distance(centroids[i], centroids[j], metric);
      if (j > i) inter += m;
      worst = std::max(worst, (scatter[i] + scatter[j]) / m);
    }
    dbi += worst;
  }
  out.inter = inter / static_cast<double>(k * (k - 1) / 2);
  out.dbi = dbi / static_cast<double>(k);
  return out;
}

double arcface(const Rows& z, const std::vector<int>& labels, const Rows& weights, double scale, double margin) {
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const auto zi = unit(z[i]);
    std::vector<double> logits;
    for (const auto& w : weights) logits.push_back(scale * dot(zi, unit(w)));
    const double c = logits[static_cast<std::size_t>(labels[i])] / scale;
    const double theta = std::acos(c);
    // Past pi - m the angle can no longer grow; fall back to a linear penalty.
    const double target = theta + margin < std::numbers::pi ? std::cos(theta + margin) : c - margin * std::sin(margin);
    logits[static_cast<std::size_t>(labels[i])] = scale * target;
    double denom = 0.0;
    for (double l : logits) denom += std::exp(l);
    total += -std::log(std::exp(scale * target) / denom);
  }
  return total / static_cast<double>(z.size());
}

double supcon(const Rows& z, const std::vector<int>& labels, double temperature) {
  Rows u;
  for (const auto& r : z) u.push_back(unit(r));
  double total = 0.0;
  std::size_t anchors = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double denom = 0.0;
    for (std::size_t a = 0; a < u.size(); ++a) {
      if (a != i) denom += std::exp(dot(u[i], u[a]) / temperature);
    }
    double term = 0.0;
    std::size_t positives = 0;
    for (std::size_t p = 0; p < u.size(); ++p) {
      if (p == i || labels[p] != labels[i]) continue;
      term += std::log(std::exp(dot(u[i], u[p]) / temperature) / denom);
      ++positives;
    }
    if (positives == 0) continue;
    total += -term / static_cast<double>(positives);
    ++anchors;
  }
  return anchors ? total / static_cast<double>(anchors) : 0.0;
}

double center(const Rows& z, const std::vector<int>& labels, const Rows& centers) {
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const auto& c = centers[static_cast<std::size_t>(labels[i])];
    for (std::size_t d = 0; d < c.size(); ++d) total += 0.5 * (z[i][d] - c[d]) * (z[i][d] - c[d]);
  }
  return total;
}

std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, double step) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + step;
    const double up = f(x);
    x[i] = keep - step;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

double max_relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-5});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
  }
  return worst;
}

GradientCheck check_loss_gradients(std::uint64_t seed, std::size_t batches, double step) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(seed);
  GradientCheck out;
  out.batches = batches;
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t n = 2 + rng.index(7);   // 2..8
    const std::size_t d = 2 + rng.index(15);  // 2..16
    const std::size_t c = 2 + rng.index(4);   // 2..5
    std::vector<int> labels(n);
    for (auto& y : labels) y = static_cast<int>(rng.index(c));
    const Rows z = random_rows(rng, n, d);
    const Rows w = random_rows(rng, c, d);
    const Rows centers = random_rows(rng, c, d);
    const double scale = 1.0 + 29.0 * rng.uniform();
    const double margin = 0.05 + 0.45 * rng.uniform();
    const double temperature = 0.1 + 0.9 * rng.uniform();
    const learn::LossWeights weights{0.1 + rng.uniform(), 0.1 + rng.uniform(), 0.001 + 0.01 * rng.uniform()};

    learn::Batch batch{to_matrix(z), labels};
    learn::ArcFaceHead head{to_matrix(w), scale, margin};
    learn::SupConConfig cfg{temperature};
    learn::ClassCenters cc{to_matrix(centers), 0.5};

    // Parameter vector layout: embeddings, arcface weights, centers.
    std::vector<double> x;
    for (const auto& r : z) x.insert(x.end(), r.begin(), r.end());
    for (const auto& r : w) x.insert(x.end(), r.begin(), r.end());
    for (const auto& r : centers) x.insert(x.end(), r.begin(), r.end());
    const std::size_t off_w = n * d;
    const std::size_t off_c = off_w + c * d;

    auto run = [&](int which, const learn::LossBundle& bundle, double oracle_value,
                   const std::function<double(const std::vector<double>&)>& f) {
      std::vector<double> analytic;
      append(analytic, bundle.grad_embeddings);
      append(analytic, bundle.grad_arcface_weights ? *bundle.grad_arcface_weights : Matrix::Zero(c, d));
      append(analytic, bundle.grad_centers ? *bundle.grad_centers : Matrix::Zero(c, d));
      const auto numeric = numeric_gradient(f, x, step);
      out.worst[which] = std::max(out.worst[which], max_relative_error(analytic, numeric));
      out.worst_value_gap = std::max(out.worst_value_gap, std::abs(bundle.value - oracle_value));
    };

    auto f_arc = [&](const std::vector<double>& p) {
      return arcface(from_flat(p, n, d), labels, from_flat(p, c, d, off_w), scale, margin);
    };
    auto f_sup = [&](const std::vector<double>& p) { return supcon(from_flat(p, n, d), labels, temperature); };
    auto f_cen = [&](const std::vector<double>& p) {
      return center(from_flat(p, n, d), labels, from_flat(p, c, d, off_c));
    };
    auto f_all = [&](const std::vector<double>& p) {
      return weights.arcface * f_arc(p) + weights.supcon * f_sup(p) + weights.center * f_cen(p);
    };

    run(0, learn::arcface_loss(batch, head), f_arc(x), f_arc);
    run(1, learn::supcon_loss(batch, cfg), f_sup(x), f_sup);
    run(2, learn::center_loss(batch, cc), f_cen(x), f_cen);
    run(3, learn::composite_loss(batch, head, cfg, cc, weights), f_all(x), f_all);
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

MetricCheck check_labeled_metrics(std::uint64_t seed, std::size_t sets, std::size_t max_n) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(seed);
  MetricCheck out;
  out.sets = sets;
  for (std::size_t s = 0; s < sets; ++s) {
    const std::size_t n = 4 + rng.index(max_n - 3);
    const std::size_t d = 2 + rng.index(15);
    const std::size_t k = 2 + rng.index(std::min<std::size_t>(6, n / 2 - 1));
    const DistanceMetric metric = s % 2 == 0 ? DistanceMetric::Euclidean : DistanceMetric::Cosine;
    Rows centers = random_rows(rng, k, d);
    Rows points;
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i) {
      // Every class gets at least one member; some end up as singletons.
      const int y = i < k ? static_cast<int>(i) : static_cast<int>(rng.index(k));
      std::vector<double> p = centers[static_cast<std::size_t>(y)];
      for (double& x : p) x += 0.5 * rng.normal();
      points.push_back(std::move(p));
      labels.push_back(y * 7 - 3);  // arbitrary, non-contiguous label values
    }
    const Metrics ref = brute_force_metrics(points, labels, metric);
    const auto got = cluster::labeled_metrics(to_matrix(points), labels, metric);
    double worst = std::max({std::abs(ref.intra - got.intra_class_mean), std::abs(ref.inter - got.inter_class_mean),
                             std::abs(ref.silhouette - got.silhouette_mean), std::abs(ref.dbi - got.dbi)});
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(ref.per_sample[i] - got.per_sample_silhouette[i]));
    out.worst = std::max(out.worst, worst);
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

Matrix two_pair_fixture() {
  Matrix m(4, 2);
  m << 0, 0, 0, 1, 10, 0, 10, 1;
  return m;
}

Matrix two_blob_fixture() {
  Matrix m(4, 2);
  m << 0, 0, 0, 2, 10, 0, 10, 2;
  return m;
}

}  // namespace layoutspace::oracle
