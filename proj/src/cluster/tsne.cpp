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

#include "layoutspace/cluster/tsne.hpp"

#include "layoutspace/core/error.hpp"
#include "layoutspace/core/rng.hpp"
#include "layoutspace/core/vector_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace layoutspace::cluster {

using nlohmann::json;

namespace {

// Finds the Gaussian precision for one row so that the conditional
// distribution over `sq_dist` has the requested perplexity. Writes the
// normalized conditional probabilities into `p`.
void calibrate_row(const double* sq_dist, std::size_t count, double perplexity, double* p) {
  const double target = std::log(perplexity);
  double beta = 1.0;
  double lo = -std::numeric_limits<double>::max();
  double hi = std::numeric_limits<double>::max();
  for (int iter = 0; iter < 200; ++iter) {
    double sum = std::numeric_limits<double>::min();
    double weighted = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
      p[j] = std::exp(-beta * sq_dist[j]);
      sum += p[j];
      weighted += sq_dist[j] * p[j];
    }
    const double entropy = beta * weighted / sum + std::log(sum);
    const double diff = entropy - target;
    if (std::abs(diff) < 1e-5) break;
    if (diff > 0) {
      lo = beta;
      beta = hi == std::numeric_limits<double>::max() ? beta * 2.0 : (beta + hi) / 2.0;
    } else {
      hi = beta;
      beta = lo == -std::numeric_limits<double>::max() ? beta / 2.0 : (beta + lo) / 2.0;
    }
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < count; ++j) sum += p[j];
  if (sum <= 0.0) {
    for (std::size_t j = 0; j < count; ++j) p[j] = 1.0 / static_cast<double>(count);
    return;
  }
  for (std::size_t j = 0; j < count; ++j) p[j] /= sum;
}

Matrix normalize_input(const Matrix& x) {
  Matrix out = x.rowwise() - x.colwise().mean();
  const double max_abs = out.cwiseAbs().maxCoeff();
  if (max_abs > 0.0) out /= max_abs;
  return out;
}

double sq_dist(const Matrix& x, Eigen::Index i, Eigen::Index j) { return (x.row(i) - x.row(j)).squaredNorm(); }

// Momentum gradient descent with per-coordinate gains.
struct Optimizer {
  Matrix velocity;
  Matrix gains;

  explicit Optimizer(Eigen::Index n) : velocity(Matrix::Zero(n, 2)), gains(Matrix::Ones(n, 2)) {}

  void step(Matrix& y, const Matrix& grad, double momentum, double eta) {
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      for (Eigen::Index d = 0; d < 2; ++d) {
        const bool same_sign = (grad(i, d) > 0) == (velocity(i, d) > 0);
        gains(i, d) = same_sign ? gains(i, d) * 0.8 : gains(i, d) + 0.2;
        if (gains(i, d) < 0.01) gains(i, d) = 0.01;
        velocity(i, d) = momentum * velocity(i, d) - eta * gains(i, d) * grad(i, d);
        y(i, d) += velocity(i, d);
      }
    }
    const RowVector mean = y.colwise().mean();
    y.rowwise() -= mean;
  }
};

// ---- exact gradients ----

Matrix exact_affinities(const Matrix& x, double perplexity) {
  const Eigen::Index n = x.rows();
  Matrix p = Matrix::Zero(n, n);
  std::vector<double> dist(static_cast<std::size_t>(n - 1));
  std::vector<double> row(static_cast<std::size_t>(n - 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::size_t k = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) dist[k++] = sq_dist(x, i, j);
    }
    calibrate_row(dist.data(), dist.size(), perplexity, row.data());
    k = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) p(i, j) = row[k++];
    }
  }
  Matrix sym = (p + p.transpose()) / (2.0 * static_cast<double>(n));
  return sym.cwiseMax(1e-12 / static_cast<double>(n * n)).eval();
}

// One pass over pairs i < j accumulating attraction, repulsion and Z.
double exact_gradient(const Matrix& p, double p_log_p, const Matrix& y, double exaggeration, Matrix& grad,
                      bool want_kl) {
  const Eigen::Index n = y.rows();
  const Eigen::ArrayXd xs = y.col(0);
  const Eigen::ArrayXd ys = y.col(1);
  Eigen::ArrayXd ax = Eigen::ArrayXd::Zero(n);
  Eigen::ArrayXd ay = Eigen::ArrayXd::Zero(n);
  Eigen::ArrayXd rx = Eigen::ArrayXd::Zero(n);
  Eigen::ArrayXd ry = Eigen::ArrayXd::Zero(n);
  double z = 0.0;
  double p_log_w = 0.0;  // sum P log(1 + d^2)
  double p_sum = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const Eigen::Index m = n - i - 1;
    const Eigen::ArrayXd dx = xs(i) - xs.tail(m);
    const Eigen::ArrayXd dy = ys(i) - ys.tail(m);
    const Eigen::ArrayXd w = 1.0 + dx.square() + dy.square();
    const Eigen::ArrayXd q = w.inverse();
    const Eigen::ArrayXd pij = p.row(i).tail(m).transpose().array();
    const Eigen::ArrayXd pq = pij * q;
    const Eigen::ArrayXd qq = q.square();
    z += q.sum();
    ax(i) += (pq * dx).sum();
    ay(i) += (pq * dy).sum();
    rx(i) += (qq * dx).sum();
    ry(i) += (qq * dy).sum();
    ax.tail(m) -= pq * dx;
    ay.tail(m) -= pq * dy;
    rx.tail(m) -= qq * dx;
    ry.tail(m) -= qq * dy;
    if (want_kl) {
      p_log_w += (pij * w.log()).sum();
      p_sum += pij.sum();
    }
  }
  z *= 2.0;
  grad.resize(n, 2);
  grad.col(0) = (4.0 * (exaggeration * ax - rx / z)).matrix();
  grad.col(1) = (4.0 * (exaggeration * ay - ry / z)).matrix();
  if (!want_kl) return 0.0;
  // KL(P||Q) with Q = w^-1 / Z, summed over both orderings of each pair.
  return p_log_p + 2.0 * p_log_w + 2.0 * p_sum * std::log(z);
}

// ---- Barnes-Hut ----

struct SparseRows {
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> cols;
  std::vector<double> vals;
};

SparseRows sparse_affinities(const Matrix& x, double perplexity) {
  const std::size_t n = static_cast<std::size_t>(x.rows());
  const std::size_t k = std::min(n - 1, static_cast<std::size_t>(3.0 * perplexity));
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(n);
  std::vector<std::pair<double, std::size_t>> cand(n - 1);
  std::vector<double> dist(k);
  std::vector<double> prob(k);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) cand[c++] = {sq_dist(x, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), j};
    }
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
    for (std::size_t m = 0; m < k; ++m) dist[m] = cand[m].first;
    calibrate_row(dist.data(), k, perplexity, prob.data());
    for (std::size_t m = 0; m < k; ++m) rows[i].emplace_back(cand[m].second, prob[m]);
  }
  // Symmetrize: P = (P + P^T) / 2N.
  std::vector<std::vector<std::pair<std::size_t, double>>> sym(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [j, v] : rows[i]) {
      sym[i].emplace_back(j, v);
      sym[j].emplace_back(i, v);
    }
  }
  SparseRows out;
  out.offsets.push_back(0);
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = sym[i];
    std::sort(r.begin(), r.end());
    for (std::size_t m = 0; m < r.size();) {
      std::size_t j = r[m].first;
      double v = 0.0;
      while (m < r.size() && r[m].first == j) v += r[m++].second;
      out.cols.push_back(j);
      out.vals.push_back(v * scale);
    }
    out.offsets.push_back(out.cols.size());
  }
  return out;
}

class QuadTree {
 public:
  explicit QuadTree(const Matrix& y) : y_(y) {
    const RowVector lo = y.colwise().minCoeff();
    const RowVector hi = y.colwise().maxCoeff();
    const double half = std::max(hi(0) - lo(0), hi(1) - lo(1)) / 2.0 + 1e-5;
    nodes_.push_back(make_node((lo(0) + hi(0)) / 2.0, (lo(1) + hi(1)) / 2.0, half));
    for (Eigen::Index i = 0; i < y.rows(); ++i) insert(0, static_cast<int>(i), 0);
  }

  // Accumulates the repulsive force on point i; returns its share of Z.
  double repulsion(Eigen::Index i, double theta, double& fx, double& fy) const {
    double sum_q = 0.0;
    const double px = y_(i, 0);
    const double py = y_(i, 1);
    stack_.clear();
    stack_.push_back(0);
    while (!stack_.empty()) {
      const Node& node = nodes_[static_cast<std::size_t>(stack_.back())];
      stack_.pop_back();
      if (node.count == 0) continue;
      if (node.leaf) {
        for (int p : node.points) {
          if (p == i) continue;
          const double dx = px - y_(p, 0);
          const double dy = py - y_(p, 1);
          const double q = 1.0 / (1.0 + dx * dx + dy * dy);
          sum_q += q;
          fx += q * q * dx;
          fy += q * q * dy;
        }
        continue;
      }
      const double cx = node.sum_x / static_cast<double>(node.count);
      const double cy = node.sum_y / static_cast<double>(node.count);
      const double dx = px - cx;
      const double dy = py - cy;
      const double d2 = dx * dx + dy * dy;
      if (d2 > 0.0 && (2.0 * node.half) / std::sqrt(d2) < theta) {
        const double q = 1.0 / (1.0 + d2);
        const double mult = static_cast<double>(node.count) * q;
        sum_q += mult;
        fx += mult * q * dx;
        fy += mult * q * dy;
      } else {
        for (int c : node.child) {
          if (c >= 0) stack_.push_back(c);
        }
      }
    }
    return sum_q;
  }

 private:
  struct Node {
    double cx = 0.0;
    double cy = 0.0;
    double half = 0.0;
    double sum_x = 0.0;
    double sum_y = 0.0;
    std::size_t count = 0;
    bool leaf = true;
    int child[4] = {-1, -1, -1, -1};
    std::vector<int> points;
  };

  static Node make_node(double cx, double cy, double half) {
    Node n;
    n.cx = cx;
    n.cy = cy;
    n.half = half;
    return n;
  }

  int quadrant(const Node& n, int p) const {
    return (y_(p, 0) > n.cx ? 1 : 0) + (y_(p, 1) > n.cy ? 2 : 0);
  }

  void insert(int node_index, int p, int depth) {
    while (true) {
      Node& node = nodes_[static_cast<std::size_t>(node_index)];
      node.sum_x += y_(p, 0);
      node.sum_y += y_(p, 1);
      ++node.count;
      if (node.leaf) {
        const bool same_spot = !node.points.empty() && y_(node.points.front(), 0) == y_(p, 0) &&
                               y_(node.points.front(), 1) == y_(p, 1);
        if (node.points.empty() || same_spot || depth >= 48) {
          node.points.push_back(p);
          return;
        }
        subdivide(node_index, depth);
      }
      Node& parent = nodes_[static_cast<std::size_t>(node_index)];
      node_index = parent.child[quadrant(parent, p)];
      ++depth;
    }
  }

  void subdivide(int node_index, int depth) {
    std::vector<int> existing = std::move(nodes_[static_cast<std::size_t>(node_index)].points);
    nodes_[static_cast<std::size_t>(node_index)].points.clear();
    nodes_[static_cast<std::size_t>(node_index)].leaf = false;
    const Node parent = nodes_[static_cast<std::size_t>(node_index)];
    const double h = parent.half / 2.0;
    for (int q = 0; q < 4; ++q) {
      Node child = make_node(parent.cx + ((q & 1) ? h : -h), parent.cy + ((q & 2) ? h : -h), h);
      nodes_[static_cast<std::size_t>(node_index)].child[q] = static_cast<int>(nodes_.size());
      nodes_.push_back(std::move(child));
    }
    for (int p : existing) {
      const Node& n = nodes_[static_cast<std::size_t>(node_index)];
      const int c = n.child[quadrant(n, p)];
      Node& child = nodes_[static_cast<std::size_t>(c)];
      child.sum_x += y_(p, 0);
      child.sum_y += y_(p, 1);
      ++child.count;
      child.points.push_back(p);
    }
    (void)depth;
  }

  const Matrix& y_;
  std::vector<Node> nodes_;
  mutable std::vector<int> stack_;
};

double bh_gradient(const SparseRows& p, const Matrix& y, double exaggeration, double theta, Matrix& grad,
                   bool want_kl) {
  const Eigen::Index n = y.rows();
  QuadTree tree(y);
  Matrix neg(n, 2);
  double z = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double fx = 0.0;
    double fy = 0.0;
    z += tree.repulsion(i, theta, fx, fy);
    neg(i, 0) = fx;
    neg(i, 1) = fy;
  }
  grad.setZero(n, 2);
  double kl = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double px = 0.0;
    double py = 0.0;
    for (std::size_t m = p.offsets[static_cast<std::size_t>(i)]; m < p.offsets[static_cast<std::size_t>(i) + 1]; ++m) {
      const auto j = static_cast<Eigen::Index>(p.cols[m]);
      const double dx = y(i, 0) - y(j, 0);
      const double dy = y(i, 1) - y(j, 1);
      const double q = 1.0 / (1.0 + dx * dx + dy * dy);
      px += p.vals[m] * q * dx;
      py += p.vals[m] * q * dy;
      if (want_kl) kl += p.vals[m] * std::log((p.vals[m] + 1e-12) / (q / z + 1e-12));
    }
    grad(i, 0) = 4.0 * (exaggeration * px - neg(i, 0) / z);
    grad(i, 1) = 4.0 * (exaggeration * py - neg(i, 1) / z);
  }
  return kl;
}

}  // namespace

Matrix pca_reduce(const Matrix& points, std::size_t dims) {
  const Matrix centered = points.rowwise() - points.colwise().mean();
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / std::max<double>(1.0, static_cast<double>(points.rows() - 1));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  const Eigen::Index d = points.cols();
  const Eigen::Index keep = std::min<Eigen::Index>(static_cast<Eigen::Index>(dims), d);
  Eigen::MatrixXd axes(d, keep);
  for (Eigen::Index k = 0; k < keep; ++k) {
    Eigen::VectorXd v = solver.eigenvectors().col(d - 1 - k);  // eigenvalues ascend
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    axes.col(k) = v;
  }
  return centered * axes;
}

ProjectionResult tsne_project(const PointSet& set, const TsneParams& params,
                              const std::function<bool(double)>& progress) {
  const std::size_t n = set.size();
  if (!(params.perplexity > 0.0)) throw Error(Errc::InvalidArgument, "perplexity must be positive");
  if (static_cast<double>(n) < 3.0 * params.perplexity || n < 2) {
    throw Error(Errc::PerplexityTooLarge, "need at least 3 * perplexity points (have " + std::to_string(n) + ")");
  }
  Matrix x = prepare_points(set.points, params.metric);
  if (static_cast<std::size_t>(x.cols()) > params.pca_dims) x = pca_reduce(x, params.pca_dims);
  x = normalize_input(x);

  ProjectionResult out;
  out.sample_ids = set.ids;
  out.params = params;
  out.barnes_hut = n > params.exact_max_points;

  Rng rng(derive_seed(params.rng_seed, 41));
  Matrix y(static_cast<Eigen::Index>(n), 2);
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    y(i, 0) = 1e-4 * rng.normal();
    y(i, 1) = 1e-4 * rng.normal();
  }

  Matrix dense_p;
  double dense_p_log_p = 0.0;
  SparseRows sparse_p;
  if (out.barnes_hut) {
    sparse_p = sparse_affinities(x, params.perplexity);
  } else {
    dense_p = exact_affinities(x, params.perplexity);
    dense_p_log_p = (dense_p.array() * dense_p.array().log()).sum() - dense_p.diagonal().array().cwiseProduct(
                                                                            dense_p.diagonal().array().log()).sum();
  }

  const std::size_t tail = std::max<std::size_t>(1, (params.iterations + 9) / 10);
  const std::size_t tail_start = params.iterations > tail ? params.iterations - tail : 0;
  Optimizer opt(y.rows());
  Matrix grad;
  for (std::size_t iter = 0; iter < params.iterations; ++iter) {
    const double exaggeration = iter < params.exaggeration_iters ? params.exaggeration : 1.0;
    const double momentum = iter < 250 ? 0.5 : 0.8;
    const bool want_kl = iter >= tail_start;
    const double kl = out.barnes_hut ? bh_gradient(sparse_p, y, exaggeration, params.theta, grad, want_kl)
                                     : exact_gradient(dense_p, dense_p_log_p, y, exaggeration, grad, want_kl);
    if (want_kl) out.kl_tail.push_back(std::max(0.0, kl));
    opt.step(y, grad, momentum, params.learning_rate);
    if (progress && (iter + 1) % 25 == 0 &&
        !progress(static_cast<double>(iter + 1) / static_cast<double>(params.iterations))) {
      throw Error(Errc::Canceled, "t-SNE canceled");
    }
  }
  // KL of the final layout.
  const double final_kl = out.barnes_hut ? bh_gradient(sparse_p, y, 1.0, params.theta, grad, true)
                                         : exact_gradient(dense_p, dense_p_log_p, y, 1.0, grad, true);
  out.kl_divergence = std::max(0.0, final_kl);
  out.coordinates = y;
  return out;
}

json to_json(const ProjectionResult& r) {
  json rows = json::array();
  for (std::size_t i = 0; i < r.sample_ids.size(); ++i) {
    rows.push_back({{"sample_id", r.sample_ids[i]},
                    {"x", r.coordinates(static_cast<Eigen::Index>(i), 0)},
                    {"y", r.coordinates(static_cast<Eigen::Index>(i), 1)}});
  }
  return {{"params",
           {{"perplexity", r.params.perplexity},
            {"iterations", r.params.iterations},
            {"exaggeration", r.params.exaggeration},
            {"exaggeration_iters", r.params.exaggeration_iters},
            {"theta", r.params.theta},
            {"learning_rate", r.params.learning_rate},
            {"metric", std::string(to_string(r.params.metric))},
            {"rng_seed", r.params.rng_seed}}},
          {"kl_divergence", r.kl_divergence},
          {"kl_tail", r.kl_tail},
          {"barnes_hut", r.barnes_hut},
          {"rows", rows}};
}

ProjectionResult projection_from_json(const json& j) {
  ProjectionResult r;
  try {
    const auto& p = j.at("params");
    r.params.perplexity = p.at("perplexity").get<double>();
    r.params.iterations = p.at("iterations").get<std::size_t>();
    r.params.exaggeration = p.at("exaggeration").get<double>();
    r.params.exaggeration_iters = p.at("exaggeration_iters").get<std::size_t>();
    r.params.theta = p.at("theta").get<double>();
    r.params.rng_seed = p.at("rng_seed").get<std::uint64_t>();
    r.params.learning_rate = p.value("learning_rate", r.params.learning_rate);
    if (p.contains("metric")) r.params.metric = parse_metric(p["metric"].get<std::string>());
    r.kl_divergence = j.at("kl_divergence").get<double>();
    r.kl_tail = j.value("kl_tail", std::vector<double>{});
    r.barnes_hut = j.value("barnes_hut", false);
    const auto& rows = j.at("rows");
    r.coordinates.resize(static_cast<Eigen::Index>(rows.size()), 2);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      r.sample_ids.push_back(rows[i].at("sample_id").get<std::string>());
      r.coordinates(static_cast<Eigen::Index>(i), 0) = rows[i].at("x").get<double>();
      r.coordinates(static_cast<Eigen::Index>(i), 1) = rows[i].at("y").get<double>();
    }
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("projection: ") + e.what());
  }
  return r;
}

}  // namespace layoutspace::cluster
