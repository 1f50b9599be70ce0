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

#include "reference.hpp"

#include <algorithm>
#include <cmath>

namespace layoutspace::reference {

double cosine(const Matrix& points, Eigen::Index a, Eigen::Index b) {
  double dot = 0, na = 0, nb = 0;
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    dot += points(a, j) * points(b, j);
    na += points(a, j) * points(a, j);
    nb += points(b, j) * points(b, j);
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<std::map<std::uint32_t, double>> knn_graph(const Matrix& points, std::size_t k, double min_similarity) {
  const auto n = static_cast<std::size_t>(points.rows());
  k = std::min(k, n - 1);
  std::vector<std::map<std::uint32_t, double>> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::uint32_t>> row;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) row.push_back({-cosine(points, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                                 static_cast<std::uint32_t>(j)});
    }
    std::sort(row.begin(), row.end());
    for (std::size_t m = 0; m < k; ++m) {
      const double s = -row[m].first;
      if (s < min_similarity) continue;
      g[i][row[m].second] = s;
      g[row[m].second][static_cast<std::uint32_t>(i)] = s;
    }
  }
  return g;
}

std::map<std::string, std::pair<double, std::size_t>> expand(const Matrix& points, std::size_t k, double min_similarity,
                                                             const std::vector<std::string>& seeds,
                                                             const std::vector<std::string>& ids, double threshold,
                                                             std::size_t max_hops) {
  const auto g = knn_graph(points, k, min_similarity);
  const std::size_t n = ids.size();
  std::vector<std::size_t> seed_rows;
  for (const auto& s : seeds) seed_rows.push_back(static_cast<std::size_t>(std::find(ids.begin(), ids.end(), s) - ids.begin()));
  // Bellman-Ford style relaxation of hop counts.
  const std::size_t inf = n + 1;
  std::vector<std::size_t> hop(n, inf);
  for (auto s : seed_rows) hop[s] = 0;
  for (std::size_t round = 0; round < n; ++round) {
    for (std::size_t u = 0; u < n; ++u) {
      if (hop[u] == inf) continue;
      for (const auto& [v, w] : g[u]) {
        if (w >= threshold && hop[u] + 1 < hop[v]) hop[v] = hop[u] + 1;
      }
    }
  }
  std::map<std::string, std::pair<double, std::size_t>> out;
  for (std::size_t v = 0; v < n; ++v) {
    if (hop[v] == 0 || hop[v] > max_hops) continue;
    double best = -2;
    for (auto s : seed_rows) best = std::max(best, cosine(points, static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(s)));
    out[ids[v]] = {best, hop[v]};
  }
  return out;
}

}  // namespace layoutspace::reference
