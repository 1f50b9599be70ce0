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

// Plain-loop reference versions of graph search used by the discovery tests.

#include "layoutspace/core/types.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace layoutspace::reference {

double cosine(const Matrix& points, Eigen::Index a, Eigen::Index b);

/// Union-symmetrized cosine k-NN graph with edges below `min_similarity` dropped.
std::vector<std::map<std::uint32_t, double>> knn_graph(const Matrix& points, std::size_t k, double min_similarity);

/// Reached non-seed ids mapped to (max similarity to a seed, hop count).
std::map<std::string, std::pair<double, std::size_t>> expand(const Matrix& points, std::size_t k, double min_similarity,
                                                             const std::vector<std::string>& seeds,
                                                             const std::vector<std::string>& ids, double threshold,
                                                             std::size_t max_hops);

}  // namespace layoutspace::reference
