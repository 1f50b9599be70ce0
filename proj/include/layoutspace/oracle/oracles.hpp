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

// Slow reference implementations written directly from the defining
// formulas with plain loops. Used by selftest and the test suites to check
// the optimized library code.

#include "layoutspace/core/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace layoutspace::oracle {

using Rows = std::vector<std::vector<double>>;

struct Metrics {
  double intra = 0.0;
  double inter = 0.0;
  double silhouette = 0.0;
  std::vector<double> per_sample;
  double dbi = 0.0;
};

double distance(const std::vector<double>& a, const std::vector<double>& b, DistanceMetric metric);

/// Double-loop silhouette, intra/inter class means and Davies-Bouldin.
Metrics brute_force_metrics(const Rows& points, const std::vector<int>& labels, DistanceMetric metric);

// Loss values. Embeddings and class weights are normalized inside, as in
// the library.

double arcface(const Rows& z, const std::vector<int>& labels, const Rows& weights, double scale, double margin);
double supcon(const Rows& z, const std::vector<int>& labels, double temperature);
double center(const Rows& z, const std::vector<int>& labels, const Rows& centers);

/// Central differences of f at x, one coordinate at a time.
std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, double step);

/// |a - n| / max(|a|, |n|, 1e-5), maximized over entries.
double max_relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric);

struct GradientCheck {
  std::size_t batches = 0;
  double worst[4] = {0, 0, 0, 0};  // arcface, supcon, center, composite
  double worst_value_gap = 0.0;     // library loss value vs oracle value
  double seconds = 0.0;
};

/// Random batches with N <= 8, D <= 16, C <= 5 comparing the library's
/// analytic gradients against central differences of the oracle losses.
GradientCheck check_loss_gradients(std::uint64_t seed, std::size_t batches, double step = 1e-5);

struct MetricCheck {
  std::size_t sets = 0;
  double worst = 0.0;  // max abs difference over all reported quantities
  double seconds = 0.0;
};

/// Random labelled sets with N <= max_n under both metrics.
MetricCheck check_labeled_metrics(std::uint64_t seed, std::size_t sets, std::size_t max_n = 200);

/// Two tight pairs at x = 0 and x = 10 (silhouette fixture) and two
/// vertical segments at x = 0 and x = 10 (Davies-Bouldin fixture).
Matrix two_pair_fixture();
Matrix two_blob_fixture();

}  // namespace layoutspace::oracle
