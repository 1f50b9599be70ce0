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

#include "layoutspace/app/selftest.hpp"

#include "layoutspace/cluster/metrics.hpp"
#include "layoutspace/core/rng.hpp"
#include "layoutspace/oracle/oracles.hpp"
#include "layoutspace/store/formats.hpp"
#include "layoutspace/store/synth.hpp"

#include <bit>
#include <cmath>
#include <cstdio>

namespace layoutspace::app {

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

bool same_records(const std::vector<EmbeddingRecord>& a, const std::vector<EmbeddingRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].sample_id != b[i].sample_id || a[i].layout_label != b[i].layout_label || a[i].split != b[i].split ||
        a[i].metadata != b[i].metadata || a[i].vector.size() != b[i].vector.size()) {
      return false;
    }
    for (std::size_t d = 0; d < a[i].vector.size(); ++d) {
      if (std::bit_cast<std::uint32_t>(a[i].vector[d]) != std::bit_cast<std::uint32_t>(b[i].vector[d])) return false;
    }
  }
  return true;
}

}  // namespace

std::vector<SelftestCheck> run_selftest() {
  std::vector<SelftestCheck> out;

  const auto g = oracle::check_loss_gradients(20240501, 100);
  const char* names[] = {"arcface", "supcon", "center", "composite"};
  for (int i = 0; i < 4; ++i) {
    out.push_back({std::string("gradient.") + names[i], g.worst[i] <= 1e-4,
                   fmt("max relative error %.3g over 100 batches", g.worst[i])});
  }
  out.push_back({"loss.values", g.worst_value_gap <= 1e-9, fmt("max |library - oracle| %.3g", g.worst_value_gap)});

  const auto m = oracle::check_labeled_metrics(7, 50);
  out.push_back({"metrics.brute_force", m.worst <= 1e-9, fmt("max difference %.3g over 50 sets", m.worst)});

  const std::vector<int> two = {0, 0, 1, 1};
  const double sil = cluster::labeled_metrics(oracle::two_pair_fixture(), two, DistanceMetric::Euclidean).silhouette_mean;
  out.push_back({"fixture.silhouette", std::abs(sil - 0.900) <= 1e-3, fmt("%.6f (expected 0.900)", sil)});
  const double dbi = cluster::labeled_metrics(oracle::two_blob_fixture(), two, DistanceMetric::Euclidean).dbi;
  out.push_back({"fixture.dbi", std::abs(dbi - 0.2) <= 1e-9, fmt("%.12f (expected 0.2)", dbi)});

  Rng rng(99);
  bool trips = true;
  for (int t = 0; t < 10 && trips; ++t) {
    const std::size_t dim = 1 + rng.index(8);
    std::vector<EmbeddingRecord> records;
    const std::size_t n = 1 + rng.index(20);
    for (std::size_t i = 0; i < n; ++i) {
      EmbeddingRecord r;
      r.sample_id = "r" + std::to_string(t) + "-" + std::to_string(i);
      for (std::size_t d = 0; d < dim; ++d) r.vector.push_back(static_cast<float>(rng.normal() * std::exp(4 * rng.normal())));
      if (i % 2) r.layout_label = "layout-" + std::to_string(i % 3);
      records.push_back(std::move(r));
    }
    records = store::sorted_by_id(std::move(records));
    const auto jsonl = store::decode_jsonl(store::encode_jsonl(records, dim));
    auto packed = store::decode_packed(store::encode_packed(records, dim));
    store::apply_sidecar(packed, store::encode_sidecar(records));
    trips = same_records(records, jsonl.records) && same_records(records, packed.records);
  }
  out.push_back({"formats.round_trip", trips, "jsonl and packed on 10 random datasets"});

  store::SyntheticSpec spec;
  spec.n_layouts = 3;
  spec.samples_min = spec.samples_max = 20;
  spec.dim = 16;
  spec.fraud_families = {store::FamilySpec{10, 1.0, 0.01}};
  spec.outlier_count = 2;
  spec.rng_seed = 5;
  const auto a = store::synthesize(spec);
  const auto b = store::synthesize(spec);
  out.push_back({"synth.determinism",
                 store::encode_jsonl(a.records, a.dim) == store::encode_jsonl(b.records, b.dim) &&
                     store::ground_truth_jsonl(a) == store::ground_truth_jsonl(b),
                 "two runs with seed 5"});
  return out;
}

}  // namespace layoutspace::app
