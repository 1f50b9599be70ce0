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

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace layoutspace::store {

struct FamilySpec {
  std::size_t size = 50;
  /// Displacement of the family template off the layout manifold.
  double offset_scale = 1.0;
  /// Per-member isotropic noise around the template.
  double template_jitter = 0.01;
};

struct SyntheticSpec {
  std::size_t n_layouts = 19;
  std::size_t samples_min = 100;
  std::size_t samples_max = 100;
  std::size_t dim = 128;
  double intra_class_spread = 0.02;
  double inter_class_separation = 0.5;
  std::vector<FamilySpec> fraud_families;
  std::size_t outlier_count = 0;
  /// Outliers sit this many standard deviations of the within-layout cosine
  /// distance beyond its mean.
  double outlier_magnitude = 5.0;
  double val_fraction = 0.0;
  double test_fraction = 0.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Parses the JSON spec format; `seed_override` replaces (or supplies) the
/// mandatory rng_seed.
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j, std::optional<std::uint64_t> seed_override = {});
nlohmann::json to_json(const SyntheticSpec& spec);

struct GroundTruth {
  std::string sample_id;
  std::optional<std::string> layout;
  std::optional<std::size_t> family;
  bool outlier = false;
};

struct SyntheticDataset {
  std::size_t dim = 0;
  std::vector<EmbeddingRecord> records;    // sorted by sample id
  std::vector<GroundTruth> ground_truth;   // same order
};

/// Layouts are unit-norm Gaussian blobs around normalize(u + s r_j) for
/// orthonormal u, r_j; families around normalize(u + o r_f) on further
/// orthonormal directions. Family members carry no layout label (their
/// claimed layout is in metadata). Throws InfeasibleSpec when D is too small
/// for the required orthogonal directions.
SyntheticDataset synthesize(const SyntheticSpec& spec);

std::string ground_truth_jsonl(const SyntheticDataset& data);
std::vector<GroundTruth> parse_ground_truth(const std::string& text);

/// Layout labels used by the generator: "layout-00", "layout-01", ...
std::string layout_name(std::size_t index, std::size_t n_layouts);

}  // namespace layoutspace::store
