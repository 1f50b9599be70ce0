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

#include "layoutspace/cluster/tsne.hpp"
#include "layoutspace/core/config.hpp"
#include "layoutspace/discovery/discovery.hpp"
#include "layoutspace/learn/trainer.hpp"

#include <optional>
#include <string>

namespace layoutspace::app {

/// Tunables shared by the CLI and the service. The built-in values equal
/// config/defaults.conf.
struct Defaults {
  discovery::GraphParams graph;
  discovery::ExpansionParams expand;
  discovery::DetectParams detect;
  discovery::QueueWeights queue;

  DistanceMetric metric = DistanceMetric::Cosine;
  std::size_t kmeans_max_iter = 300;
  double kmeans_tol = 1e-6;
  std::size_t kmeans_n_init = 10;
  std::size_t select_k_sample = 2000;

  cluster::TsneParams tsne;
  learn::TrainerConfig train;

  std::string host = "127.0.0.1";
  int port = 8080;
  std::string token;

  /// Values missing from `config` keep their built-in defaults.
  static Defaults from_config(const Config& config);
};

/// Built-in defaults overlaid with `path` when given, else with
/// $LAYOUTSPACE_CONFIG when set.
Config load_config(const std::optional<std::string>& path);

/// Data directory: explicit value, else $LAYOUTSPACE_DATA_DIR, else ./layoutspace-data.
std::string resolve_data_dir(const std::optional<std::string>& explicit_dir);

}  // namespace layoutspace::app
