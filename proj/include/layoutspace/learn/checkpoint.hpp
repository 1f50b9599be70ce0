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
#include "layoutspace/learn/classifier.hpp"
#include "layoutspace/learn/trainer.hpp"

#include <json.hpp>

#include <map>
#include <string>

namespace layoutspace::learn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Named float64 tensors plus a free-form config block.
///
/// On disk: "LSCK", u32 version, u64 header length, JSON header
/// {config, tensors: [{name, dtype, shape, offset}]}, then the raw
/// little-endian payload. Offsets are relative to the payload start.
struct TensorArchive {
  nlohmann::json config = nlohmann::json::object();
  std::map<std::string, Matrix> tensors;
};

std::string encode_checkpoint(const TensorArchive& archive);
TensorArchive decode_checkpoint(const std::string& bytes);
void write_checkpoint(const std::string& path, const TensorArchive& archive);
TensorArchive read_checkpoint(const std::string& path);

nlohmann::json to_json(const TrainerConfig& config);
TrainerConfig trainer_config_from_json(const nlohmann::json& j);

TensorArchive to_archive(const MetricModel& model, const TrainerConfig& config);
MetricModel metric_model_from_archive(const TensorArchive& archive);

TensorArchive to_archive(const LayoutClassifier& clf, const ClassifierConfig& config);
LayoutClassifier classifier_from_archive(const TensorArchive& archive);

}  // namespace layoutspace::learn
