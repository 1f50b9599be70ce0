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

#include "layoutspace/core/types.hpp"

#include "layoutspace/core/error.hpp"

namespace layoutspace {

std::string_view to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::Train: return "train";
    case SplitTag::Val: return "val";
    case SplitTag::Test: return "test";
  }
  return "train";
}

SplitTag parse_split_tag(std::string_view text) {
  if (text == "train") return SplitTag::Train;
  if (text == "val") return SplitTag::Val;
  if (text == "test") return SplitTag::Test;
  throw Error(Errc::InvalidArgument, "unknown split tag '" + std::string(text) + "'");
}

std::string_view to_string(DistanceMetric metric) {
  return metric == DistanceMetric::Cosine ? "cosine" : "euclidean";
}

DistanceMetric parse_metric(std::string_view text) {
  if (text == "cosine" || text == "cosine_distance") return DistanceMetric::Cosine;
  if (text == "euclidean") return DistanceMetric::Euclidean;
  throw Error(Errc::InvalidArgument, "unknown distance metric '" + std::string(text) + "'");
}

}  // namespace layoutspace
