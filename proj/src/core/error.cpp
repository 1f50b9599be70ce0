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

#include "layoutspace/core/error.hpp"

namespace layoutspace {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::EmptySet: return "EmptySet";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::InvalidLabel: return "InvalidLabel";
    case Errc::DegenerateEmbedding: return "DegenerateEmbedding";
    case Errc::BatchTooSmall: return "BatchTooSmall";
    case Errc::UnknownClass: return "UnknownClass";
    case Errc::EmptySplit: return "EmptySplit";
    case Errc::TooFewClasses: return "TooFewClasses";
    case Errc::KTooLarge: return "KTooLarge";
    case Errc::PerplexityTooLarge: return "PerplexityTooLarge";
    case Errc::UnknownCluster: return "UnknownCluster";
    case Errc::InvalidPercentile: return "InvalidPercentile";
    case Errc::UnknownSeed: return "UnknownSeed";
    case Errc::NoKnownLayouts: return "NoKnownLayouts";
    case Errc::InfeasibleSpec: return "InfeasibleSpec";
    case Errc::ParseError: return "ParseError";
    case Errc::MissingHeader: return "MissingHeader";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::UnknownDataset: return "UnknownDataset";
    case Errc::UnknownItem: return "UnknownItem";
    case Errc::UnknownJob: return "UnknownJob";
    case Errc::UnknownModel: return "UnknownModel";
    case Errc::UnknownProjection: return "UnknownProjection";
    case Errc::AlreadyReviewed: return "AlreadyReviewed";
    case Errc::StaleModel: return "StaleModel";
    case Errc::StaleSnapshot: return "StaleSnapshot";
    case Errc::SnapshotMismatch: return "SnapshotMismatch";
    case Errc::Conflict: return "Conflict";
    case Errc::Unauthorized: return "Unauthorized";
    case Errc::ConfigError: return "ConfigError";
    case Errc::NonFiniteLoss: return "NonFiniteLoss";
    case Errc::DegenerateCentroids: return "DegenerateCentroids";
    case Errc::Canceled: return "Canceled";
    case Errc::IoError: return "IoError";
    case Errc::BindError: return "BindError";
  }
  return "Unknown";
}

ErrorCategory errc_category(Errc code) {
  switch (code) {
    case Errc::NonFiniteLoss:
    case Errc::DegenerateCentroids:
    case Errc::Canceled:
      return ErrorCategory::Computation;
    case Errc::IoError:
    case Errc::BindError:
      return ErrorCategory::Io;
    default:
      return ErrorCategory::Validation;
  }
}

}  // namespace layoutspace
