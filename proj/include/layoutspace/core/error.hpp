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

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace layoutspace {

/// Machine-readable failure codes shared by every module, the CLI and the
/// HTTP error envelope.
enum class Errc {
  // input validation
  InvalidArgument,
  ZeroVector,
  DimensionMismatch,
  EmptySet,
  ShapeMismatch,
  InvalidLabel,
  DegenerateEmbedding,
  BatchTooSmall,
  UnknownClass,
  EmptySplit,
  TooFewClasses,
  KTooLarge,
  PerplexityTooLarge,
  UnknownCluster,
  InvalidPercentile,
  UnknownSeed,
  NoKnownLayouts,
  InfeasibleSpec,
  ParseError,
  MissingHeader,
  DuplicateId,
  UnknownDataset,
  UnknownItem,
  UnknownJob,
  UnknownModel,
  UnknownProjection,
  AlreadyReviewed,
  StaleModel,
  StaleSnapshot,
  SnapshotMismatch,
  Conflict,
  Unauthorized,
  ConfigError,
  // computation
  NonFiniteLoss,
  DegenerateCentroids,
  Canceled,
  // environment
  IoError,
  BindError,
};

enum class ErrorCategory { Validation, Computation, Io };

std::string_view errc_name(Errc code);
ErrorCategory errc_category(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, std::optional<std::size_t> row = std::nullopt)
      : std::runtime_error(message), code_(code), row_(row) {}

  Errc code() const noexcept { return code_; }
  /// 1-based row of the offending input line for file imports.
  std::optional<std::size_t> row() const noexcept { return row_; }

 private:
  Errc code_;
  std::optional<std::size_t> row_;
};

}  // namespace layoutspace
