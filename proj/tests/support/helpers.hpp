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

#include "layoutspace/core/error.hpp"
#include "layoutspace/core/point_set.hpp"
#include "layoutspace/core/rng.hpp"
#include "layoutspace/core/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace layoutspace::testing {

/// Records with ids "p000", "p001", ... from the rows of `points`.
std::vector<EmbeddingRecord> records_from(const Matrix& points, const std::vector<std::string>& labels = {});

/// Gaussian blobs around `centers` with `per_blob` points each; labels hold the blob index.
Matrix gaussian_blobs(const Matrix& centers, std::size_t per_blob, double sigma, Rng& rng, std::vector<int>* labels);

/// Same ids as records_from, full double precision.
PointSet point_set(const Matrix& points, std::uint64_t snapshot_version = 1);

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& child = "") const { return (child.empty() ? path_ : path_ / child).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace layoutspace::testing

/// Checks that `expr` throws layoutspace::Error with the given code.
#define CHECK_ERRC(expr, errc)                                        \
  do {                                                                \
    bool thrown_ = false;                                             \
    try {                                                             \
      (void)(expr);                                                   \
    } catch (const ::layoutspace::Error& e_) {                        \
      thrown_ = true;                                                 \
      CHECK_MESSAGE(e_.code() == (errc), "got ", e_.what());          \
    }                                                                 \
    CHECK_MESSAGE(thrown_, #expr " did not throw");                   \
  } while (0)
