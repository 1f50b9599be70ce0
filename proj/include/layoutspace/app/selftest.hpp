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

#include <string>
#include <vector>

namespace layoutspace::app {

struct SelftestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Quick oracle comparisons: loss gradients against finite differences,
/// labelled metrics against the brute-force definitions, the two fixture
/// values, format round trips and generator determinism.
std::vector<SelftestCheck> run_selftest();

}  // namespace layoutspace::app
