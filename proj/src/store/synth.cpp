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

#include "layoutspace/store/synth.hpp"

#include "layoutspace/core/error.hpp"
#include "layoutspace/core/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace layoutspace::store {

using nlohmann::json;

namespace {

std::size_t digits(std::size_t n) {
  std::size_t d = 1;
  while (n >= 10) {
    n /= 10;
    ++d;
  }
  return d;
}

std::string padded(std::size_t value, std::size_t width) {
  std::string s = std::to_string(value);
  return std::string(width > s.size() ? width - s.size() : 0, '0') + s;
}

// Modified Gram-Schmidt on Gaussian draws, run twice for stability.
std::vector<RowVector> orthonormal_directions(std::size_t count, std::size_t dim, Rng& rng) {
  std::vector<RowVector> out;
  while (out.size() < count) {
    RowVector v(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& u : out) v -= v.dot(u) * u;
    }
    const double n = v.norm();
    if (n < 1e-8) continue;
    out.push_back(v / n);
  }
  return out;
}

RowVector gaussian(std::size_t dim, Rng& rng) {
  RowVector g(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = rng.normal();
  return g;
}

std::vector<float> to_unit_float(const RowVector& v) {
  const RowVector u = v / v.norm();
  std::vector<float> out(static_cast<std::size_t>(u.size()));
  for (Eigen::Index i = 0; i < u.size(); ++i) out[static_cast<std::size_t>(i)] = static_cast<float>(u(i));
  return out;
}

}  // namespace

std::string layout_name(std::size_t index, std::size_t n_layouts) {
  return "layout-" + padded(index, std::max<std::size_t>(2, digits(n_layouts - 1)));
}

void SyntheticSpec::validate() const {
  auto fail = [](const std::string& m) { throw Error(Errc::InvalidArgument, "synthetic spec: " + m); };
  if (n_layouts < 1) fail("n_layouts must be positive");
  if (samples_min < 1 || samples_max < samples_min) fail("samples_per_layout must be a range [min, max] with min >= 1");
  if (dim < 2) fail("dim must be at least 2");
  if (!(intra_class_spread > 0.0)) fail("intra_class_spread must be positive");
  if (!(inter_class_separation > 0.0)) fail("inter_class_separation must be positive");
  for (const auto& f : fraud_families) {
    if (f.size < 1) fail("family size must be positive");
    if (!(f.offset_scale > 0.0)) fail("family offset_scale must be positive");
    if (!(f.template_jitter > 0.0)) fail("family template_jitter must be positive");
  }
  if (!(outlier_magnitude > 0.0)) fail("outlier magnitude must be positive");
  if (!(val_fraction >= 0.0 && test_fraction >= 0.0 && val_fraction + test_fraction < 1.0)) {
    fail("split fractions must be non-negative and sum below 1");
  }
  if (n_layouts + fraud_families.size() + 1 > dim) {
    throw Error(Errc::InfeasibleSpec, "dimension " + std::to_string(dim) + " cannot hold " +
                                          std::to_string(n_layouts + fraud_families.size() + 1) +
                                          " orthogonal layout and family directions");
  }
}

SyntheticSpec synthetic_spec_from_json(const json& j, std::optional<std::uint64_t> seed_override) {
  SyntheticSpec s;
  if (!j.is_object()) throw Error(Errc::ParseError, "synthetic spec must be a JSON object");
  static const std::set<std::string> known = {"n_layouts", "samples_per_layout", "dim", "intra_class_spread",
                                              "inter_class_separation", "fraud_families", "outliers", "splits",
                                              "rng_seed"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw Error(Errc::InvalidArgument, "synthetic spec: unknown field '" + key + "'");
  }
  try {
    s.n_layouts = j.value("n_layouts", s.n_layouts);
    if (j.contains("samples_per_layout")) {
      const auto& r = j.at("samples_per_layout");
      if (r.is_array()) {
        s.samples_min = r.at(0).get<std::size_t>();
        s.samples_max = r.at(1).get<std::size_t>();
      } else {
        s.samples_min = s.samples_max = r.get<std::size_t>();
      }
    }
    s.dim = j.value("dim", s.dim);
    s.intra_class_spread = j.value("intra_class_spread", s.intra_class_spread);
    s.inter_class_separation = j.value("inter_class_separation", s.inter_class_separation);
    for (const auto& f : j.value("fraud_families", json::array())) {
      FamilySpec fam;
      fam.size = f.value("size", fam.size);
      fam.offset_scale = f.value("offset_scale", fam.offset_scale);
      fam.template_jitter = f.value("template_jitter", fam.template_jitter);
      s.fraud_families.push_back(fam);
    }
    if (j.contains("outliers")) {
      s.outlier_count = j["outliers"].value("count", s.outlier_count);
      s.outlier_magnitude = j["outliers"].value("magnitude", s.outlier_magnitude);
    }
    if (j.contains("splits")) {
      s.val_fraction = j["splits"].value("val", 0.0);
      s.test_fraction = j["splits"].value("test", 0.0);
    }
    if (seed_override) {
      s.rng_seed = *seed_override;
    } else if (j.contains("rng_seed")) {
      s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    } else {
      throw Error(Errc::InvalidArgument, "synthetic spec: rng_seed is mandatory");
    }
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("synthetic spec: ") + e.what());
  }
  s.validate();
  return s;
}

json to_json(const SyntheticSpec& s) {
  json fams = json::array();
  for (const auto& f : s.fraud_families) {
    fams.push_back({{"size", f.size}, {"offset_scale", f.offset_scale}, {"template_jitter", f.template_jitter}});
  }
  return {{"n_layouts", s.n_layouts},
          {"samples_per_layout", {s.samples_min, s.samples_max}},
          {"dim", s.dim},
          {"intra_class_spread", s.intra_class_spread},
          {"inter_class_separation", s.inter_class_separation},
          {"fraud_families", fams},
          {"outliers", {{"count", s.outlier_count}, {"magnitude", s.outlier_magnitude}}},
          {"splits", {{"val", s.val_fraction}, {"test", s.test_fraction}}},
          {"rng_seed", s.rng_seed}};
}

SyntheticDataset synthesize(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t dim = spec.dim;
  const std::size_t n_fam = spec.fraud_families.size();
  Rng geo(derive_seed(spec.rng_seed, 11));
  const auto dirs = orthonormal_directions(spec.n_layouts + n_fam + 1, dim, geo);
  const RowVector& common = dirs[0];

  std::vector<RowVector> layout_means;
  for (std::size_t l = 0; l < spec.n_layouts; ++l) {
    const RowVector m = common + spec.inter_class_separation * dirs[1 + l];
    layout_means.push_back(m / m.norm());
  }

  struct Pending {
    EmbeddingRecord record;
    GroundTruth truth;
  };
  std::vector<Pending> rows;
  Rng sizes(derive_seed(spec.rng_seed, 12));
  Rng noise(derive_seed(spec.rng_seed, 13));
  Rng splits(derive_seed(spec.rng_seed, 14));
  for (std::size_t l = 0; l < spec.n_layouts; ++l) {
    const std::size_t n = spec.samples_min + sizes.index(spec.samples_max - spec.samples_min + 1);
    const std::string name = layout_name(l, spec.n_layouts);
    std::vector<std::optional<SplitTag>> tags(n);
    if (spec.val_fraction > 0.0 || spec.test_fraction > 0.0) {
      const auto n_val = static_cast<std::size_t>(std::llround(spec.val_fraction * static_cast<double>(n)));
      const auto n_test = static_cast<std::size_t>(std::llround(spec.test_fraction * static_cast<double>(n)));
      for (std::size_t i = 0; i < n; ++i) {
        tags[i] = i < n_val ? SplitTag::Val : (i < n_val + n_test ? SplitTag::Test : SplitTag::Train);
      }
      splits.shuffle(tags);
    }
    for (std::size_t i = 0; i < n; ++i) {
      Pending p;
      p.record.vector = to_unit_float(layout_means[l] + spec.intra_class_spread * gaussian(dim, noise));
      p.record.layout_label = name;
      p.record.split = tags[i];
      p.truth.layout = name;
      rows.push_back(std::move(p));
    }
  }

  Rng fam_rng(derive_seed(spec.rng_seed, 15));
  for (std::size_t f = 0; f < n_fam; ++f) {
    const FamilySpec& fam = spec.fraud_families[f];
    RowVector center = common + fam.offset_scale * dirs[1 + spec.n_layouts + f];
    center /= center.norm();
    for (std::size_t i = 0; i < fam.size; ++i) {
      Pending p;
      p.record.vector = to_unit_float(center + fam.template_jitter * gaussian(dim, fam_rng));
      p.record.metadata["claimed_layout"] = layout_name(fam_rng.index(spec.n_layouts), spec.n_layouts);
      p.truth.family = f;
      rows.push_back(std::move(p));
    }
  }

  // Outliers sit at cosine distance mu + magnitude * sigma from their layout
  // mean, with mu and sigma estimated from inlier draws.
  Rng out_rng(derive_seed(spec.rng_seed, 16));
  Rng calib(derive_seed(spec.rng_seed, 18));
  double mu = 0.0, m2 = 0.0;
  constexpr int kDraws = 4096;
  for (int j = 0; j < kDraws; ++j) {
    const RowVector v = layout_means[0] + spec.intra_class_spread * gaussian(dim, calib);
    const double d = 1.0 - layout_means[0].dot(v) / v.norm();
    const double delta = d - mu;
    mu += delta / (j + 1);
    m2 += delta * (d - mu);
  }
  const double sigma = std::sqrt(m2 / (kDraws - 1));
  const double angle = std::acos(std::clamp(1.0 - (mu + spec.outlier_magnitude * sigma), -1.0, 1.0));
  for (std::size_t o = 0; o < spec.outlier_count; ++o) {
    const std::size_t l = out_rng.index(spec.n_layouts);
    RowVector dir = gaussian(dim, out_rng);
    dir -= dir.dot(layout_means[l]) * layout_means[l];
    dir /= dir.norm();
    Pending p;
    p.record.vector = to_unit_float(std::cos(angle) * layout_means[l] + std::sin(angle) * dir);
    p.record.layout_label = layout_name(l, spec.n_layouts);
    p.truth.layout = p.record.layout_label;
    p.truth.outlier = true;
    rows.push_back(std::move(p));
  }

  std::vector<std::size_t> numbers(rows.size());
  for (std::size_t i = 0; i < numbers.size(); ++i) numbers[i] = i;
  Rng ids(derive_seed(spec.rng_seed, 17));
  ids.shuffle(numbers);
  const std::size_t width = digits(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].record.sample_id = "s" + padded(numbers[i], width);
    rows[i].truth.sample_id = rows[i].record.sample_id;
  }
  std::sort(rows.begin(), rows.end(),
            [](const Pending& a, const Pending& b) { return a.record.sample_id < b.record.sample_id; });

  SyntheticDataset out;
  out.dim = dim;
  for (auto& p : rows) {
    out.records.push_back(std::move(p.record));
    out.ground_truth.push_back(std::move(p.truth));
  }
  return out;
}

std::string ground_truth_jsonl(const SyntheticDataset& data) {
  std::string out;
  for (const auto& g : data.ground_truth) {
    const json j = {{"sample_id", g.sample_id},
                    {"layout", g.layout ? json(*g.layout) : json(nullptr)},
                    {"family", g.family ? json(*g.family) : json(nullptr)},
                    {"outlier", g.outlier}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<GroundTruth> parse_ground_truth(const std::string& text) {
  std::vector<GroundTruth> out;
  std::size_t pos = 0;
  std::size_t row = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++row;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      GroundTruth g;
      g.sample_id = j.at("sample_id").get<std::string>();
      if (!j.at("layout").is_null()) g.layout = j["layout"].get<std::string>();
      if (!j.at("family").is_null()) g.family = j["family"].get<std::size_t>();
      g.outlier = j.at("outlier").get<bool>();
      out.push_back(std::move(g));
    } catch (const json::exception& e) {
      throw Error(Errc::ParseError, "ground truth row " + std::to_string(row) + ": " + e.what(), row);
    }
  }
  return out;
}

}  // namespace layoutspace::store
