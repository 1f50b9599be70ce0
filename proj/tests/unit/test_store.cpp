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

#include <doctest.h>

#include "layoutspace/core/binary_io.hpp"
#include "layoutspace/core/error.hpp"
#include "layoutspace/store/dataset.hpp"
#include "layoutspace/store/formats.hpp"
#include "layoutspace/store/synth.hpp"

#include "helpers.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <set>

using namespace layoutspace;
using namespace layoutspace::store;

namespace {

float random_finite_float(Rng& rng) {
  for (;;) {
    const auto bits = static_cast<std::uint32_t>(rng.next_u64());
    const float f = std::bit_cast<float>(bits);
    if (std::isfinite(f)) return f;
  }
}

std::vector<EmbeddingRecord> random_records(Rng& rng, std::size_t n, std::size_t dim) {
  std::vector<EmbeddingRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    EmbeddingRecord r;
    r.sample_id = "id-" + std::to_string(rng.next_u64() % 100000) + "-" + std::to_string(i);
    if (i % 7 == 0) r.sample_id += " \xc3\xa9\"\\";
    for (std::size_t d = 0; d < dim; ++d) r.vector.push_back(random_finite_float(rng));
    if (rng.uniform() < 0.6) r.layout_label = "L" + std::to_string(rng.index(5));
    if (rng.uniform() < 0.5) r.split = static_cast<SplitTag>(rng.index(3));
    if (rng.uniform() < 0.3) r.metadata["source"] = "s" + std::to_string(rng.index(9));
    out.push_back(std::move(r));
  }
  return sorted_by_id(std::move(out));
}

bool bit_identical(const std::vector<EmbeddingRecord>& a, const std::vector<EmbeddingRecord>& b) {
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

std::string header(std::size_t dim) {
  return R"({"format":"layoutspace-jsonl","version":1,"dim":)" + std::to_string(dim) + "}\n";
}

template <class F>
std::optional<std::size_t> error_row(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.row();
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("jsonl and packed round trips are bit exact") {
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    const std::size_t dim = 1 + rng.index(12);
    const auto records = random_records(rng, 1 + rng.index(30), dim);
    const auto j = decode_jsonl(encode_jsonl(records, dim));
    CHECK(j.dim == dim);
    CHECK(bit_identical(records, j.records));
    auto p = decode_packed(encode_packed(records, dim));
    apply_sidecar(p, encode_sidecar(records));
    CHECK(bit_identical(records, p.records));
  }
}

TEST_CASE("special float values survive") {
  std::vector<EmbeddingRecord> recs(1);
  recs[0].sample_id = "x";
  recs[0].vector = {-0.0f, std::numeric_limits<float>::denorm_min(), std::numeric_limits<float>::max(),
                    -std::numeric_limits<float>::lowest(), 0.1f};
  CHECK(bit_identical(recs, decode_jsonl(encode_jsonl(recs, 5)).records));
  CHECK(bit_identical(recs, decode_packed(encode_packed(recs, 5)).records));
}

TEST_CASE("jsonl validation") {
  CHECK_ERRC(decode_jsonl(R"({"id":"a","vec":[1]})"), Errc::MissingHeader);
  CHECK_ERRC(decode_jsonl(""), Errc::MissingHeader);
  CHECK_ERRC(decode_jsonl(header(2) + R"({"id":"a","vec":[1,NaN]})"), Errc::ParseError);
  CHECK(error_row([&] { decode_jsonl(header(2) + R"({"id":"a","vec":[1,2]})" "\n" R"({"id":"b","vec":[1,NaN]})"); }) == 3);
  CHECK_ERRC(decode_jsonl(header(2) + R"({"id":"a","vec":[1,2,3]})"), Errc::DimensionMismatch);
  CHECK_ERRC(decode_jsonl(header(1) + R"({"id":"a","vec":[1]})" "\n" R"({"id":"a","vec":[2]})"), Errc::DuplicateId);
  CHECK_ERRC(decode_jsonl(header(1) + R"({"id":"a","vec":[1e60]})"), Errc::ParseError);
  CHECK_ERRC(decode_jsonl(header(1) + R"({"id":"a","vec":["1"]})"), Errc::ParseError);
  CHECK_ERRC(decode_jsonl(header(1) + R"({"id":"a","vec":[1],"split":"dev"})"), Errc::ParseError);
  CHECK_ERRC(decode_jsonl(header(1) + R"({"id":"","vec":[1]})"), Errc::ParseError);
  const auto ok = decode_jsonl(header(2) + "\n" + R"({"id":"a","vec":[1,2],"label":"L","split":"val","meta":{"k":"v"}})");
  REQUIRE(ok.records.size() == 1);
  CHECK(ok.records[0].layout_label == "L");
  CHECK(ok.records[0].split == SplitTag::Val);
  CHECK(ok.records[0].metadata.at("k") == "v");
}

TEST_CASE("packed layout") {
  std::vector<EmbeddingRecord> recs(2);
  recs[0].sample_id = "a";
  recs[0].vector = {1.0f, 2.0f};
  recs[1].sample_id = "bb";
  recs[1].vector = {3.0f, -4.0f};
  const std::string bytes = encode_packed(recs, 2);
  CHECK(bytes.substr(0, 4) == "IDEM");
  CHECK(bytes.size() == 4 + 4 + 8 + 4 + (2 + 1) + (2 + 2) + 2 * 2 * 4);
  CHECK(static_cast<unsigned char>(bytes[8]) == 2);  // little-endian count
  CHECK_ERRC(decode_packed("JUNK" + bytes.substr(4)), Errc::MissingHeader);
  CHECK_ERRC(decode_packed(bytes.substr(0, bytes.size() - 3)), Errc::ParseError);
  CHECK_ERRC(decode_packed(bytes + "x"), Errc::ParseError);

  auto p = decode_packed(bytes);
  CHECK_ERRC(apply_sidecar(p, R"({"id":"zzz","label":"L"})"), Errc::ParseError);
  CHECK(sidecar_path("x/data.idem") == "x/data.idem.meta.jsonl");
}

TEST_CASE("file import and export") {
  testing::TempDir dir("formats");
  Rng rng(2);
  const auto records = random_records(rng, 20, 4);
  export_embeddings(records, 4, dir.str("a.jsonl"), Format::Jsonl);
  export_embeddings(records, 4, dir.str("a.idem"), Format::Packed);
  CHECK(format_for_path(dir.str("a.idem")) == Format::Packed);
  CHECK(format_for_path(dir.str("a.jsonl")) == Format::Jsonl);
  CHECK(bit_identical(records, import_embeddings(dir.str("a.jsonl"), Format::Jsonl).records));
  CHECK(bit_identical(records, import_embeddings(dir.str("a.idem"), Format::Packed).records));

  auto shuffled = records;
  rng.shuffle(shuffled);
  export_embeddings(shuffled, 4, dir.str("b.jsonl"), Format::Jsonl);
  CHECK(binio::read_file(dir.str("a.jsonl")) == binio::read_file(dir.str("b.jsonl")));
  CHECK_ERRC(import_embeddings(dir.str("missing.jsonl"), Format::Jsonl), Errc::IoError);
  CHECK_ERRC(export_embeddings({}, 4, dir.str("c.jsonl"), Format::Jsonl), Errc::EmptySet);
  CHECK_ERRC(parse_format("csv"), Errc::InvalidArgument);
}

TEST_CASE("dataset store") {
  testing::TempDir dir("store");
  Rng rng(3);
  const auto records = random_records(rng, 10, 3);
  {
    DatasetStore store(dir.path());
    const auto snap = store.create("alpha", records, 3, "unit");
    CHECK(snap.version() == 1);
    CHECK_ERRC(store.create("alpha", records, 3, "again"), Errc::Conflict);
    CHECK_ERRC(store.create("bad/id", records, 3, ""), Errc::InvalidArgument);
    CHECK_ERRC(store.create(".hidden", records, 3, ""), Errc::InvalidArgument);
    CHECK_ERRC(store.snapshot("nope"), Errc::UnknownDataset);

    const auto next = store.mutate("alpha", [](auto& recs) { recs.pop_back(); });
    CHECK(next.version() == 2);
    CHECK(snap.data().records.size() == 10);
    CHECK(next.data().records.size() == 9);
    CHECK(snap.points().snapshot_version == 1);
    CHECK_ERRC(store.mutate("alpha", [](auto& recs) { recs[0].vector.push_back(1); }), Errc::DimensionMismatch);
    CHECK(store.snapshot("alpha").version() == 2);
  }
  DatasetStore reopened(dir.path());
  CHECK(reopened.list() == std::vector<std::string>{"alpha"});
  const auto snap = reopened.snapshot("alpha");
  CHECK(snap.version() == 2);
  CHECK(snap.data().provenance == "unit");
  std::vector<EmbeddingRecord> expected(records.begin(), records.end() - 1);
  CHECK(bit_identical(expected, snap.data().records));
  reopened.remove("alpha");
  CHECK_ERRC(snap.data(), Errc::StaleSnapshot);
  CHECK_FALSE(reopened.contains("alpha"));
  CHECK(DatasetStore(dir.path()).list().empty());
}

TEST_CASE("synthetic datasets") {
  SyntheticSpec spec;
  spec.n_layouts = 4;
  spec.samples_min = 10;
  spec.samples_max = 20;
  spec.dim = 16;
  spec.fraud_families = {FamilySpec{12, 1.0, 0.01}, FamilySpec{8, 1.5, 0.01}};
  spec.outlier_count = 3;
  spec.val_fraction = 0.2;
  spec.test_fraction = 0.2;
  spec.rng_seed = 9;
  const auto a = synthesize(spec);
  const auto b = synthesize(spec);
  CHECK(encode_jsonl(a.records, a.dim) == encode_jsonl(b.records, b.dim));
  CHECK(ground_truth_jsonl(a) == ground_truth_jsonl(b));
  spec.rng_seed = 10;
  CHECK(encode_jsonl(synthesize(spec).records, 16) != encode_jsonl(a.records, a.dim));

  REQUIRE(a.records.size() == a.ground_truth.size());
  std::map<std::size_t, std::size_t> family_sizes;
  std::map<std::string, std::size_t> layout_sizes;
  std::size_t outliers = 0;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& r = a.records[i];
    const auto& g = a.ground_truth[i];
    CHECK(r.sample_id == g.sample_id);
    CHECK(std::abs(Eigen::Map<const Eigen::VectorXf>(r.vector.data(), 16).norm() - 1.0f) < 1e-5f);
    if (g.family) {
      ++family_sizes[*g.family];
      CHECK_FALSE(r.layout_label);
      CHECK_FALSE(g.layout);
    } else {
      REQUIRE(g.layout);
      CHECK(r.layout_label == g.layout);
      if (!g.outlier) ++layout_sizes[*g.layout];
    }
    outliers += g.outlier;
  }
  CHECK(family_sizes == std::map<std::size_t, std::size_t>{{0, 12}, {1, 8}});
  CHECK(outliers == 3);
  CHECK(layout_sizes.size() == 4);
  for (const auto& [_, n] : layout_sizes) {
    CHECK(n >= 10);
    CHECK(n <= 20);
  }
  CHECK(parse_ground_truth(ground_truth_jsonl(a)).size() == a.ground_truth.size());
  CHECK(layout_name(3, 19) == "layout-03");

  spec.fraud_families.clear();
  spec.outlier_count = 0;
  const auto plain = synthesize(spec);
  for (const auto& g : plain.ground_truth) CHECK_FALSE(g.family);

  spec.n_layouts = 30;
  CHECK_ERRC(synthesize(spec), Errc::InfeasibleSpec);
}

TEST_CASE("synthetic outliers sit at the requested cosine z") {
  SyntheticSpec spec;
  spec.n_layouts = 1;
  spec.samples_min = spec.samples_max = 3000;
  spec.dim = 64;
  spec.intra_class_spread = 0.03;
  spec.outlier_count = 6;
  spec.outlier_magnitude = 4.0;
  spec.rng_seed = 17;
  const auto d = synthesize(spec);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(64);
  std::vector<Eigen::VectorXd> in, out;
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXf>(d.records[i].vector.data(), 64).cast<double>();
    (d.ground_truth[i].outlier ? out : in).push_back(v);
    if (!d.ground_truth[i].outlier) mean += v;
  }
  mean.normalize();
  double mu = 0.0, sq = 0.0;
  for (const auto& v : in) {
    const double dist = 1.0 - v.dot(mean);
    mu += dist;
    sq += dist * dist;
  }
  mu /= static_cast<double>(in.size());
  const double sigma = std::sqrt(sq / static_cast<double>(in.size()) - mu * mu);
  REQUIRE(out.size() == 6);
  for (const auto& v : out) CHECK((1.0 - v.dot(mean) - mu) / sigma == doctest::Approx(4.0).epsilon(0.08));
}

TEST_CASE("synthetic spec parsing") {
  const auto j = nlohmann::json::parse(R"({"n_layouts":3,"samples_per_layout":[5,9],"dim":32,
    "fraud_families":[{"size":4,"offset_scale":1.0,"template_jitter":0.02}],
    "outliers":{"count":2,"magnitude":4},"splits":{"val":0.1,"test":0.3},"rng_seed":4})");
  const auto spec = synthetic_spec_from_json(j);
  CHECK(spec.samples_min == 5);
  CHECK(spec.samples_max == 9);
  CHECK(spec.fraud_families.size() == 1);
  CHECK(spec.outlier_magnitude == 4);
  CHECK(spec.test_fraction == 0.3);
  CHECK(synthetic_spec_from_json(to_json(spec)).rng_seed == 4);
  CHECK(synthetic_spec_from_json(j, 77).rng_seed == 77);

  auto extra = j;
  extra["colour"] = "red";
  CHECK_ERRC(synthetic_spec_from_json(extra), Errc::InvalidArgument);
  auto seedless = j;
  seedless.erase("rng_seed");
  CHECK_ERRC(synthetic_spec_from_json(seedless), Errc::InvalidArgument);
  auto bad = j;
  bad["splits"] = {{"val", 0.6}, {"test", 0.6}};
  CHECK_ERRC(synthetic_spec_from_json(bad), Errc::InvalidArgument);
}
