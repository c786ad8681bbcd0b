// Copyright 2026 the infoknn project
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

#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "infoknn/datastore.hpp"
#include "infoknn/synthetic.hpp"
#include "support/test_util.hpp"

using namespace infoknn;
using testutil::TempDir;

namespace {

Vocab demo_vocab() { return Vocab({"<b>", "这", "一", "以", "个", "你", "好"}); }

std::vector<ParallelPair> demo_pairs(const Vocab& v) {
  ParallelPair p1{Sentence{{v.id("这"), v.id("以"), v.id("个")}},
                  Sentence{{v.id("这"), v.id("一"), v.id("个")}}};
  ParallelPair p2{Sentence{{v.id("你"), v.id("好"), v.id("你"), v.id("好")}},
                  Sentence{{v.id("你"), v.id("好"), v.id("你"), v.id("好")}}};
  return {p1, p2};
}

/// Store with synthetic keys for search tests; values/centers are dummies.
Datastore store_with_keys(const std::vector<std::vector<float>>& keys, std::uint32_t dim) {
  Datastore store(EncoderDims{dim, 0, 0}, 3);
  std::vector<TokenId> value{0, 1, 0};
  for (std::size_t i = 0; i < keys.size(); ++i) {
    store.append(keys[i], value, 1, Provenance{static_cast<std::uint32_t>(i), 0});
  }
  return store;
}

}  // namespace

TEST_CASE("build emits one entry per target token with padded values") {
  Vocab v = demo_vocab();
  auto suite = make_hash_encoder(v, 17);
  Hyperparams hp;
  std::vector<ParallelPair> pairs{demo_pairs(v)[0]};
  Datastore store = build_datastore(pairs, suite, hp);
  REQUIRE(store.size() == 3);
  auto value0 = store.value(0);
  CHECK(value0[0] == kBoundaryId);
  CHECK(value0[1] == v.id("这"));
  CHECK(value0[2] == v.id("一"));
  auto value2 = store.value(2);
  CHECK(value2[2] == kBoundaryId);
}

TEST_CASE("build keys come from the source side, values from the target side") {
  Vocab v = demo_vocab();
  auto suite = make_hash_encoder(v, 17);
  Hyperparams hp;
  std::vector<ParallelPair> pairs{demo_pairs(v)[0]};
  Datastore store = build_datastore(pairs, suite, hp);
  CHECK(store.source_center(1) == v.id("以"));
  CHECK(store.value_center(1) == v.id("一"));
}

TEST_CASE("build counts entries and provenance across pairs") {
  Vocab v = demo_vocab();
  auto suite = make_hash_encoder(v, 17);
  Hyperparams hp;
  auto pairs = demo_pairs(v);
  Datastore store = build_datastore(pairs, suite, hp);
  REQUIRE(store.size() == 7);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(store.provenance(i) == Provenance{0, static_cast<std::uint32_t>(i)});
  }
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(store.provenance(3 + i) == Provenance{1, static_cast<std::uint32_t>(i)});
  }
}

TEST_CASE("build is a pure function of its inputs") {
  Vocab v = demo_vocab();
  auto suite = make_hash_encoder(v, 17);
  Hyperparams hp;
  auto pairs = demo_pairs(v);
  auto a = serialize(build_datastore(pairs, suite, hp));
  auto b = serialize(build_datastore(pairs, suite, hp));
  CHECK(a == b);
}

TEST_CASE("extend_with_raw appends y=x entries and keeps the prefix bitwise") {
  Vocab v = demo_vocab();
  auto suite = make_hash_encoder(v, 17);
  Hyperparams hp;
  auto pairs = demo_pairs(v);
  Datastore store = build_datastore(pairs, suite, hp);
  auto before = serialize(store);

  std::vector<Sentence> raw{Sentence{{v.id("你"), v.id("好")}},
                            Sentence{{v.id("这"), v.id("个"), v.id("好"), v.id("你")}}};
  extend_with_raw(store, raw, suite, hp);
  REQUIRE(store.size() == 13);
  for (std::size_t i = 7; i < 13; ++i) {
    CHECK(store.value_center(i) == store.source_center(i));
  }
  CHECK(store.provenance(7).sentence == 2);  // continues after the pairs
  CHECK(store.provenance(9).sentence == 3);

  // original entries are bitwise untouched: the entry regions agree once the
  // header (whose count field necessarily changed) and CRC are set aside
  auto after = serialize(store);
  const std::size_t header = 4 + 2 + 3 * 4 + 4 + 8;
  const std::size_t entry_bytes = store.key_dim() * 4 + 3 * 4 + 4 + 8;
  CHECK(std::equal(before.begin() + header, before.end() - 4, after.begin() + header));
  CHECK(before.size() - header - 4 == 7 * entry_bytes);

  extend_with_raw(store, std::vector<Sentence>{}, suite, hp);
  CHECK(store.size() == 13);
}

TEST_CASE("search on a singleton store returns it for any k") {
  auto store = store_with_keys({{1.0f, 2.0f}}, 2);
  for (std::size_t k : {1u, 5u, 100u}) {
    auto hits = search(store, std::vector<float>{4.0f, 6.0f}, k);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].index == 0);
    CHECK(hits[0].distance == Catch::Approx(5.0));
  }
}

TEST_CASE("search finds an exact key at distance zero, rank one") {
  std::mt19937_64 rng(3);
  std::vector<std::vector<float>> keys;
  for (int i = 0; i < 50; ++i) keys.push_back(testutil::random_vector(rng, 8));
  auto store = store_with_keys(keys, 8);
  auto hits = search(store, keys[31], 4);
  REQUIRE(hits.size() == 4);
  CHECK(hits[0].index == 31);
  CHECK(hits[0].distance == 0.0);
}

TEST_CASE("search matches the exhaustive oracle on randomized stores") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 4; ++trial) {
    // trial 0 pins the reference configuration: 1000 entries, d=16, k=12
    std::size_t dim = trial == 0 ? 16 : 4 + (rng() % 28);
    std::size_t count = trial == 0 ? 1000 : 200 + (rng() % 800);
    int queries = trial == 0 ? 100 : 25;
    std::vector<std::vector<float>> keys;
    keys.reserve(count);
    for (std::size_t i = 0; i < count; ++i) keys.push_back(testutil::random_vector(rng, dim));
    auto store = store_with_keys(keys, static_cast<std::uint32_t>(dim));
    for (int q = 0; q < queries; ++q) {
      auto query = testutil::random_vector(rng, dim);
      auto hits = search(store, query, 12);
      auto oracle = testutil::brute_force_knn(keys, query, 12);
      REQUIRE(hits.size() == oracle.size());
      for (std::size_t i = 0; i < hits.size(); ++i) {
        CHECK(hits[i].index == oracle[i].index);
        CHECK(hits[i].distance == Catch::Approx(oracle[i].distance).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("append enforces the store's key and value dimensions") {
  Datastore store(EncoderDims{2, 2, 2}, 3);
  std::vector<TokenId> value{0, 1, 0};
  CHECK_THROWS_AS(store.append(std::vector<float>{1.0f}, value, 1, Provenance{0, 0}), error);
  CHECK_THROWS_AS(store.append(std::vector<float>(6, 0.0f), std::vector<TokenId>{1}, 1,
                               Provenance{0, 0}),
                  error);
  CHECK_NOTHROW(store.append(std::vector<float>(6, 0.0f), value, 1, Provenance{0, 0}));
}

TEST_CASE("parallel scans merge to the sequential result") {
  std::mt19937_64 rng(13);
  std::vector<std::vector<float>> keys;
  for (int i = 0; i < 3000; ++i) keys.push_back(testutil::random_vector(rng, 24));
  auto store = store_with_keys(keys, 24);
  auto query = testutil::random_vector(rng, 24);
  auto sequential = search(store, query, 10, SearchOptions{DistanceKind::l2, 1});
  for (unsigned threads : {2u, 3u, 7u}) {
    auto parallel = search(store, query, 10, SearchOptions{DistanceKind::l2, threads});
    CHECK(parallel == sequential);
  }
}

TEST_CASE("squared-l2 mode returns squared distances in the same order") {
  std::mt19937_64 rng(29);
  std::vector<std::vector<float>> keys;
  for (int i = 0; i < 300; ++i) keys.push_back(testutil::random_vector(rng, 16));
  auto store = store_with_keys(keys, 16);
  auto query = testutil::random_vector(rng, 16);
  auto plain = search(store, query, 8);
  auto squared = search(store, query, 8, SearchOptions{DistanceKind::squared_l2, 1});
  REQUIRE(plain.size() == squared.size());
  for (std::size_t i = 0; i < plain.size(); ++i) {
    CHECK(plain[i].index == squared[i].index);
    CHECK(squared[i].distance == Catch::Approx(plain[i].distance * plain[i].distance).margin(1e-9));
  }
}

TEST_CASE("search distances are non-decreasing and stable under appends") {
  std::mt19937_64 rng(37);
  std::vector<std::vector<float>> keys;
  for (int i = 0; i < 400; ++i) keys.push_back(testutil::random_vector(rng, 12));
  auto store = store_with_keys(keys, 12);
  auto query = testutil::random_vector(rng, 12);
  auto before = search(store, query, 6);
  for (std::size_t i = 1; i < before.size(); ++i) {
    CHECK(before[i].distance >= before[i - 1].distance);
  }
  // push the new key far away so the top-6 set cannot change
  std::vector<float> far(12, 100.0f);
  store.append(far, std::vector<TokenId>{0, 1, 0}, 1, Provenance{9999, 0});
  auto after = search(store, query, 6);
  CHECK(after == before);
}

TEST_CASE("search rejects dimension mismatches") {
  auto store = store_with_keys({{1.0f, 2.0f}}, 2);
  CHECK_THROWS_AS(search(store, std::vector<float>{1.0f, 2.0f, 3.0f}, 1), error);
}

TEST_CASE("datastore save/load round-trips bitwise") {
  TempDir dir;
  Vocab v = demo_vocab();
  auto suite = make_hash_encoder(v, 17);
  Hyperparams hp;
  auto pairs = demo_pairs(v);
  Datastore store = build_datastore(pairs, suite, hp);
  auto path = dir.file("store.ikds");
  save_datastore(store, path);
  Datastore loaded = load_datastore(path);
  CHECK(loaded == store);
  CHECK(serialize(loaded) == serialize(store));
}

TEST_CASE("datastore load rejects corrupted files") {
  TempDir dir;
  Vocab v = demo_vocab();
  auto suite = make_hash_encoder(v, 17);
  Datastore store = build_datastore(demo_pairs(v), suite, Hyperparams{});
  auto bytes = serialize(store);
  auto path = dir.file("store.ikds");

  SECTION("bad magic") {
    auto bad = bytes;
    bad[0] = 'X';
    testutil::write_text(path, std::string(bad.begin(), bad.end()));
    try {
      load_datastore(path);
      FAIL("expected BadMagic");
    } catch (const error& e) {
      CHECK(e.code() == errc::bad_magic);
    }
  }

  SECTION("version mismatch") {
    auto bad = bytes;
    bad[4] = 0x7F;
    testutil::write_text(path, std::string(bad.begin(), bad.end()));
    try {
      load_datastore(path);
      FAIL("expected VersionMismatch");
    } catch (const error& e) {
      CHECK(e.code() == errc::version_mismatch);
    }
  }

  SECTION("truncated mid-entry reports the byte offset") {
    auto bad = bytes;
    bad.resize(bad.size() - 40);
    testutil::write_text(path, std::string(bad.begin(), bad.end()));
    try {
      load_datastore(path);
      FAIL("expected Truncated");
    } catch (const error& e) {
      CHECK(e.code() == errc::truncated);
      CHECK(std::string(e.what()).find("byte offset " + std::to_string(bad.size())) !=
            std::string::npos);
    }
  }

  SECTION("flipped body byte fails the checksum") {
    auto bad = bytes;
    bad[bad.size() / 2] ^= 0x01;
    testutil::write_text(path, std::string(bad.begin(), bad.end()));
    try {
      load_datastore(path);
      FAIL("expected ChecksumMismatch");
    } catch (const error& e) {
      CHECK(e.code() == errc::checksum_mismatch);
    }
  }
}

TEST_CASE("plain-key stores persist their mode through the dims") {
  TempDir dir;
  Vocab v = demo_vocab();
  auto suite = make_hash_encoder(v, 17);
  Hyperparams hp;
  Datastore plain = build_datastore(demo_pairs(v), suite, hp, KeyMode::plain_hidden);
  CHECK(plain.key_mode() == KeyMode::plain_hidden);
  CHECK(plain.key_dim() == 32);
  auto path = dir.file("plain.ikds");
  save_datastore(plain, path);
  CHECK(load_datastore(path).key_mode() == KeyMode::plain_hidden);
}

TEST_CASE("sidecar round-trips and validates row alignment") {
  TempDir dir;
  Vocab v = demo_vocab();
  auto suite = make_hash_encoder(v, 17);
  auto pairs = demo_pairs(v);

  Sidecar sc;
  sc.dims = suite.dims();
  for (const auto& p : pairs) sc.sentences.push_back(suite.encode(p.source));
  auto path = dir.file("features.iknn");
  save_sidecar(sc, path);
  Sidecar loaded = load_sidecar(path);
  CHECK(loaded.dims == sc.dims);
  REQUIRE(loaded.sentences.size() == sc.sentences.size());
  CHECK(loaded.sentences[0] == sc.sentences[0]);

  Hyperparams hp;
  Datastore via_sidecar = build_datastore(pairs, loaded, hp);
  Datastore via_suite = build_datastore(pairs, suite, hp);
  CHECK(serialize(via_sidecar) == serialize(via_suite));

  Sidecar short_sc;
  short_sc.dims = suite.dims();
  short_sc.sentences.push_back(suite.encode(pairs[0].source));
  try {
    build_datastore(pairs, short_sc, hp);
    FAIL("expected SidecarMismatch");
  } catch (const error& e) {
    CHECK(e.code() == errc::sidecar_mismatch);
  }

  Sentence wrong_len{{1, 2}};
  CHECK_THROWS_AS(loaded.bundles_for(wrong_len, 0), error);
}
