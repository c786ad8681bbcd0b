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

#include "infoknn/config.hpp"
#include "infoknn/corpus.hpp"
#include "infoknn/vocab.hpp"
#include "support/test_util.hpp"

using namespace infoknn;
using testutil::TempDir;
using testutil::write_text;

TEST_CASE("load_vocab assigns line index as id") {
  TempDir dir;
  auto path = write_text(dir.file("vocab.txt"), "<b>\n这\n一\n以\n");
  Vocab v = load_vocab(path);
  CHECK(v.size() == 4);
  CHECK(v.id("一") == 2);
  CHECK(v.token(0) == "<b>");
  CHECK(v.token(3) == "以");
}

TEST_CASE("load_vocab rejects duplicates") {
  TempDir dir;
  auto path = write_text(dir.file("vocab.txt"), "<b>\n一\n二\n一\n");
  try {
    load_vocab(path);
    FAIL("expected DuplicateToken");
  } catch (const error& e) {
    CHECK(e.code() == errc::duplicate_token);
  }
}

TEST_CASE("load_vocab requires the boundary token at line 0") {
  TempDir dir;
  auto path = write_text(dir.file("vocab.txt"), "这\n一\n");
  try {
    load_vocab(path);
    FAIL("expected MissingBoundaryToken");
  } catch (const error& e) {
    CHECK(e.code() == errc::missing_boundary_token);
  }
}

TEST_CASE("load_vocab rejects an empty file") {
  TempDir dir;
  auto path = write_text(dir.file("vocab.txt"), "");
  CHECK_THROWS_AS(load_vocab(path), error);
}

TEST_CASE("load_vocab rejects multi-code-point tokens") {
  TempDir dir;
  auto path = write_text(dir.file("vocab.txt"), "<b>\n这个\n");
  try {
    load_vocab(path);
    FAIL("expected MalformedVocab");
  } catch (const error& e) {
    CHECK(e.code() == errc::malformed_vocab);
  }
}

TEST_CASE("vocab id/token round-trip") {
  TempDir dir;
  auto path = write_text(dir.file("vocab.txt"), "<b>\n这\n一\n以\n个\n好\n");
  Vocab v = load_vocab(path);
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(v.id(v.token(static_cast<TokenId>(i))) == static_cast<TokenId>(i));
  }
}

namespace {

Vocab demo_vocab() {
  return Vocab({"<b>", "这", "一", "以", "个", "你", "好", "吗"});
}

}  // namespace

TEST_CASE("load_corpus parses tab-separated pairs") {
  TempDir dir;
  Vocab v = demo_vocab();
  auto path = write_text(dir.file("corpus.tsv"), "这以个\t这一个\n");
  auto pairs = load_corpus(path, v);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].source.size() == 3);
  CHECK(pairs[0].target.size() == 3);
  CHECK(pairs[0].source.ids[1] != pairs[0].target.ids[1]);
  CHECK(pairs[0].source.ids[0] == pairs[0].target.ids[0]);
  CHECK(pairs[0].source.ids[2] == pairs[0].target.ids[2]);
}

TEST_CASE("load_corpus accepts identity pairs") {
  TempDir dir;
  Vocab v = demo_vocab();
  auto path = write_text(dir.file("corpus.tsv"), "你好\t你好\n");
  auto pairs = load_corpus(path, v);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].source == pairs[0].target);
}

TEST_CASE("load_corpus reports length mismatches with the line number") {
  TempDir dir;
  Vocab v = demo_vocab();
  auto path = write_text(dir.file("corpus.tsv"), "你好\t你好\n你好\t你好吗\n");
  try {
    load_corpus(path, v);
    FAIL("expected LengthMismatch");
  } catch (const error& e) {
    CHECK(e.code() == errc::length_mismatch);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("load_corpus rejects out-of-vocabulary tokens") {
  TempDir dir;
  Vocab v = demo_vocab();
  auto path = write_text(dir.file("corpus.tsv"), "天好\t天好\n");
  try {
    load_corpus(path, v);
    FAIL("expected OutOfVocabulary");
  } catch (const error& e) {
    CHECK(e.code() == errc::out_of_vocabulary);
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
}

TEST_CASE("load_config: empty file keeps the shipped defaults") {
  TempDir dir;
  auto path = write_text(dir.file("cfg"), "");
  Hyperparams hp = load_config(path);
  CHECK(hp.k == 12);
  CHECK(hp.ngram == 3);
  CHECK(hp.lambda == Catch::Approx(0.45));
  CHECK(hp.temperature == Catch::Approx(50.0));
  CHECK(hp.sigma == Catch::Approx(1.0));
  REQUIRE(hp.weights.size() == 3);
  CHECK(hp.weights[0] == Catch::Approx(1.68));
  CHECK(hp.weights[1] == Catch::Approx(0.68));
  CHECK(hp.weights[2] == Catch::Approx(1.68));
  CHECK(hp.seed == 17);
}

TEST_CASE("load_config: single override keeps remaining defaults") {
  TempDir dir;
  auto path = write_text(dir.file("cfg"), "lambda=0\n");
  Hyperparams hp = load_config(path);
  CHECK(hp.lambda == 0.0);
  CHECK(hp.k == 12);
  CHECK(hp.temperature == Catch::Approx(50.0));
}

TEST_CASE("load_config rejects an even ngram") {
  TempDir dir;
  auto path = write_text(dir.file("cfg"), "ngram=4\n");
  try {
    load_config(path);
    FAIL("expected EvenNGram");
  } catch (const error& e) {
    CHECK(e.code() == errc::even_ngram);
  }
}

TEST_CASE("load_config rejects unknown keys") {
  TempDir dir;
  auto path = write_text(dir.file("cfg"), "knn=7\n");
  try {
    load_config(path);
    FAIL("expected BadConfigKey");
  } catch (const error& e) {
    CHECK(e.code() == errc::bad_config_key);
  }
}

TEST_CASE("load_config validates ranges") {
  TempDir dir;
  CHECK_THROWS_AS(load_config(write_text(dir.file("a"), "lambda=1.5\n")), error);
  CHECK_THROWS_AS(load_config(write_text(dir.file("b"), "temperature=0\n")), error);
  CHECK_THROWS_AS(load_config(write_text(dir.file("c"), "sigma=-1\n")), error);
  CHECK_THROWS_AS(load_config(write_text(dir.file("d"), "ngram=5\n")), error);  // weights stay 3
  CHECK_NOTHROW(load_config(write_text(dir.file("e"), "ngram=5\nweights=1,1,1,1,1\n")));
}

TEST_CASE("config round-trip preserves every field") {
  TempDir dir;
  std::mt19937_64 rng(7);
  for (int iter = 0; iter < 20; ++iter) {
    Hyperparams hp;
    hp.k = 1 + static_cast<int>(rng() % 40);
    hp.ngram = 1 + 2 * static_cast<int>(rng() % 4);
    hp.lambda = static_cast<double>(rng() % 1000) / 1000.0;
    hp.temperature = 0.25 + static_cast<double>(rng() % 1000) / 7.0;
    hp.sigma = 0.5 + static_cast<double>(rng() % 100) / 13.0;
    hp.weights.assign(static_cast<std::size_t>(hp.ngram), 0.0);
    for (auto& w : hp.weights) w = static_cast<double>(rng() % 5000) / 999.0;
    hp.seed = rng();
    auto path = write_text(dir.file("cfg" + std::to_string(iter)), format_config(hp));
    Hyperparams back = load_config(path);
    CHECK(back == hp);
  }
}
