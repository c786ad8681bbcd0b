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

#include "infoknn/synthetic.hpp"
#include "support/test_util.hpp"

using namespace infoknn;

namespace {

SyntheticSpec small_spec() {
  SyntheticSpec spec;
  spec.vocab = make_synthetic_vocab(60);
  spec.confusions = {{1, 2, 1.0}, {5, 6, 0.7}, {9, 10, 0.4}};
  spec.train_pairs = 500;
  spec.test_pairs = 100;
  spec.repetition = 10;
  spec.seed = 17;
  return spec;
}

std::size_t count_window(const std::vector<ParallelPair>& pairs,
                         const std::vector<TokenId>& window) {
  std::size_t hits = 0;
  for (const auto& p : pairs) {
    const auto& ids = p.source.ids;
    for (std::size_t i = 0; i + window.size() <= ids.size(); ++i) {
      if (std::equal(window.begin(), window.end(), ids.begin() + static_cast<long>(i))) {
        ++hits;
        break;  // one occurrence per sentence is enough
      }
    }
  }
  return hits;
}

}  // namespace

TEST_CASE("generation is deterministic given a seed") {
  auto spec = small_spec();
  auto a = generate_synthetic(spec);
  auto b = generate_synthetic(spec);
  REQUIRE(a.train.size() == b.train.size());
  REQUIRE(a.test.size() == b.test.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    CHECK(a.train[i].source == b.train[i].source);
    CHECK(a.train[i].target == b.train[i].target);
  }
  for (std::size_t i = 0; i < a.test.size(); ++i) {
    CHECK(a.test[i].source == b.test[i].source);
  }

  spec.seed = 18;
  auto c = generate_synthetic(spec);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.train.size() && !any_diff; ++i) {
    any_diff = !(a.train[i].source == c.train[i].source);
  }
  CHECK(any_diff);
}

TEST_CASE("requested corpus sizes and invariants hold") {
  auto corpus = generate_synthetic(small_spec());
  CHECK(corpus.train.size() == 500);
  CHECK(corpus.test.size() == 100);
  for (const auto& p : corpus.train) {
    REQUIRE(p.source.size() == p.target.size());
    CHECK(p.source.size() >= 8);
    CHECK(p.source.size() <= 14);
    for (TokenId id : p.source.ids) CHECK(id != kBoundaryId);
  }
}

TEST_CASE("every planted test confusion has >= repetition matching train contexts") {
  auto spec = small_spec();
  auto corpus = generate_synthetic(spec);
  for (const auto& core : corpus.cores) {
    CHECK(count_window(corpus.train, core.source_window) >= spec.repetition);
  }
}

TEST_CASE("repetition 0 leaves test contexts unsupported in training") {
  auto spec = small_spec();
  spec.repetition = 0;
  auto corpus = generate_synthetic(spec);
  CHECK(corpus.train.size() == spec.train_pairs);
  for (const auto& core : corpus.cores) {
    CHECK(count_window(corpus.train, core.source_window) == 0);
    CHECK(count_window(corpus.train, core.target_window) == 0);
  }
}

TEST_CASE("test errors differ from gold exactly at the planted slot") {
  auto corpus = generate_synthetic(small_spec());
  std::size_t error_sentences = 0;
  for (const auto& p : corpus.test) {
    std::size_t diffs = 0;
    for (std::size_t t = 0; t < p.source.size(); ++t) {
      if (p.source.ids[t] != p.target.ids[t]) ++diffs;
    }
    CHECK(diffs <= 1);
    if (diffs == 1) ++error_sentences;
  }
  CHECK(error_sentences == 50);  // clean_fraction = 0.5
}

TEST_CASE("synthetic corpora round-trip through the corpus file format") {
  testutil::TempDir dir;
  auto spec = small_spec();
  spec.train_pairs = 60;
  spec.test_pairs = 20;
  spec.repetition = 2;
  auto corpus = generate_synthetic(spec);

  std::ostringstream text;
  write_corpus(text, corpus.train, spec.vocab);
  auto path = testutil::write_text(dir.file("train.tsv"), text.str());
  auto reloaded = load_corpus(path, spec.vocab);
  REQUIRE(reloaded.size() == corpus.train.size());
  for (std::size_t i = 0; i < reloaded.size(); ++i) {
    CHECK(reloaded[i].source == corpus.train[i].source);
    CHECK(reloaded[i].target == corpus.train[i].target);
  }
}

TEST_CASE("generator validates its spec") {
  auto spec = small_spec();
  spec.confusions.clear();
  CHECK_THROWS_AS(generate_synthetic(spec), error);

  spec = small_spec();
  spec.vocab = Vocab({"<b>", "一", "二"});
  CHECK_THROWS_AS(generate_synthetic(spec), error);

  spec = small_spec();
  spec.train_pairs = 10;  // cannot hold the planted occurrences
  CHECK_THROWS_AS(generate_synthetic(spec), error);
}
