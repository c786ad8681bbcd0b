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

#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "infoknn/common.hpp"
#include "infoknn/corpus.hpp"
#include "infoknn/vocab.hpp"

namespace infoknn {

/// An (incorrect, correct) character pair; `rate` is its relative selection
/// weight when planting errors.
struct ConfusionPair {
  TokenId wrong = 0;
  TokenId correct = 0;
  double rate = 1.0;
};

/// Recipe for a seeded desk-scale benchmark. Each planted test error (or
/// clean usage) lives in a fixed 5-token context core; `repetition` copies
/// of that core are planted in the training set with fresh random filler,
/// mimicking recurring errors in similar contexts.
struct SyntheticSpec {
  Vocab vocab;
  std::vector<ConfusionPair> confusions;
  std::size_t min_len = 8;
  std::size_t max_len = 14;
  std::size_t train_pairs = 500;
  std::size_t test_pairs = 100;
  std::size_t repetition = 10;
  std::uint64_t seed = 17;
  std::size_t test_per_core = 5;  // test sentences sharing one planted core
  double clean_fraction = 0.5;    // fraction of test sentences left error-free
  double filler_error_rate = 0.3; // error rate among non-planted train pairs
};

/// One planted context: five source-side ids with the slot at the center.
/// For error cores the slot holds the wrong character on the source side
/// and the correct one on the target side; clean cores are identical.
struct PlantedCore {
  std::vector<TokenId> source_window;  // length 5, slot at index 2
  std::vector<TokenId> target_window;
  bool is_error = false;
};

struct SyntheticCorpus {
  std::vector<ParallelPair> train;
  std::vector<ParallelPair> test;
  std::vector<PlantedCore> cores;
};

namespace detail {

// Raw-engine draws, so generated corpora are identical across standard
// library implementations (std distributions are not portable).
inline std::size_t rng_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

inline double rng_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

inline TokenId random_char(std::mt19937_64& rng, std::size_t vocab_size) {
  return static_cast<TokenId>(1 + rng_index(rng, vocab_size - 1));
}

inline bool contains_window(const Sentence& s, const std::vector<TokenId>& window) {
  if (s.size() < window.size()) return false;
  for (std::size_t i = 0; i + window.size() <= s.size(); ++i) {
    bool match = true;
    for (std::size_t j = 0; j < window.size(); ++j) {
      if (s.ids[i + j] != window[j]) {
        match = false;
        break;
      }
    }
    if (match) return true;
  }
  return false;
}

inline bool contains_any_core(const Sentence& s, const std::vector<PlantedCore>& cores) {
  for (const auto& core : cores) {
    if (contains_window(s, core.source_window) || contains_window(s, core.target_window)) {
      return true;
    }
  }
  return false;
}

inline const ConfusionPair& pick_confusion(std::mt19937_64& rng,
                                           const std::vector<ConfusionPair>& confusions) {
  double total = 0.0;
  for (const auto& c : confusions) total += c.rate;
  double u = rng_unit(rng) * total;
  for (const auto& c : confusions) {
    u -= c.rate;
    if (u <= 0.0) return c;
  }
  return confusions.back();
}

/// Embeds a core window in random filler at a random slot position.
inline ParallelPair materialize(std::mt19937_64& rng, const PlantedCore& core,
                                std::size_t min_len, std::size_t max_len, std::size_t vocab_size) {
  std::size_t len = min_len + rng_index(rng, max_len - min_len + 1);
  std::size_t start = rng_index(rng, len - core.source_window.size() + 1);
  ParallelPair pair;
  pair.source.ids.resize(len);
  pair.target.ids.resize(len);
  for (std::size_t i = 0; i < len; ++i) {
    TokenId filler = random_char(rng, vocab_size);
    pair.source.ids[i] = filler;
    pair.target.ids[i] = filler;
  }
  for (std::size_t j = 0; j < core.source_window.size(); ++j) {
    pair.source.ids[start + j] = core.source_window[j];
    pair.target.ids[start + j] = core.target_window[j];
  }
  return pair;
}

inline void shuffle_pairs(std::mt19937_64& rng, std::vector<ParallelPair>& pairs) {
  for (std::size_t i = pairs.size(); i > 1; --i) {
    std::swap(pairs[i - 1], pairs[rng_index(rng, i)]);
  }
}

}  // namespace detail

/// Generates seeded train/test corpora where test errors reuse training
/// contexts with controllable repetition. With repetition 0 the planted
/// cores receive no training support, and random training pairs are
/// resampled so they never contain a test core window.
inline SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
  const std::size_t vocab_size = spec.vocab.size();
  if (vocab_size < 8) {
    throw error(errc::bad_hyperparam, "synthetic vocabulary too small");
  }
  if (spec.confusions.empty()) {
    throw error(errc::bad_hyperparam, "empty confusion set");
  }
  for (const auto& c : spec.confusions) {
    if (!(c.rate >= 0.0 && c.rate <= 1.0)) {
      throw error(errc::bad_hyperparam, "confusion rates must be in [0,1]");
    }
    if (c.wrong == kBoundaryId || c.correct == kBoundaryId ||
        static_cast<std::size_t>(c.wrong) >= vocab_size ||
        static_cast<std::size_t>(c.correct) >= vocab_size) {
      throw error(errc::bad_hyperparam, "confusion pair ids out of range");
    }
  }
  if (spec.min_len < 5 || spec.max_len < spec.min_len) {
    throw error(errc::bad_hyperparam, "sentence length range must satisfy 5 <= min <= max");
  }
  if (spec.test_per_core == 0) {
    throw error(errc::bad_hyperparam, "test_per_core must be >= 1");
  }

  std::mt19937_64 rng(spec.seed);
  SyntheticCorpus out;

  const std::size_t n_test_clean =
      static_cast<std::size_t>(static_cast<double>(spec.test_pairs) * spec.clean_fraction);
  const std::size_t n_test_error = spec.test_pairs - n_test_clean;
  const std::size_t n_error_cores =
      (n_test_error + spec.test_per_core - 1) / spec.test_per_core;
  const std::size_t n_clean_cores =
      (n_test_clean + spec.test_per_core - 1) / spec.test_per_core;

  // Distinct context cores. Error cores put the confusion's wrong character
  // at the slot on the source side; clean cores use an ordinary character.
  // Wrong characters with several corrections yield twin cores that share
  // everything except the character left of the slot and the correction
  // itself: raw key distance barely separates the twins, the value n-gram
  // does, which is what the reranking step exists for.
  std::set<std::vector<TokenId>> seen_windows;
  auto push_core = [&](PlantedCore core) {
    if (!seen_windows.insert(core.source_window).second) return false;
    out.cores.push_back(std::move(core));
    return true;
  };
  auto make_clean_core = [&] {
    for (;;) {
      PlantedCore core;
      core.source_window.resize(5);
      for (std::size_t j = 0; j < 5; ++j) {
        core.source_window[j] = detail::random_char(rng, vocab_size);
      }
      core.target_window = core.source_window;
      if (push_core(std::move(core))) return;
    }
  };

  struct ConfusionGroup {
    TokenId wrong;
    std::vector<TokenId> corrects;
  };
  std::vector<ConfusionGroup> groups;
  for (const auto& c : spec.confusions) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const ConfusionGroup& g) { return g.wrong == c.wrong; });
    if (it == groups.end()) {
      groups.push_back(ConfusionGroup{c.wrong, {c.correct}});
    } else if (std::find(it->corrects.begin(), it->corrects.end(), c.correct) ==
               it->corrects.end()) {
      it->corrects.push_back(c.correct);
    }
  }

  std::size_t error_cores_made = 0;
  std::size_t group_cursor = 0;
  while (error_cores_made < n_error_cores) {
    const ConfusionGroup& g = groups[group_cursor % groups.size()];
    ++group_cursor;
    if (g.corrects.size() >= 2 && n_error_cores - error_cores_made >= 2) {
      // twin cores: shared outer context (q, b, s), distinct left neighbor
      TokenId q = detail::random_char(rng, vocab_size);
      TokenId b = detail::random_char(rng, vocab_size);
      TokenId s = detail::random_char(rng, vocab_size);
      for (std::size_t m = 0; m < 2; ++m) {
        for (;;) {
          PlantedCore core;
          core.is_error = true;
          core.source_window = {q, detail::random_char(rng, vocab_size), g.wrong, b, s};
          core.target_window = core.source_window;
          core.target_window[2] = g.corrects[m];
          if (push_core(std::move(core))) break;
        }
        ++error_cores_made;
      }
    } else {
      for (;;) {
        PlantedCore core;
        core.is_error = true;
        core.source_window.resize(5);
        for (std::size_t j = 0; j < 5; ++j) {
          core.source_window[j] = detail::random_char(rng, vocab_size);
        }
        const auto& conf = detail::pick_confusion(rng, spec.confusions);
        core.source_window[2] = conf.wrong;
        core.target_window = core.source_window;
        core.target_window[2] = conf.correct;
        if (push_core(std::move(core))) break;
      }
      ++error_cores_made;
    }
  }
  for (std::size_t i = 0; i < n_clean_cores; ++i) make_clean_core();

  // Training set: `repetition` plantings per core, then random filler pairs.
  const std::size_t planted = out.cores.size() * spec.repetition;
  if (planted > spec.train_pairs) {
    throw error(errc::bad_hyperparam,
                "train_pairs too small: " + std::to_string(planted) +
                    " planted occurrences requested, " + std::to_string(spec.train_pairs) +
                    " available");
  }
  for (const auto& core : out.cores) {
    for (std::size_t r = 0; r < spec.repetition; ++r) {
      out.train.push_back(
          detail::materialize(rng, core, spec.min_len, spec.max_len, vocab_size));
    }
  }
  while (out.train.size() < spec.train_pairs) {
    bool as_error = detail::rng_unit(rng) < spec.filler_error_rate;
    PlantedCore scratch;
    scratch.is_error = as_error;
    scratch.source_window.resize(5);
    for (std::size_t j = 0; j < 5; ++j) {
      scratch.source_window[j] = detail::random_char(rng, vocab_size);
    }
    scratch.target_window = scratch.source_window;
    if (as_error) {
      const auto& conf = detail::pick_confusion(rng, spec.confusions);
      scratch.source_window[2] = conf.wrong;
      scratch.target_window[2] = conf.correct;
    }
    auto pair = detail::materialize(rng, scratch, spec.min_len, spec.max_len, vocab_size);
    if (detail::contains_any_core(pair.source, out.cores) ||
        detail::contains_any_core(pair.target, out.cores)) {
      continue;  // resample: random pairs must not shadow a planted core
    }
    out.train.push_back(std::move(pair));
  }

  // Test set: fresh fillers around the same cores.
  std::size_t made_error = 0, made_clean = 0;
  for (std::size_t round = 0; round < spec.test_per_core; ++round) {
    for (const auto& core : out.cores) {
      if (core.is_error) {
        if (made_error == n_test_error) continue;
        ++made_error;
      } else {
        if (made_clean == n_test_clean) continue;
        ++made_clean;
      }
      out.test.push_back(
          detail::materialize(rng, core, spec.min_len, spec.max_len, vocab_size));
    }
  }

  detail::shuffle_pairs(rng, out.train);
  detail::shuffle_pairs(rng, out.test);
  return out;
}

/// Vocabulary of `n_chars` CJK characters after the boundary token; handy
/// for desk-scale benchmarks.
inline Vocab make_synthetic_vocab(std::size_t n_chars) {
  std::vector<std::string> tokens;
  tokens.reserve(n_chars + 1);
  tokens.emplace_back(kBoundaryToken);
  for (std::size_t i = 0; i < n_chars; ++i) {
    tokens.push_back(code_point_to_utf8(static_cast<char32_t>(0x4E00 + i)));
  }
  return Vocab(std::move(tokens));
}

}  // namespace infoknn
