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

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "infoknn/common.hpp"
#include "infoknn/config.hpp"
#include "infoknn/corpus.hpp"
#include "infoknn/datastore.hpp"
#include "infoknn/encoder.hpp"
#include "infoknn/retrieval.hpp"

namespace infoknn {

/// Probability vector over the vocabulary; nonnegative, sums to 1.
using TokenDistribution = std::vector<double>;

/// Per-token probability provider standing in for the base correction
/// model. `index` is the sentence's position within the run (0 for ad-hoc
/// calls); index-aligned implementations like the noisy oracle use it to
/// find their gold line.
class BaseModel {
 public:
  virtual ~BaseModel() = default;
  virtual std::vector<TokenDistribution> predict(const Sentence& source,
                                                 std::size_t index) const = 0;
  virtual std::size_t vocab_size() const = 0;
};

class UniformBaseModel final : public BaseModel {
 public:
  explicit UniformBaseModel(std::size_t vocab_size) : vocab_size_(vocab_size) {}

  std::vector<TokenDistribution> predict(const Sentence& source, std::size_t) const override {
    TokenDistribution uniform(vocab_size_, 1.0 / static_cast<double>(vocab_size_));
    return std::vector<TokenDistribution>(source.size(), uniform);
  }

  std::size_t vocab_size() const override { return vocab_size_; }

 private:
  std::size_t vocab_size_;
};

/// Toy stand-in for a trained corrector: looks up the gold sentence for the
/// run index and, per position, designates the gold token -- except at a
/// seeded epsilon rate, where it designates a uniformly drawn wrong token
/// instead. The designated token gets mass 1 - epsilon; epsilon is spread
/// uniformly over the vocabulary. Deterministic given (seed, index, position).
class NoisyOracleBaseModel final : public BaseModel {
 public:
  NoisyOracleBaseModel(std::vector<Sentence> gold, double epsilon, std::uint64_t seed,
                       std::size_t vocab_size)
      : gold_(std::move(gold)), epsilon_(epsilon), seed_(seed), vocab_size_(vocab_size) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
      throw error(errc::bad_hyperparam, "oracle epsilon must be in [0,1]");
    }
  }

  std::vector<TokenDistribution> predict(const Sentence& source, std::size_t index) const override {
    if (index >= gold_.size()) {
      throw error(errc::length_mismatch,
                  "sentence index " + std::to_string(index) + " but oracle has " +
                      std::to_string(gold_.size()) + " gold lines");
    }
    const Sentence& gold = gold_[index];
    if (gold.size() != source.size()) {
      throw error(errc::length_mismatch,
                  "sentence " + std::to_string(index) + ": input has " +
                      std::to_string(source.size()) + " tokens, gold has " +
                      std::to_string(gold.size()));
    }
    std::vector<TokenDistribution> out;
    out.reserve(source.size());
    const double floor = epsilon_ / static_cast<double>(vocab_size_);
    for (std::size_t t = 0; t < source.size(); ++t) {
      TokenId designated = designate(gold.ids[t], index, t);
      TokenDistribution p(vocab_size_, floor);
      p[static_cast<std::size_t>(designated)] += 1.0 - epsilon_;
      out.push_back(std::move(p));
    }
    return out;
  }

  std::size_t vocab_size() const override { return vocab_size_; }

 private:
  TokenId designate(TokenId gold, std::size_t index, std::size_t position) const {
    std::uint64_t h = detail::splitmix64(seed_ ^ detail::splitmix64(
                                                     (static_cast<std::uint64_t>(index) << 20) ^
                                                     static_cast<std::uint64_t>(position)));
    double u = static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
    if (u >= epsilon_) return gold;
    // Err: pick a wrong token, skipping the boundary id and the gold token.
    std::uint64_t h2 = detail::splitmix64(h ^ 0xA5A5A5A5A5A5A5A5ULL);
    std::size_t candidates = vocab_size_ - (gold == kBoundaryId ? 1 : 2);
    if (candidates == 0) return gold;
    std::size_t pick = 1 + static_cast<std::size_t>(h2 % candidates);
    if (gold != kBoundaryId && pick >= static_cast<std::size_t>(gold)) ++pick;
    return static_cast<TokenId>(pick);
  }

  std::vector<Sentence> gold_;
  double epsilon_;
  std::uint64_t seed_;
  std::size_t vocab_size_;
};

// ---------------------------------------------------------------------------
// Interpolation and decoding
// ---------------------------------------------------------------------------

/// lambda * p_knn + (1 - lambda) * p_csc, elementwise.
inline TokenDistribution interpolate(const TokenDistribution& p_knn, const TokenDistribution& p_csc,
                                     double lambda) {
  if (p_knn.size() != p_csc.size()) {
    throw error(errc::dimension_mismatch,
                "distribution sizes " + std::to_string(p_knn.size()) + " vs " +
                    std::to_string(p_csc.size()));
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw error(errc::bad_hyperparam, "lambda must be in [0,1]");
  }
  TokenDistribution out(p_knn.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = lambda * p_knn[i] + (1.0 - lambda) * p_csc[i];
  }
  return out;
}

/// Argmax with ties broken by lowest token id.
inline TokenId argmax_token(const TokenDistribution& p) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] > p[best]) best = i;
  }
  return static_cast<TokenId>(best);
}

/// Ablation switches: no_rerank keeps raw distances in the softmax
/// ("- n-gram"), plain_key queries with the fused vector alone ("- info
/// key", requires a plain-keyed datastore), no_knn bypasses retrieval
/// entirely ("- kNN", bitwise the base model).
struct AblationSwitches {
  bool no_rerank = false;
  bool plain_key = false;
  bool no_knn = false;
};

struct RunStats {
  std::uint64_t positions = 0;
  std::uint64_t knn_positions = 0;
  std::uint64_t fallback_positions = 0;  // empty store or kNN disabled
  std::uint64_t changed_positions = 0;
};

namespace detail {

inline void check_key_mode(const Datastore& store, const AblationSwitches& switches) {
  KeyMode requested = switches.plain_key ? KeyMode::plain_hidden : KeyMode::general_info;
  if (!switches.no_knn && !store.empty() && store.key_mode() != requested) {
    throw error(errc::key_mode_mismatch,
                std::string("query mode ") + key_mode_name(requested) + " vs datastore mode " +
                    key_mode_name(store.key_mode()));
  }
}

inline Sentence correct_with_bundles(const Sentence& source,
                                     const std::vector<TokenDistribution>& base_dists,
                                     std::span<const FeatureBundle> bundles, const Datastore& store,
                                     const Hyperparams& hp, const AblationSwitches& switches,
                                     const SearchOptions& search_opts, RunStats* stats) {
  if (base_dists.size() != source.size()) {
    throw error(errc::length_mismatch, "base model output length mismatch");
  }
  const bool use_knn = !switches.no_knn && !store.empty() && hp.lambda > 0.0;
  const KeyMode mode = switches.plain_key ? KeyMode::plain_hidden : KeyMode::general_info;

  Sentence out;
  out.ids.reserve(source.size());
  for (std::size_t t = 0; t < source.size(); ++t) {
    TokenId emitted;
    if (!use_knn) {
      emitted = argmax_token(base_dists[t]);
      if (stats) ++stats->fallback_positions;
    } else {
      Key query = build_key(bundles, t, hp.sigma, mode);
      auto hits = search(store, query, static_cast<std::size_t>(hp.k), search_opts);
      std::vector<Neighbor> neighbors;
      if (switches.no_rerank) {
        neighbors = neighbors_without_rerank(hits);
      } else {
        auto g = input_ngram(source, t, hp.ngram);
        neighbors = rerank(hits, store, g, hp.weights);
      }
      auto p_knn = knn_distribution(neighbors, store, base_dists[t].size(), hp.temperature);
      auto p = interpolate(p_knn, base_dists[t], hp.lambda);
      emitted = argmax_token(p);
      if (stats) ++stats->knn_positions;
    }
    if (stats) {
      ++stats->positions;
      if (emitted != source.ids[t]) ++stats->changed_positions;
    }
    out.ids.push_back(emitted);
  }
  return out;
}

}  // namespace detail

/// Corrects one sentence position by position: build the query key, search,
/// rerank, form the neighbor distribution, interpolate with the base model,
/// and emit the argmax token. Every position is corrected from the original
/// source context. With an empty datastore (or kNN disabled) every position
/// falls back to the base-model argmax and the fallback is counted in stats.
inline Sentence correct_sentence(const Sentence& source, const BaseModel& base,
                                 const EncoderSuite& suite, const Datastore& store,
                                 const Hyperparams& hp, const AblationSwitches& switches = {},
                                 const SearchOptions& search_opts = {}, RunStats* stats = nullptr,
                                 std::size_t index = 0) {
  hp.validate();
  detail::check_key_mode(store, switches);
  auto base_dists = base.predict(source, index);
  const bool use_knn = !switches.no_knn && !store.empty() && hp.lambda > 0.0;
  std::vector<FeatureBundle> bundles;
  if (use_knn) bundles = suite.encode(source);
  return detail::correct_with_bundles(source, base_dists, bundles, store, hp, switches,
                                      search_opts, stats);
}

/// correct_sentence mapped over the inputs in order; deterministic, no
/// cross-sentence state.
inline std::vector<Sentence> correct_corpus(std::span<const Sentence> sources,
                                            const BaseModel& base, const EncoderSuite& suite,
                                            const Datastore& store, const Hyperparams& hp,
                                            const AblationSwitches& switches = {},
                                            const SearchOptions& search_opts = {},
                                            RunStats* stats = nullptr) {
  std::vector<Sentence> out;
  out.reserve(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    out.push_back(
        correct_sentence(sources[i], base, suite, store, hp, switches, search_opts, stats, i));
  }
  return out;
}

/// Sidecar variant: query features come from the per-sentence rows instead
/// of an encoder suite.
inline std::vector<Sentence> correct_corpus(std::span<const Sentence> sources,
                                            const BaseModel& base, const Sidecar& sidecar,
                                            const Datastore& store, const Hyperparams& hp,
                                            const AblationSwitches& switches = {},
                                            const SearchOptions& search_opts = {},
                                            RunStats* stats = nullptr) {
  hp.validate();
  detail::check_key_mode(store, switches);
  std::vector<Sentence> out;
  out.reserve(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    auto base_dists = base.predict(sources[i], i);
    const bool use_knn = !switches.no_knn && !store.empty() && hp.lambda > 0.0;
    std::vector<FeatureBundle> bundles;
    if (use_knn) bundles = sidecar.bundles_for(sources[i], i);
    out.push_back(detail::correct_with_bundles(sources[i], base_dists, bundles, store, hp,
                                               switches, search_opts, stats));
  }
  return out;
}

}  // namespace infoknn
