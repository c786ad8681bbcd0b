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
#include <cmath>
#include <span>
#include <vector>

#include "infoknn/common.hpp"
#include "infoknn/corpus.hpp"
#include "infoknn/datastore.hpp"

namespace infoknn {

/// A retrieved entry with its raw distance, n-gram overlap score, and
/// reranked distance D' = (1 - alpha) * D. With the shipped position gains
/// a full match gives alpha > 1, so D' can go negative; the softmax
/// normalization absorbs that, and no clamping is applied.
struct Neighbor {
  std::size_t entry = 0;
  double raw_distance = 0.0;
  double overlap = 0.0;
  double reranked_distance = 0.0;
};

/// Window of n source token ids around x_t, `<b>`-padded at the edges.
inline std::vector<TokenId> input_ngram(const Sentence& source, std::size_t t, int n) {
  return padded_window(source, t, n);
}

/// Position-weighted n-gram overlap: sum of w_i over positions where the
/// value and input agree, divided by n. Padding compares like any token;
/// `<b>` only ever equals `<b>`.
inline double overlap_alpha(std::span<const TokenId> value, std::span<const TokenId> input,
                            std::span<const double> weights) {
  if (value.size() != input.size() || value.size() != weights.size()) {
    throw error(errc::length_mismatch,
                "value/input/weights lengths " + std::to_string(value.size()) + "/" +
                    std::to_string(input.size()) + "/" + std::to_string(weights.size()));
  }
  double gain = 0.0;
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (value[i] == input[i]) gain += weights[i];
  }
  return gain / static_cast<double>(value.size());
}

/// Annotates search hits with overlap scores and reranked distances, then
/// re-sorts ascending by D', ties by entry index.
inline std::vector<Neighbor> rerank(std::span<const SearchHit> hits, const Datastore& store,
                                    std::span<const TokenId> input,
                                    std::span<const double> weights) {
  std::vector<Neighbor> out;
  out.reserve(hits.size());
  for (const auto& hit : hits) {
    double alpha = overlap_alpha(store.value(hit.index), input, weights);
    out.push_back(Neighbor{hit.index, hit.distance, alpha, (1.0 - alpha) * hit.distance});
  }
  std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.reranked_distance != b.reranked_distance) {
      return a.reranked_distance < b.reranked_distance;
    }
    return a.entry < b.entry;
  });
  return out;
}

/// Passthrough for the "- n-gram" ablation: neighbors keep their raw
/// distances (D' = D, overlap reported as 0) and raw-distance order.
inline std::vector<Neighbor> neighbors_without_rerank(std::span<const SearchHit> hits) {
  std::vector<Neighbor> out;
  out.reserve(hits.size());
  for (const auto& hit : hits) {
    out.push_back(Neighbor{hit.index, hit.distance, 0.0, hit.distance});
  }
  return out;
}

/// Accumulates exp(-D'/T) onto each neighbor's value-center token and
/// normalizes. Shifted by the minimum D' before exponentiation so extreme
/// temperatures stay finite; the normalized result is unchanged.
inline std::vector<double> knn_distribution(std::span<const Neighbor> neighbors,
                                            const Datastore& store, std::size_t vocab_size,
                                            double temperature) {
  if (neighbors.empty()) {
    throw error(errc::empty_neighbors, "cannot form a distribution from zero neighbors");
  }
  if (!(temperature > 0.0)) {
    throw error(errc::bad_hyperparam, "temperature must be > 0");
  }
  double min_d = neighbors[0].reranked_distance;
  for (const auto& nb : neighbors) {
    min_d = std::min(min_d, nb.reranked_distance);
  }
  std::vector<double> p(vocab_size, 0.0);
  double total = 0.0;
  for (const auto& nb : neighbors) {
    TokenId center = store.value_center(nb.entry);
    double mass = std::exp(-(nb.reranked_distance - min_d) / temperature);
    p[static_cast<std::size_t>(center)] += mass;
    total += mass;
  }
  for (double& x : p) x /= total;
  return p;
}

}  // namespace infoknn
