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

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "infoknn/common.hpp"
#include "infoknn/corpus.hpp"
#include "infoknn/vocab.hpp"

namespace infoknn {

/// Per-token phonetic, graphic, and fused feature vectors.
struct FeatureBundle {
  std::vector<float> ph;
  std::vector<float> mo;
  std::vector<float> fused;

  bool operator==(const FeatureBundle&) const = default;
};

struct EncoderDims {
  std::uint32_t ph = 0;
  std::uint32_t mo = 0;
  std::uint32_t fused = 0;

  std::uint32_t key_dim() const { return ph + mo + fused; }
  bool operator==(const EncoderDims&) const = default;
};

/// How retrieval keys are assembled. `general_info` concatenates the
/// phonetic, graphic, and Gaussian-weighted contextual vectors;
/// `plain_hidden` uses the token's fused vector alone (the "- info key"
/// ablation).
enum class KeyMode : std::uint8_t { general_info, plain_hidden };

inline const char* key_mode_name(KeyMode m) {
  return m == KeyMode::general_info ? "general-info" : "plain-hidden";
}

using Key = std::vector<float>;

/// Produces one FeatureBundle per token. Implementations are deterministic
/// and hold no mutable state, so concurrent encode calls are safe.
class EncoderSuite {
 public:
  virtual ~EncoderSuite() = default;
  virtual std::vector<FeatureBundle> encode(const Sentence& sentence) const = 0;
  virtual EncoderDims dims() const = 0;
};

// ---------------------------------------------------------------------------
// Gaussian context weighting
// ---------------------------------------------------------------------------

/// Gaussian weights centered at position t, renormalized to sum 1 over the
/// in-sentence positions. An optional truncation radius zeroes weights
/// beyond |i - t| > radius and renormalizes the remaining window; the mass
/// beyond 4*sigma is below 1e-4, so truncation bounds cost on long inputs.
inline std::vector<double> gaussian_weights(std::size_t t, std::size_t length, double sigma,
                                            std::optional<std::size_t> radius = std::nullopt) {
  if (t >= length) {
    throw error(errc::position_out_of_range,
                "position " + std::to_string(t) + " in sentence of length " +
                    std::to_string(length));
  }
  if (!(sigma > 0.0)) {
    throw error(errc::bad_hyperparam, "sigma must be > 0");
  }
  std::vector<double> w(length, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < length; ++i) {
    double offset = static_cast<double>(i) - static_cast<double>(t);
    if (radius && std::abs(offset) > static_cast<double>(*radius)) continue;
    double z = offset / sigma;
    w[i] = std::exp(-0.5 * z * z);  // unnormalized pdf; the constant cancels
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

inline std::size_t default_truncation_radius(double sigma) {
  return static_cast<std::size_t>(std::ceil(4.0 * sigma));
}

/// Gaussian-weighted sum of the fused vectors around position t.
inline std::vector<double> contextual_vector(std::span<const FeatureBundle> bundles, std::size_t t,
                                             double sigma,
                                             std::optional<std::size_t> radius = std::nullopt) {
  if (bundles.empty()) {
    throw error(errc::position_out_of_range, "empty bundle list");
  }
  const std::size_t dim = bundles[0].fused.size();
  for (const auto& b : bundles) {
    if (b.fused.size() != dim) {
      throw error(errc::dimension_mismatch, "fused dimensions differ across bundles");
    }
  }
  auto w = gaussian_weights(t, bundles.size(), sigma, radius);
  std::vector<double> c(dim, 0.0);
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    if (w[i] == 0.0) continue;
    for (std::size_t d = 0; d < dim; ++d) {
      c[d] += w[i] * static_cast<double>(bundles[i].fused[d]);
    }
  }
  return c;
}

/// Assembles the retrieval key for position t. General-info keys are
/// [ph(x_t); mo(x_t); c(x_t)]; plain keys are the fused vector alone.
inline Key build_key(std::span<const FeatureBundle> bundles, std::size_t t, double sigma,
                     KeyMode mode = KeyMode::general_info,
                     std::optional<std::size_t> radius = std::nullopt) {
  if (t >= bundles.size()) {
    throw error(errc::position_out_of_range,
                "position " + std::to_string(t) + " in sentence of length " +
                    std::to_string(bundles.size()));
  }
  Key key;
  if (mode == KeyMode::plain_hidden) {
    key = bundles[t].fused;
    return key;
  }
  auto c = contextual_vector(bundles, t, sigma, radius);
  key.reserve(bundles[t].ph.size() + bundles[t].mo.size() + c.size());
  key.insert(key.end(), bundles[t].ph.begin(), bundles[t].ph.end());
  key.insert(key.end(), bundles[t].mo.begin(), bundles[t].mo.end());
  for (double v : c) key.push_back(static_cast<float>(v));
  return key;
}

inline EncoderDims key_dims_for_mode(const EncoderDims& dims, KeyMode mode) {
  if (mode == KeyMode::plain_hidden) {
    return EncoderDims{0, 0, dims.fused};
  }
  return dims;
}

// ---------------------------------------------------------------------------
// Seeded hash embeddings
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace detail

/// Maps a string to a reproducible pseudo-random unit vector. Pure integer
/// mixing plus one sqrt, so results are identical across platforms.
inline std::vector<float> hash_embedding(std::uint64_t seed, std::string_view space,
                                         std::string_view payload, std::size_t dim) {
  std::uint64_t state = detail::splitmix64(seed ^ detail::fnv1a64(space));
  state = detail::splitmix64(state ^ detail::fnv1a64(payload));
  std::vector<double> v(dim);
  double norm_sq = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    state = detail::splitmix64(state);
    // top 53 bits -> uniform double in [-1, 1)
    double u = static_cast<double>(state >> 11) * (1.0 / 4503599627370496.0) - 1.0;
    v[d] = u;
    norm_sq += u * u;
  }
  double inv = 1.0 / std::sqrt(norm_sq);
  std::vector<float> out(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    out[d] = static_cast<float>(v[d] * inv);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Toy encoder suite
// ---------------------------------------------------------------------------

/// Resource table: `token<TAB>code` lines. Tokens outside the vocabulary are
/// ignored so a table can cover more characters than a given run uses.
inline std::unordered_map<TokenId, std::string> load_code_table(const std::string& path,
                                                                const Vocab& vocab) {
  std::unordered_map<TokenId, std::string> table;
  auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw error(errc::malformed_resource,
                  path + " line " + std::to_string(i + 1) + ": expected token<TAB>code");
    }
    std::string tok = line.substr(0, tab);
    if (!vocab.contains(tok)) continue;
    auto [it, inserted] = table.emplace(vocab.id(tok), line.substr(tab + 1));
    if (!inserted) {
      throw error(errc::malformed_resource,
                  path + " line " + std::to_string(i + 1) + ": duplicate token '" + tok + "'");
    }
  }
  return table;
}

/// Desk-scale stand-in for pretrained phonetic/graphic encoders. Embeds the
/// phonetic code string (shared across homophones), the component string,
/// and the token id; fused is the mean of the three. All features are fixed
/// per vocabulary id, so encode is a table lookup and context enters keys
/// only through the Gaussian mixing above.
class ToyEncoder final : public EncoderSuite {
 public:
  ToyEncoder(const Vocab& vocab, const std::unordered_map<TokenId, std::string>& phonetic,
             const std::unordered_map<TokenId, std::string>& graphic, std::uint64_t seed,
             std::size_t dim = 32)
      : dims_{static_cast<std::uint32_t>(dim), static_cast<std::uint32_t>(dim),
              static_cast<std::uint32_t>(dim)} {
    per_token_.reserve(vocab.size());
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      TokenId id = static_cast<TokenId>(i);
      FeatureBundle b;
      auto ph_it = phonetic.find(id);
      b.ph = ph_it != phonetic.end()
                 ? hash_embedding(seed, "ph", ph_it->second, dim)
                 : hash_embedding(seed, "ph-fallback", vocab.token(id), dim);
      auto mo_it = graphic.find(id);
      b.mo = mo_it != graphic.end()
                 ? hash_embedding(seed, "mo", mo_it->second, dim)
                 : hash_embedding(seed, "mo-fallback", vocab.token(id), dim);
      auto sem = hash_embedding(seed, "id", std::to_string(id), dim);
      b.fused.resize(dim);
      for (std::size_t d = 0; d < dim; ++d) {
        b.fused[d] = (b.ph[d] + b.mo[d] + sem[d]) / 3.0f;
      }
      per_token_.push_back(std::move(b));
    }
  }

  /// Convenience constructor reading the table files.
  ToyEncoder(const Vocab& vocab, const std::string& phonetic_path, const std::string& graphic_path,
             std::uint64_t seed, std::size_t dim = 32)
      : ToyEncoder(vocab, load_code_table(phonetic_path, vocab),
                   load_code_table(graphic_path, vocab), seed, dim) {}

  std::vector<FeatureBundle> encode(const Sentence& sentence) const override {
    std::vector<FeatureBundle> out;
    out.reserve(sentence.size());
    for (TokenId id : sentence.ids) {
      if (id < 0 || static_cast<std::size_t>(id) >= per_token_.size()) {
        throw error(errc::out_of_vocabulary, "token id " + std::to_string(id));
      }
      out.push_back(per_token_[static_cast<std::size_t>(id)]);
    }
    return out;
  }

  EncoderDims dims() const override { return dims_; }

 private:
  EncoderDims dims_;
  std::vector<FeatureBundle> per_token_;
};

/// Builds a toy encoder with empty tables: every token takes the hash
/// fallback path. Useful when no resource files are available.
inline ToyEncoder make_hash_encoder(const Vocab& vocab, std::uint64_t seed, std::size_t dim = 32) {
  return ToyEncoder(vocab, std::unordered_map<TokenId, std::string>{},
                    std::unordered_map<TokenId, std::string>{}, seed, dim);
}

}  // namespace infoknn
