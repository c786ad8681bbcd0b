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
#include <cstdint>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "infoknn/common.hpp"
#include "infoknn/config.hpp"
#include "infoknn/corpus.hpp"
#include "infoknn/encoder.hpp"
#include "infoknn/io.hpp"

namespace infoknn {

struct Provenance {
  std::uint32_t sentence = 0;
  std::uint32_t token = 0;
  bool operator==(const Provenance&) const = default;
};

/// Immutable after build: keys from the source sentences mapped to n-gram
/// values from the target sentences, in corpus order. Storage is
/// struct-of-arrays so the scan path streams keys contiguously.
class Datastore {
 public:
  static constexpr std::uint16_t kFormatVersion = 1;

  Datastore() = default;
  Datastore(EncoderDims dims, int ngram) : dims_(dims), ngram_(ngram) {
    if (ngram < 1 || ngram % 2 == 0) {
      throw error(errc::even_ngram, "ngram must be odd, got " + std::to_string(ngram));
    }
  }

  const EncoderDims& dims() const { return dims_; }
  std::size_t key_dim() const { return dims_.key_dim(); }
  int ngram() const { return ngram_; }
  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }

  /// Plain-hidden stores persist as d_ph = d_mo = 0; the mode is derivable
  /// from the dims, so the byte format carries no extra field.
  KeyMode key_mode() const {
    return (dims_.ph == 0 && dims_.mo == 0) ? KeyMode::plain_hidden : KeyMode::general_info;
  }

  std::span<const float> key(std::size_t i) const {
    return {keys_.data() + i * key_dim(), key_dim()};
  }
  std::span<const TokenId> value(std::size_t i) const {
    return {values_.data() + i * static_cast<std::size_t>(ngram_),
            static_cast<std::size_t>(ngram_)};
  }
  TokenId value_center(std::size_t i) const {
    return values_[i * static_cast<std::size_t>(ngram_) + static_cast<std::size_t>(ngram_ / 2)];
  }
  TokenId source_center(std::size_t i) const { return source_centers_[i]; }
  const Provenance& provenance(std::size_t i) const { return provenance_[i]; }

  void append(std::span<const float> key, std::span<const TokenId> value, TokenId source_center,
              Provenance prov) {
    if (key.size() != key_dim()) {
      throw error(errc::dimension_mismatch,
                  "key has " + std::to_string(key.size()) + " dims, store expects " +
                      std::to_string(key_dim()));
    }
    if (value.size() != static_cast<std::size_t>(ngram_)) {
      throw error(errc::dimension_mismatch,
                  "value has " + std::to_string(value.size()) + " ids, store expects " +
                      std::to_string(ngram_));
    }
    keys_.insert(keys_.end(), key.begin(), key.end());
    values_.insert(values_.end(), value.begin(), value.end());
    source_centers_.push_back(source_center);
    provenance_.push_back(prov);
    ++count_;
  }

  /// Highest provenance sentence index present plus one; raw-text extension
  /// continues sentence numbering from here.
  std::uint32_t next_sentence_index() const {
    std::uint32_t next = 0;
    for (const auto& p : provenance_) {
      next = std::max(next, p.sentence + 1);
    }
    return next;
  }

  bool operator==(const Datastore&) const = default;

 private:
  friend std::vector<unsigned char> serialize(const Datastore& store);

  EncoderDims dims_;
  int ngram_ = 3;
  std::size_t count_ = 0;
  std::vector<float> keys_;
  std::vector<TokenId> values_;
  std::vector<TokenId> source_centers_;
  std::vector<Provenance> provenance_;
};

// ---------------------------------------------------------------------------
// Build
// ---------------------------------------------------------------------------

namespace detail {

template <typename BundlesForSentence>
Datastore build_impl(std::span<const ParallelPair> pairs, const EncoderDims& encoder_dims,
                     BundlesForSentence&& bundles_for, const Hyperparams& hp, KeyMode mode) {
  hp.validate();
  Datastore store(key_dims_for_mode(encoder_dims, mode), hp.ngram);
  for (std::size_t si = 0; si < pairs.size(); ++si) {
    const auto& pair = pairs[si];
    std::vector<FeatureBundle> bundles = bundles_for(pair.source, si);
    if (bundles.size() != pair.source.size()) {
      throw error(errc::dimension_mismatch,
                  "encoder returned " + std::to_string(bundles.size()) + " bundles for sentence " +
                      std::to_string(si) + " of length " + std::to_string(pair.source.size()));
    }
    for (std::size_t t = 0; t < pair.target.size(); ++t) {
      Key key = build_key(bundles, t, hp.sigma, mode);
      auto value = padded_window(pair.target, t, hp.ngram);
      store.append(key, value, pair.source.ids[t],
                   Provenance{static_cast<std::uint32_t>(si), static_cast<std::uint32_t>(t)});
    }
  }
  return store;
}

}  // namespace detail

/// Builds the datastore from parallel pairs: one entry per target token,
/// keys from the source side, values from the target side.
inline Datastore build_datastore(std::span<const ParallelPair> pairs, const EncoderSuite& suite,
                                 const Hyperparams& hp, KeyMode mode = KeyMode::general_info) {
  return detail::build_impl(
      pairs, suite.dims(),
      [&suite](const Sentence& s, std::size_t) { return suite.encode(s); }, hp, mode);
}

/// Appends entries for raw (correct-only) sentences, treating each sentence
/// as its own target. Existing entries are untouched; provenance sentence
/// indices continue after the largest already present.
inline void extend_with_raw(Datastore& store, std::span<const Sentence> sentences,
                            const EncoderSuite& suite, const Hyperparams& hp) {
  hp.validate();
  KeyMode mode = store.key_mode();
  if (key_dims_for_mode(suite.dims(), mode) != store.dims()) {
    throw error(errc::dimension_mismatch, "encoder dims do not match datastore header");
  }
  if (hp.ngram != store.ngram()) {
    throw error(errc::dimension_mismatch,
                "config ngram " + std::to_string(hp.ngram) + " vs datastore ngram " +
                    std::to_string(store.ngram()));
  }
  std::uint32_t base = store.next_sentence_index();
  for (std::size_t si = 0; si < sentences.size(); ++si) {
    const Sentence& s = sentences[si];
    auto bundles = suite.encode(s);
    for (std::size_t t = 0; t < s.size(); ++t) {
      Key key = build_key(bundles, t, hp.sigma, mode);
      auto value = padded_window(s, t, hp.ngram);
      store.append(key, value, s.ids[t],
                   Provenance{base + static_cast<std::uint32_t>(si), static_cast<std::uint32_t>(t)});
    }
  }
}

// ---------------------------------------------------------------------------
// Exact search
// ---------------------------------------------------------------------------

struct SearchHit {
  std::size_t index = 0;
  double distance = 0.0;
  bool operator==(const SearchHit&) const = default;
};

enum class DistanceKind : std::uint8_t { l2, squared_l2 };

struct SearchOptions {
  DistanceKind kind = DistanceKind::l2;
  unsigned threads = 0;  // 0 = hardware concurrency
};

namespace detail {

inline double squared_l2(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    double diff = static_cast<double>(a[d]) - static_cast<double>(b[d]);
    acc += diff * diff;
  }
  return acc;
}

inline bool hit_less(const SearchHit& a, const SearchHit& b) {
  if (a.distance != b.distance) return a.distance < b.distance;
  return a.index < b.index;
}

// Exact top-k over [begin, end): bounded insertion into a sorted buffer.
// Per-entry distances are independent of the partitioning, so chunked scans
// merge to the same result as a sequential scan.
inline std::vector<SearchHit> scan_range(const Datastore& store, std::span<const float> query,
                                         std::size_t k, DistanceKind kind, std::size_t begin,
                                         std::size_t end) {
  std::vector<SearchHit> top;
  top.reserve(k + 1);
  for (std::size_t i = begin; i < end; ++i) {
    double d2 = squared_l2(store.key(i), query);
    double dist = kind == DistanceKind::l2 ? std::sqrt(d2) : d2;
    SearchHit hit{i, dist};
    if (top.size() == k && !hit_less(hit, top.back())) continue;
    top.insert(std::lower_bound(top.begin(), top.end(), hit, hit_less), hit);
    if (top.size() > k) top.pop_back();
  }
  return top;
}

}  // namespace detail

/// The min(k, size) entries nearest to the query, ascending by distance,
/// ties broken by ascending entry index. Exact: a flat scan, optionally
/// partitioned across threads with a deterministic merge.
inline std::vector<SearchHit> search(const Datastore& store, std::span<const float> query,
                                     std::size_t k, const SearchOptions& options = {}) {
  if (query.size() != store.key_dim()) {
    throw error(errc::dimension_mismatch,
                "query has " + std::to_string(query.size()) + " dims, store has " +
                    std::to_string(store.key_dim()));
  }
  if (k == 0 || store.empty()) return {};
  k = std::min(k, store.size());

  unsigned threads = options.threads != 0 ? options.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, 64));
  // Not worth spinning up workers below ~64k distance evaluations.
  if (static_cast<std::size_t>(threads) > 1 && store.size() * store.key_dim() < 65536) {
    threads = 1;
  }
  if (threads == 1) {
    return detail::scan_range(store, query, k, options.kind, 0, store.size());
  }

  std::size_t chunk = (store.size() + threads - 1) / threads;
  std::vector<std::vector<SearchHit>> partial(threads);
  std::vector<std::thread> workers;
  for (unsigned w = 0; w < threads; ++w) {
    std::size_t begin = std::min(store.size(), static_cast<std::size_t>(w) * chunk);
    std::size_t end = std::min(store.size(), begin + chunk);
    workers.emplace_back([&, w, begin, end] {
      partial[w] = detail::scan_range(store, query, k, options.kind, begin, end);
    });
  }
  for (auto& t : workers) t.join();

  std::vector<SearchHit> merged;
  for (auto& p : partial) {
    merged.insert(merged.end(), p.begin(), p.end());
  }
  std::sort(merged.begin(), merged.end(), detail::hit_less);
  if (merged.size() > k) merged.resize(k);
  return merged;
}

// ---------------------------------------------------------------------------
// Persistence. Layout (little-endian): magic "IKDS", u16 version, u32 d_ph,
// u32 d_mo, u32 d_f, u32 n, u64 count, then per entry: key (f32 x dim),
// value ids (i32 x n), source center (i32), provenance (u32 x 2). The file
// ends with a CRC-32 over every preceding byte, magic included.
// ---------------------------------------------------------------------------

inline std::vector<unsigned char> serialize(const Datastore& store) {
  ByteWriter w;
  w.raw("IKDS", 4);
  w.u16(Datastore::kFormatVersion);
  w.u32(store.dims().ph);
  w.u32(store.dims().mo);
  w.u32(store.dims().fused);
  w.u32(static_cast<std::uint32_t>(store.ngram()));
  w.u64(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    for (float f : store.key(i)) w.f32(f);
    for (TokenId id : store.value(i)) w.i32(id);
    w.i32(store.source_center(i));
    const auto& prov = store.provenance(i);
    w.u32(prov.sentence);
    w.u32(prov.token);
  }
  std::uint32_t crc = crc32(w.bytes().data(), w.bytes().size());
  ByteWriter trailer;
  trailer.u32(crc);
  std::vector<unsigned char> out = w.bytes();
  out.insert(out.end(), trailer.bytes().begin(), trailer.bytes().end());
  return out;
}

inline void save_datastore(const Datastore& store, const std::string& path) {
  auto bytes = serialize(store);
  write_file_atomic(path, bytes.data(), bytes.size());
}

inline Datastore load_datastore(const std::string& path) {
  std::string bytes = read_file_bytes(path);
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  constexpr std::size_t kHeaderBytes = 4 + 2 + 4 * 4 + 8;

  if (bytes.size() < 4 || std::memcmp(data, "IKDS", 4) != 0) {
    throw error(errc::bad_magic, path + " is not a datastore file");
  }
  if (bytes.size() < kHeaderBytes) {
    throw error(errc::truncated,
                path + " truncated inside the header at byte offset " +
                    std::to_string(bytes.size()));
  }

  ByteReader r(data, bytes.size());
  char magic[4];
  r.raw(magic, 4);
  std::uint16_t version = r.u16();
  if (version != Datastore::kFormatVersion) {
    throw error(errc::version_mismatch,
                path + " has format version " + std::to_string(version) + ", expected " +
                    std::to_string(Datastore::kFormatVersion));
  }
  EncoderDims dims;
  dims.ph = r.u32();
  dims.mo = r.u32();
  dims.fused = r.u32();
  std::uint32_t ngram = r.u32();
  std::uint64_t count = r.u64();

  const std::size_t entry_bytes =
      static_cast<std::size_t>(dims.key_dim()) * 4 + static_cast<std::size_t>(ngram) * 4 + 4 + 8;
  const std::size_t expected = kHeaderBytes + count * entry_bytes + 4;
  if (bytes.size() < expected) {
    throw error(errc::truncated, path + " truncated at byte offset " +
                                     std::to_string(bytes.size()) + " (expected " +
                                     std::to_string(expected) + " bytes)");
  }
  if (bytes.size() > expected) {
    throw error(errc::truncated,
                path + ": " + std::to_string(bytes.size() - expected) + " trailing bytes");
  }

  std::uint32_t stored_crc = 0;
  for (int i = 0; i < 4; ++i) {
    stored_crc |= static_cast<std::uint32_t>(data[bytes.size() - 4 + i]) << (8 * i);
  }
  if (stored_crc != crc32(data, bytes.size() - 4)) {
    throw error(errc::checksum_mismatch, path + ": body CRC-32 does not match trailer");
  }

  Datastore store(dims, static_cast<int>(ngram));
  std::vector<float> key(dims.key_dim());
  std::vector<TokenId> value(ngram);
  for (std::uint64_t i = 0; i < count; ++i) {
    for (auto& f : key) f = r.f32();
    for (auto& id : value) id = r.i32();
    TokenId source_center = r.i32();
    Provenance prov;
    prov.sentence = r.u32();
    prov.token = r.u32();
    store.append(key, value, source_center, prov);
  }
  return store;
}

// ---------------------------------------------------------------------------
// Embedding sidecar: precomputed [ph | mo | fused] rows per sentence, used
// in place of a toy suite when real encoder features are available. Layout
// (little-endian): magic "IKNN", u16 version, u32 d_ph/d_mo/d_f, u32
// sentence count, then per sentence a u32 token count and token-major f32
// rows.
// ---------------------------------------------------------------------------

struct Sidecar {
  static constexpr std::uint16_t kFormatVersion = 1;

  EncoderDims dims;
  std::vector<std::vector<FeatureBundle>> sentences;

  std::vector<FeatureBundle> bundles_for(const Sentence& s, std::size_t index) const {
    if (index >= sentences.size()) {
      throw error(errc::sidecar_mismatch,
                  "sentence index " + std::to_string(index) + " but sidecar has " +
                      std::to_string(sentences.size()) + " sentences");
    }
    if (sentences[index].size() != s.size()) {
      throw error(errc::sidecar_mismatch,
                  "sentence " + std::to_string(index) + " has " + std::to_string(s.size()) +
                      " tokens but sidecar row has " + std::to_string(sentences[index].size()));
    }
    return sentences[index];
  }
};

inline std::vector<unsigned char> serialize(const Sidecar& sc) {
  ByteWriter w;
  w.raw("IKNN", 4);
  w.u16(Sidecar::kFormatVersion);
  w.u32(sc.dims.ph);
  w.u32(sc.dims.mo);
  w.u32(sc.dims.fused);
  w.u32(static_cast<std::uint32_t>(sc.sentences.size()));
  for (const auto& sentence : sc.sentences) {
    w.u32(static_cast<std::uint32_t>(sentence.size()));
    for (const auto& b : sentence) {
      for (float f : b.ph) w.f32(f);
      for (float f : b.mo) w.f32(f);
      for (float f : b.fused) w.f32(f);
    }
  }
  return w.bytes();
}

inline void save_sidecar(const Sidecar& sc, const std::string& path) {
  auto bytes = serialize(sc);
  write_file_atomic(path, bytes.data(), bytes.size());
}

inline Sidecar load_sidecar(const std::string& path) {
  std::string bytes = read_file_bytes(path);
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 4 || std::memcmp(data, "IKNN", 4) != 0) {
    throw error(errc::bad_magic, path + " is not a sidecar file");
  }
  ByteReader r(data, bytes.size());
  char magic[4];
  r.raw(magic, 4);
  std::uint16_t version = r.u16();
  if (version != Sidecar::kFormatVersion) {
    throw error(errc::version_mismatch, path + " has sidecar version " + std::to_string(version));
  }
  Sidecar sc;
  sc.dims.ph = r.u32();
  sc.dims.mo = r.u32();
  sc.dims.fused = r.u32();
  std::uint32_t n_sentences = r.u32();
  sc.sentences.resize(n_sentences);
  for (auto& sentence : sc.sentences) {
    std::uint32_t n_tokens = r.u32();
    sentence.resize(n_tokens);
    for (auto& b : sentence) {
      b.ph.resize(sc.dims.ph);
      b.mo.resize(sc.dims.mo);
      b.fused.resize(sc.dims.fused);
      for (auto& f : b.ph) f = r.f32();
      for (auto& f : b.mo) f = r.f32();
      for (auto& f : b.fused) f = r.f32();
    }
  }
  if (r.remaining() != 0) {
    throw error(errc::truncated,
                path + ": " + std::to_string(r.remaining()) + " unexpected trailing bytes");
  }
  return sc;
}

/// Builds the datastore with sidecar features aligned 1:1 with the pairs.
inline Datastore build_datastore(std::span<const ParallelPair> pairs, const Sidecar& sidecar,
                                 const Hyperparams& hp, KeyMode mode = KeyMode::general_info) {
  if (sidecar.sentences.size() < pairs.size()) {
    throw error(errc::sidecar_mismatch,
                "corpus has " + std::to_string(pairs.size()) + " sentences, sidecar has " +
                    std::to_string(sidecar.sentences.size()));
  }
  return detail::build_impl(
      pairs, sidecar.dims,
      [&sidecar](const Sentence& s, std::size_t si) { return sidecar.bundles_for(s, si); }, hp,
      mode);
}

/// Raw-text extension with sidecar features; `row_offset` is the index of
/// the first sidecar row belonging to the raw sentences.
inline void extend_with_raw(Datastore& store, std::span<const Sentence> sentences,
                            const Sidecar& sidecar, std::size_t row_offset,
                            const Hyperparams& hp) {
  hp.validate();
  KeyMode mode = store.key_mode();
  if (key_dims_for_mode(sidecar.dims, mode) != store.dims()) {
    throw error(errc::dimension_mismatch, "sidecar dims do not match datastore header");
  }
  std::uint32_t base = store.next_sentence_index();
  for (std::size_t si = 0; si < sentences.size(); ++si) {
    const Sentence& s = sentences[si];
    auto bundles = sidecar.bundles_for(s, row_offset + si);
    for (std::size_t t = 0; t < s.size(); ++t) {
      Key key = build_key(bundles, t, hp.sigma, mode);
      auto value = padded_window(s, t, hp.ngram);
      store.append(key, value, s.ids[t],
                   Provenance{base + static_cast<std::uint32_t>(si), static_cast<std::uint32_t>(t)});
    }
  }
}

}  // namespace infoknn
