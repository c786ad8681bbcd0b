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

#include <fstream>
#include <string>
#include <vector>

#include "infoknn/common.hpp"
#include "infoknn/vocab.hpp"

namespace infoknn {

/// One sentence as vocabulary ids, one id per Unicode code point.
struct Sentence {
  std::vector<TokenId> ids;

  std::size_t size() const { return ids.size(); }
  TokenId operator[](std::size_t i) const { return ids[i]; }
  bool operator==(const Sentence&) const = default;
};

/// Incorrect/correct sentence pair. Spelling correction is length-preserving
/// substitution, so both sides always have the same length.
struct ParallelPair {
  Sentence source;
  Sentence target;
};

inline Sentence tokenize(std::string_view text, const Vocab& vocab) {
  Sentence s;
  for (const auto& cp : split_code_points(text)) {
    s.ids.push_back(vocab.id(cp));
  }
  return s;
}

inline std::string detokenize(const Sentence& s, const Vocab& vocab) {
  std::string out;
  for (TokenId id : s.ids) {
    out += vocab.token(id);
  }
  return out;
}

/// Loads a parallel corpus: one `source<TAB>target` pair per line, equal
/// code-point lengths, every token in the vocabulary.
inline std::vector<ParallelPair> load_corpus(const std::string& path, const Vocab& vocab) {
  std::vector<ParallelPair> pairs;
  auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw error(errc::length_mismatch,
                  "line " + std::to_string(i + 1) + ": missing <TAB> separator");
    }
    ParallelPair pair;
    try {
      pair.source = tokenize(line.substr(0, tab), vocab);
      pair.target = tokenize(line.substr(tab + 1), vocab);
    } catch (const error& e) {
      throw error(e.code(), "line " + std::to_string(i + 1) + ": " + e.what());
    }
    if (pair.source.size() != pair.target.size()) {
      throw error(errc::length_mismatch,
                  "line " + std::to_string(i + 1) + ": source has " +
                      std::to_string(pair.source.size()) + " tokens, target has " +
                      std::to_string(pair.target.size()));
    }
    if (pair.source.size() == 0) {
      throw error(errc::empty_sentence, "line " + std::to_string(i + 1) + ": empty pair");
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

/// Loads raw sentences, one per line. Used for datastore expansion from
/// correct-only text and for correction inputs.
inline std::vector<Sentence> load_sentences(const std::string& path, const Vocab& vocab) {
  std::vector<Sentence> out;
  auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) {
      if (i + 1 == lines.size()) break;  // tolerate one trailing blank line
      throw error(errc::empty_sentence, "line " + std::to_string(i + 1) + " is empty");
    }
    try {
      out.push_back(tokenize(lines[i], vocab));
    } catch (const error& e) {
      throw error(e.code(), "line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

inline void write_sentences(std::ostream& out, const std::vector<Sentence>& sentences,
                            const Vocab& vocab) {
  for (const auto& s : sentences) {
    out << detokenize(s, vocab) << "\n";
  }
}

inline void write_corpus(std::ostream& out, const std::vector<ParallelPair>& pairs,
                         const Vocab& vocab) {
  for (const auto& p : pairs) {
    out << detokenize(p.source, vocab) << "\t" << detokenize(p.target, vocab) << "\n";
  }
}

/// Window of n token ids centered on position t, `<b>`-padded beyond the
/// sentence edges. Shared by value n-grams (target side) and input n-grams
/// (source side).
inline std::vector<TokenId> padded_window(const Sentence& s, std::size_t t, int n) {
  if (t >= s.size()) {
    throw error(errc::position_out_of_range,
                "position " + std::to_string(t) + " in sentence of length " +
                    std::to_string(s.size()));
  }
  if (n < 1 || n % 2 == 0) {
    throw error(errc::even_ngram, "window width must be odd, got " + std::to_string(n));
  }
  std::vector<TokenId> out(static_cast<std::size_t>(n), kBoundaryId);
  const int half = n / 2;
  for (int offset = -half; offset <= half; ++offset) {
    long long pos = static_cast<long long>(t) + offset;
    if (pos >= 0 && pos < static_cast<long long>(s.size())) {
      out[static_cast<std::size_t>(offset + half)] = s.ids[static_cast<std::size_t>(pos)];
    }
  }
  return out;
}

}  // namespace infoknn
