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

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "infoknn/common.hpp"

namespace infoknn {

/// Ordered token table. Id 0 is always the boundary token `<b>`, used only
/// for n-gram padding at sentence edges; every other entry is a single
/// Unicode code point.
class Vocab {
 public:
  Vocab() = default;

  explicit Vocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    if (tokens_.empty()) {
      throw error(errc::empty_vocab, "vocabulary has no tokens");
    }
    if (tokens_[0] != kBoundaryToken) {
      throw error(errc::missing_boundary_token,
                  "line 0 must be '<b>', got '" + tokens_[0] + "'");
    }
    ids_.reserve(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (i > 0 && count_code_points(tokens_[i]) != 1) {
        throw error(errc::malformed_vocab,
                    "token at line " + std::to_string(i) + " is not a single code point");
      }
      auto [it, inserted] = ids_.emplace(tokens_[i], static_cast<TokenId>(i));
      if (!inserted) {
        throw error(errc::duplicate_token,
                    "token '" + tokens_[i] + "' repeated at line " + std::to_string(i));
      }
    }
  }

  std::size_t size() const { return tokens_.size(); }

  const std::string& token(TokenId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
      throw error(errc::out_of_vocabulary, "id " + std::to_string(id) + " out of range");
    }
    return tokens_[static_cast<std::size_t>(id)];
  }

  TokenId id(std::string_view tok) const {
    auto it = ids_.find(std::string(tok));
    if (it == ids_.end()) {
      throw error(errc::out_of_vocabulary, "token '" + std::string(tok) + "' not in vocabulary");
    }
    return it->second;
  }

  bool contains(std::string_view tok) const { return ids_.count(std::string(tok)) > 0; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

/// Loads a vocabulary file: one token per line, line index = id, line 0 = `<b>`.
inline Vocab load_vocab(const std::string& path) {
  auto lines = read_lines(path);
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return Vocab(std::move(lines));
}

}  // namespace infoknn
