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
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace infoknn {

using TokenId = std::int32_t;

/// Reserved vocabulary id for the sentence-boundary token `<b>`.
inline constexpr TokenId kBoundaryId = 0;
inline constexpr std::string_view kBoundaryToken = "<b>";

enum class errc {
  duplicate_token,
  missing_boundary_token,
  empty_vocab,
  malformed_vocab,
  malformed_utf8,
  length_mismatch,
  out_of_vocabulary,
  empty_sentence,
  bad_config_key,
  bad_config_value,
  even_ngram,
  bad_hyperparam,
  malformed_resource,
  dimension_mismatch,
  key_mode_mismatch,
  sidecar_mismatch,
  bad_magic,
  version_mismatch,
  truncated,
  checksum_mismatch,
  position_out_of_range,
  empty_neighbors,
  io_failure,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::duplicate_token: return "DuplicateToken";
    case errc::missing_boundary_token: return "MissingBoundaryToken";
    case errc::empty_vocab: return "EmptyVocab";
    case errc::malformed_vocab: return "MalformedVocab";
    case errc::malformed_utf8: return "MalformedUtf8";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::out_of_vocabulary: return "OutOfVocabulary";
    case errc::empty_sentence: return "EmptySentence";
    case errc::bad_config_key: return "BadConfigKey";
    case errc::bad_config_value: return "BadConfigValue";
    case errc::even_ngram: return "EvenNGram";
    case errc::bad_hyperparam: return "BadHyperparam";
    case errc::malformed_resource: return "MalformedResource";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::key_mode_mismatch: return "KeyModeMismatch";
    case errc::sidecar_mismatch: return "SidecarMismatch";
    case errc::bad_magic: return "BadMagic";
    case errc::version_mismatch: return "VersionMismatch";
    case errc::truncated: return "Truncated";
    case errc::checksum_mismatch: return "ChecksumMismatch";
    case errc::position_out_of_range: return "PositionOutOfRange";
    case errc::empty_neighbors: return "EmptyNeighbors";
    case errc::io_failure: return "IoFailure";
  }
  return "UnknownError";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

// ---------------------------------------------------------------------------
// UTF-8 handling. Tokens are single Unicode code points; the corpus loaders
// split raw text into per-code-point substrings.
// ---------------------------------------------------------------------------

inline std::size_t utf8_sequence_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead & 0xE0) == 0xC0) return 2;
  if ((lead & 0xF0) == 0xE0) return 3;
  if ((lead & 0xF8) == 0xF0) return 4;
  return 0;  // continuation or invalid lead byte
}

/// Splits UTF-8 text into one string per code point. Throws on malformed input.
inline std::vector<std::string> split_code_points(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t len = utf8_sequence_length(static_cast<unsigned char>(text[i]));
    if (len == 0 || i + len > text.size()) {
      throw error(errc::malformed_utf8, "invalid UTF-8 at byte " + std::to_string(i));
    }
    for (std::size_t j = 1; j < len; ++j) {
      if ((static_cast<unsigned char>(text[i + j]) & 0xC0) != 0x80) {
        throw error(errc::malformed_utf8, "invalid continuation byte at " + std::to_string(i + j));
      }
    }
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

inline std::size_t count_code_points(std::string_view text) {
  std::size_t n = 0, i = 0;
  while (i < text.size()) {
    std::size_t len = utf8_sequence_length(static_cast<unsigned char>(text[i]));
    if (len == 0 || i + len > text.size()) {
      throw error(errc::malformed_utf8, "invalid UTF-8 at byte " + std::to_string(i));
    }
    i += len;
    ++n;
  }
  return n;
}

inline std::string code_point_to_utf8(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Text file helpers. All formats in this project are UTF-8 with LF endings;
// a trailing CR is stripped for tolerance of CRLF-edited fixtures.
// ---------------------------------------------------------------------------

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw error(errc::io_failure, "cannot open " + path);
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw error(errc::io_failure, "cannot open " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace infoknn
