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
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "infoknn/common.hpp"

namespace infoknn {

/// Retrieval and interpolation hyperparameters. Defaults are the validated
/// values that ship with the model: k=12, 3-gram values, lambda=0.45,
/// temperature 50, position gains (1.68, 0.68, 1.68), sigma=1, seed 17.
struct Hyperparams {
  int k = 12;
  int ngram = 3;
  double lambda = 0.45;
  double temperature = 50.0;
  double sigma = 1.0;
  std::vector<double> weights = {1.68, 0.68, 1.68};
  std::uint64_t seed = 17;

  void validate() const {
    if (k < 1) {
      throw error(errc::bad_hyperparam, "k must be >= 1, got " + std::to_string(k));
    }
    if (ngram < 1 || ngram % 2 == 0) {
      throw error(errc::even_ngram, "ngram must be odd and >= 1, got " + std::to_string(ngram));
    }
    if (weights.size() != static_cast<std::size_t>(ngram)) {
      throw error(errc::bad_hyperparam,
                  "weights has " + std::to_string(weights.size()) + " entries, expected " +
                      std::to_string(ngram));
    }
    for (double w : weights) {
      if (!(w >= 0.0)) {
        throw error(errc::bad_hyperparam, "position weights must be >= 0");
      }
    }
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
      throw error(errc::bad_hyperparam, "lambda must be in [0,1]");
    }
    if (!(temperature > 0.0)) {
      throw error(errc::bad_hyperparam, "temperature must be > 0");
    }
    if (!(sigma > 0.0)) {
      throw error(errc::bad_hyperparam, "sigma must be > 0");
    }
  }

  bool operator==(const Hyperparams&) const = default;
};

namespace detail {

inline double parse_double(const std::string& key, const std::string& text) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw error(errc::bad_config_value, key + "=" + text);
  }
  if (pos != text.size()) {
    throw error(errc::bad_config_value, key + "=" + text);
  }
  return v;
}

inline long long parse_int(const std::string& key, const std::string& text) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &pos);
  } catch (const std::exception&) {
    throw error(errc::bad_config_value, key + "=" + text);
  }
  if (pos != text.size()) {
    throw error(errc::bad_config_value, key + "=" + text);
  }
  return v;
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& text) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &pos);
  } catch (const std::exception&) {
    throw error(errc::bad_config_value, key + "=" + text);
  }
  if (pos != text.size() || (!text.empty() && text[0] == '-')) {
    throw error(errc::bad_config_value, key + "=" + text);
  }
  return v;
}

}  // namespace detail

/// Applies one `key=value` assignment. Shared by the config loader and the
/// CLI's flag overrides so both go through identical validation.
inline void apply_config_entry(Hyperparams& hp, const std::string& key, const std::string& value) {
  if (key == "k") {
    hp.k = static_cast<int>(detail::parse_int(key, value));
  } else if (key == "ngram") {
    hp.ngram = static_cast<int>(detail::parse_int(key, value));
  } else if (key == "lambda") {
    hp.lambda = detail::parse_double(key, value);
  } else if (key == "temperature") {
    hp.temperature = detail::parse_double(key, value);
  } else if (key == "sigma") {
    hp.sigma = detail::parse_double(key, value);
  } else if (key == "seed") {
    hp.seed = detail::parse_uint(key, value);
  } else if (key == "weights") {
    std::vector<double> ws;
    std::string item;
    std::istringstream split(value);
    while (std::getline(split, item, ',')) {
      ws.push_back(detail::parse_double(key, item));
    }
    if (ws.empty()) {
      throw error(errc::bad_config_value, "weights=" + value);
    }
    hp.weights = std::move(ws);
  } else {
    throw error(errc::bad_config_key, "unknown key '" + key + "'");
  }
}

/// Loads a `key=value` config file. Missing keys keep their defaults, unknown
/// keys are rejected; blank lines and lines starting with '#' are skipped.
inline Hyperparams load_config(const std::string& path) {
  Hyperparams hp;
  auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw error(errc::bad_config_value, "line " + std::to_string(i + 1) + ": '" + line + "'");
    }
    apply_config_entry(hp, line.substr(0, eq), line.substr(eq + 1));
  }
  hp.validate();
  return hp;
}

/// Serializes hyperparameters so that load_config(format_config(hp)) == hp.
inline std::string format_config(const Hyperparams& hp) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "k=" << hp.k << "\n";
  out << "ngram=" << hp.ngram << "\n";
  out << "lambda=" << hp.lambda << "\n";
  out << "temperature=" << hp.temperature << "\n";
  out << "sigma=" << hp.sigma << "\n";
  out << "weights=";
  for (std::size_t i = 0; i < hp.weights.size(); ++i) {
    if (i > 0) out << ",";
    out << hp.weights[i];
  }
  out << "\n";
  out << "seed=" << hp.seed << "\n";
  return out.str();
}

}  // namespace infoknn
