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

#include <iomanip>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "infoknn/common.hpp"
#include "infoknn/corpus.hpp"
#include "infoknn/corrector.hpp"
#include "infoknn/datastore.hpp"

namespace infoknn {

struct LevelMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Sentence-level detection and correction metrics. Detection credits a
/// sentence when the predicted change-position set equals the gold set;
/// correction additionally requires the changed tokens to match gold.
/// Precision is over sentences where the system predicts at least one
/// change, recall over sentences with at least one gold error; zero
/// denominators yield 0, not NaN.
struct EvalReport {
  LevelMetrics detection;
  LevelMetrics correction;
  std::size_t sentences = 0;
  std::size_t error_sentences = 0;
  std::size_t predicted_change_sentences = 0;
};

namespace detail {

inline double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

inline double f1_score(double precision, double recall) {
  return (precision + recall) == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}

}  // namespace detail

inline EvalReport evaluate(std::span<const Sentence> sources, std::span<const Sentence> predictions,
                           std::span<const Sentence> targets) {
  if (sources.size() != predictions.size() || sources.size() != targets.size()) {
    throw error(errc::length_mismatch,
                "corpus sizes " + std::to_string(sources.size()) + "/" +
                    std::to_string(predictions.size()) + "/" + std::to_string(targets.size()));
  }
  EvalReport r;
  r.sentences = sources.size();
  std::size_t det_tp = 0, cor_tp = 0, det_acc = 0, cor_acc = 0;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const Sentence& src = sources[i];
    const Sentence& pred = predictions[i];
    const Sentence& gold = targets[i];
    if (pred.size() != src.size() || gold.size() != src.size()) {
      throw error(errc::length_mismatch, "sentence " + std::to_string(i) + ": length mismatch");
    }
    bool sets_equal = true;
    bool any_pred = false, any_gold = false;
    for (std::size_t t = 0; t < src.size(); ++t) {
      bool p = pred.ids[t] != src.ids[t];
      bool g = gold.ids[t] != src.ids[t];
      any_pred |= p;
      any_gold |= g;
      if (p != g) sets_equal = false;
    }
    bool fully_corrected = pred == gold;

    if (any_gold) ++r.error_sentences;
    if (any_pred) ++r.predicted_change_sentences;
    if (sets_equal && any_gold) ++det_tp;
    if (fully_corrected && any_gold) ++cor_tp;
    if (sets_equal) ++det_acc;
    if (fully_corrected) ++cor_acc;
  }

  r.detection.accuracy = detail::ratio(det_acc, r.sentences);
  r.detection.precision = detail::ratio(det_tp, r.predicted_change_sentences);
  r.detection.recall = detail::ratio(det_tp, r.error_sentences);
  r.detection.f1 = detail::f1_score(r.detection.precision, r.detection.recall);

  r.correction.accuracy = detail::ratio(cor_acc, r.sentences);
  r.correction.precision = detail::ratio(cor_tp, r.predicted_change_sentences);
  r.correction.recall = detail::ratio(cor_tp, r.error_sentences);
  r.correction.f1 = detail::f1_score(r.correction.precision, r.correction.recall);
  return r;
}

inline std::string format_report(const EvalReport& r) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "level        acc     pre     rec     f1\n";
  out << "detection  " << std::setw(6) << r.detection.accuracy << "  " << std::setw(6)
      << r.detection.precision << "  " << std::setw(6) << r.detection.recall << "  " << std::setw(6)
      << r.detection.f1 << "\n";
  out << "correction " << std::setw(6) << r.correction.accuracy << "  " << std::setw(6)
      << r.correction.precision << "  " << std::setw(6) << r.correction.recall << "  "
      << std::setw(6) << r.correction.f1 << "\n";
  out << "sentences=" << r.sentences << " error_sentences=" << r.error_sentences
      << " predicted_change_sentences=" << r.predicted_change_sentences << "\n";
  return out.str();
}

inline std::string format_report_kv(const EvalReport& r) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "detection_accuracy=" << r.detection.accuracy << "\n";
  out << "detection_precision=" << r.detection.precision << "\n";
  out << "detection_recall=" << r.detection.recall << "\n";
  out << "detection_f1=" << r.detection.f1 << "\n";
  out << "correction_accuracy=" << r.correction.accuracy << "\n";
  out << "correction_precision=" << r.correction.precision << "\n";
  out << "correction_recall=" << r.correction.recall << "\n";
  out << "correction_f1=" << r.correction.f1 << "\n";
  out << "sentences=" << r.sentences << "\n";
  out << "error_sentences=" << r.error_sentences << "\n";
  out << "predicted_change_sentences=" << r.predicted_change_sentences << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Ablation table
// ---------------------------------------------------------------------------

struct AblationResult {
  std::string name;
  EvalReport report;
  std::vector<Sentence> outputs;
};

/// Runs the full configuration plus the three ablations on one split with a
/// shared decode setup. The plain-key run gets its own datastore built with
/// plain keys from the same pairs.
inline std::vector<AblationResult> ablation_run(std::span<const ParallelPair> train,
                                                std::span<const ParallelPair> test,
                                                const EncoderSuite& suite, const BaseModel& base,
                                                const Hyperparams& hp) {
  std::vector<Sentence> sources, targets;
  sources.reserve(test.size());
  targets.reserve(test.size());
  for (const auto& p : test) {
    sources.push_back(p.source);
    targets.push_back(p.target);
  }

  Datastore general = build_datastore(train, suite, hp, KeyMode::general_info);
  Datastore plain = build_datastore(train, suite, hp, KeyMode::plain_hidden);

  std::vector<AblationResult> results;
  auto run = [&](const std::string& name, const Datastore& store, AblationSwitches sw) {
    auto outputs = correct_corpus(sources, base, suite, store, hp, sw);
    results.push_back(AblationResult{name, evaluate(sources, outputs, targets), std::move(outputs)});
  };
  run("full", general, {});
  run("no_rerank", general, AblationSwitches{.no_rerank = true});
  run("plain_key", plain, AblationSwitches{.plain_key = true});
  run("no_knn", general, AblationSwitches{.no_knn = true});
  return results;
}

}  // namespace infoknn
