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

#include <chrono>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "infoknn/common.hpp"
#include "infoknn/config.hpp"
#include "infoknn/corpus.hpp"
#include "infoknn/corrector.hpp"
#include "infoknn/datastore.hpp"
#include "infoknn/encoder.hpp"
#include "infoknn/eval.hpp"
#include "infoknn/io.hpp"
#include "infoknn/retrieval.hpp"
#include "infoknn/vocab.hpp"

namespace infoknn::cli {

// Exit codes: 0 ok, 1 usage, 2 data error, 3 internal.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInternal = 3;

namespace detail {

inline std::string hex32(std::uint32_t v) {
  std::ostringstream out;
  out << std::hex << std::setfill('0') << std::setw(8) << v;
  return out.str();
}

/// Accumulates the run manifest: command, merged config, input checksums,
/// datastore checksum, counters, timing. Two identical runs differ only in
/// the wall_ms line.
class Manifest {
 public:
  explicit Manifest(std::string command) : start_(std::chrono::steady_clock::now()) {
    add("command", command);
  }

  void add(const std::string& key, const std::string& value) {
    lines_.push_back(key + "=" + value);
  }
  void add(const std::string& key, std::uint64_t value) { add(key, std::to_string(value)); }

  void add_config(const Hyperparams& hp) {
    std::istringstream in(format_config(hp));
    std::string line;
    while (std::getline(in, line)) {
      lines_.push_back("config." + line);
    }
  }

  void add_input(const std::string& name, const std::string& path) {
    add("input." + name, path);
    add("input." + name + ".crc32", hex32(crc32_of_file(path)));
  }

  std::string render() const {
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start_)
                       .count();
    std::string out;
    for (const auto& line : lines_) out += line + "\n";
    out += "wall_ms=" + std::to_string(elapsed) + "\n";
    return out;
  }

  void write_beside(const std::string& out_path) const {
    write_file_atomic(out_path + ".manifest", render());
  }

 private:
  std::vector<std::string> lines_;
  std::chrono::steady_clock::time_point start_;
};

struct HyperparamOverrides {
  std::vector<std::pair<std::string, std::string>> entries;

  void attach(CLI::App* cmd) {
    auto opt = [this, cmd](const std::string& flag, const std::string& key,
                           const std::string& desc) {
      cmd->add_option_function<std::string>(
             flag, [this, key](const std::string& v) { entries.emplace_back(key, v); }, desc)
          ->expected(1);
    };
    opt("--k", "k", "neighbor count override");
    opt("--ngram", "ngram", "n-gram width override (odd)");
    opt("--lambda", "lambda", "interpolation weight override");
    opt("--temperature", "temperature", "softmax temperature override");
    opt("--sigma", "sigma", "context Gaussian std override");
    opt("--weights", "weights", "comma-separated position gains override");
    opt("--seed", "seed", "seed override");
  }

  Hyperparams merge(const std::string& config_path) const {
    Hyperparams hp = config_path.empty() ? Hyperparams{} : load_config(config_path);
    for (const auto& [key, value] : entries) {
      apply_config_entry(hp, key, value);
    }
    hp.validate();
    return hp;
  }
};

/// `uniform` or `oracle:<path>:<epsilon>`.
inline std::unique_ptr<BaseModel> make_base_model(const std::string& spec, const Vocab& vocab,
                                                  std::uint64_t seed) {
  if (spec == "uniform") {
    return std::make_unique<UniformBaseModel>(vocab.size());
  }
  if (spec.rfind("oracle:", 0) == 0) {
    auto colon = spec.rfind(':');
    if (colon == std::string::npos || colon <= 7) {
      throw error(errc::bad_config_value, "base spec '" + spec + "'");
    }
    std::string path = spec.substr(7, colon - 7);
    double eps = 0.0;
    try {
      eps = std::stod(spec.substr(colon + 1));
    } catch (const std::exception&) {
      throw error(errc::bad_config_value, "base spec '" + spec + "'");
    }
    auto gold = load_sentences(path, vocab);
    return std::make_unique<NoisyOracleBaseModel>(std::move(gold), eps, seed, vocab.size());
  }
  throw error(errc::bad_config_value, "base spec '" + spec + "' (want uniform or oracle:path:eps)");
}

struct EncoderArgs {
  std::string phonetic_table;
  std::string graphic_table;
  std::string sidecar_path;

  void attach(CLI::App* cmd) {
    auto* ph = cmd->add_option("--phonetic-table", phonetic_table, "token<TAB>code table");
    auto* mo = cmd->add_option("--graphic-table", graphic_table, "token<TAB>components table");
    auto* sc = cmd->add_option("--sidecar", sidecar_path, "precomputed embedding sidecar");
    sc->excludes(ph)->excludes(mo);
  }

  bool uses_sidecar() const { return !sidecar_path.empty(); }

  ToyEncoder make_encoder(const Vocab& vocab, std::uint64_t seed) const {
    auto phonetic = phonetic_table.empty() ? std::unordered_map<TokenId, std::string>{}
                                           : load_code_table(phonetic_table, vocab);
    auto graphic = graphic_table.empty() ? std::unordered_map<TokenId, std::string>{}
                                         : load_code_table(graphic_table, vocab);
    return ToyEncoder(vocab, phonetic, graphic, seed);
  }

  void add_inputs(Manifest& m) const {
    if (!phonetic_table.empty()) m.add_input("phonetic_table", phonetic_table);
    if (!graphic_table.empty()) m.add_input("graphic_table", graphic_table);
    if (!sidecar_path.empty()) m.add_input("sidecar", sidecar_path);
  }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct BuildArgs {
  std::string corpus, vocab, out, config, raw_text;
  bool plain_key = false;
  detail::EncoderArgs encoder;
  detail::HyperparamOverrides overrides;
};

inline int cmd_build(const BuildArgs& a, std::ostream& out) {
  detail::Manifest manifest("build");
  Vocab vocab = load_vocab(a.vocab);
  Hyperparams hp = a.overrides.merge(a.config);
  auto pairs = load_corpus(a.corpus, vocab);
  KeyMode mode = a.plain_key ? KeyMode::plain_hidden : KeyMode::general_info;

  std::vector<Sentence> raw;
  if (!a.raw_text.empty()) {
    raw = load_sentences(a.raw_text, vocab);
  }

  Datastore store;
  if (a.encoder.uses_sidecar()) {
    Sidecar sidecar = load_sidecar(a.encoder.sidecar_path);
    if (sidecar.sentences.size() != pairs.size() + raw.size()) {
      throw error(errc::sidecar_mismatch,
                  "sidecar has " + std::to_string(sidecar.sentences.size()) +
                      " sentences, inputs have " + std::to_string(pairs.size() + raw.size()));
    }
    store = build_datastore(pairs, sidecar, hp, mode);
    if (!raw.empty()) extend_with_raw(store, raw, sidecar, pairs.size(), hp);
  } else {
    ToyEncoder suite = a.encoder.make_encoder(vocab, hp.seed);
    store = build_datastore(pairs, suite, hp, mode);
    if (!raw.empty()) extend_with_raw(store, raw, suite, hp);
  }
  save_datastore(store, a.out);

  manifest.add_config(hp);
  manifest.add_input("vocab", a.vocab);
  manifest.add_input("corpus", a.corpus);
  if (!a.raw_text.empty()) manifest.add_input("raw_text", a.raw_text);
  a.encoder.add_inputs(manifest);
  if (!a.config.empty()) manifest.add_input("config", a.config);
  manifest.add("datastore.key_mode", key_mode_name(store.key_mode()));
  manifest.add("datastore.entries", store.size());
  manifest.add("datastore.crc32", detail::hex32(crc32_of_file(a.out)));
  manifest.add("output", a.out);
  manifest.write_beside(a.out);

  out << "built " << a.out << ": " << store.size() << " entries, mode "
      << key_mode_name(store.key_mode()) << "\n";
  return kExitOk;
}

struct CorrectArgs {
  std::string in, datastore, vocab, config, base = "uniform", out;
  bool no_rerank = false, plain_key = false, no_knn = false, squared_l2 = false;
  unsigned threads = 0;
  detail::EncoderArgs encoder;
  detail::HyperparamOverrides overrides;
};

inline int cmd_correct(const CorrectArgs& a, std::ostream& out) {
  detail::Manifest manifest("correct");
  Vocab vocab = load_vocab(a.vocab);
  Hyperparams hp = a.overrides.merge(a.config);
  Datastore store = load_datastore(a.datastore);
  auto sources = load_sentences(a.in, vocab);
  auto base = detail::make_base_model(a.base, vocab, hp.seed);

  AblationSwitches switches{.no_rerank = a.no_rerank, .plain_key = a.plain_key,
                            .no_knn = a.no_knn};
  SearchOptions search_opts{a.squared_l2 ? DistanceKind::squared_l2 : DistanceKind::l2, a.threads};
  RunStats stats;

  std::vector<Sentence> corrected;
  if (a.encoder.uses_sidecar()) {
    Sidecar sidecar = load_sidecar(a.encoder.sidecar_path);
    if (sidecar.sentences.size() != sources.size()) {
      throw error(errc::sidecar_mismatch,
                  "sidecar has " + std::to_string(sidecar.sentences.size()) +
                      " sentences, input has " + std::to_string(sources.size()));
    }
    corrected = correct_corpus(sources, *base, sidecar, store, hp, switches, search_opts, &stats);
  } else {
    ToyEncoder suite = a.encoder.make_encoder(vocab, hp.seed);
    corrected = correct_corpus(sources, *base, suite, store, hp, switches, search_opts, &stats);
  }

  std::ostringstream text;
  write_sentences(text, corrected, vocab);
  write_file_atomic(a.out, text.str());

  manifest.add_config(hp);
  manifest.add_input("vocab", a.vocab);
  manifest.add_input("in", a.in);
  manifest.add_input("datastore", a.datastore);
  a.encoder.add_inputs(manifest);
  if (!a.config.empty()) manifest.add_input("config", a.config);
  manifest.add("base", a.base);
  manifest.add("datastore.key_mode", key_mode_name(store.key_mode()));
  manifest.add("datastore.entries", store.size());
  manifest.add("datastore.crc32", detail::hex32(crc32_of_file(a.datastore)));
  manifest.add("switches.no_rerank", a.no_rerank ? "1" : "0");
  manifest.add("switches.plain_key", a.plain_key ? "1" : "0");
  manifest.add("switches.no_knn", a.no_knn ? "1" : "0");
  manifest.add("distance", a.squared_l2 ? "squared_l2" : "l2");
  manifest.add("positions", stats.positions);
  manifest.add("knn_positions", stats.knn_positions);
  manifest.add("fallback_positions", stats.fallback_positions);
  manifest.add("changed_positions", stats.changed_positions);
  manifest.add("output", a.out);
  manifest.write_beside(a.out);

  out << "corrected " << sources.size() << " sentences -> " << a.out << " ("
      << stats.changed_positions << " changed positions, " << stats.fallback_positions
      << " fallback positions)\n";
  return kExitOk;
}

struct QueryArgs {
  std::string datastore, vocab, config, sentence;
  std::size_t pos = 0;
  bool plain_key = false, squared_l2 = false;
  unsigned threads = 0;
  detail::EncoderArgs encoder;
  detail::HyperparamOverrides overrides;
};

inline int cmd_query(const QueryArgs& a, std::ostream& out, std::ostream& err) {
  Vocab vocab = load_vocab(a.vocab);
  Hyperparams hp = a.overrides.merge(a.config);
  Datastore store = load_datastore(a.datastore);
  Sentence sentence = tokenize(a.sentence, vocab);
  if (a.pos >= sentence.size()) {
    throw error(errc::position_out_of_range,
                "--pos " + std::to_string(a.pos) + " in sentence of length " +
                    std::to_string(sentence.size()));
  }

  AblationSwitches switches{.plain_key = a.plain_key};
  infoknn::detail::check_key_mode(store, switches);
  KeyMode mode = a.plain_key ? KeyMode::plain_hidden : KeyMode::general_info;

  std::size_t k = static_cast<std::size_t>(hp.k);
  if (k > store.size()) {
    err << "warning: k=" << k << " exceeds datastore size " << store.size()
        << "; returning all entries\n";
    k = store.size();
  }

  std::vector<FeatureBundle> bundles;
  if (a.encoder.uses_sidecar()) {
    Sidecar sidecar = load_sidecar(a.encoder.sidecar_path);
    bundles = sidecar.bundles_for(sentence, 0);
  } else {
    ToyEncoder suite = a.encoder.make_encoder(vocab, hp.seed);
    bundles = suite.encode(sentence);
  }
  Key query = build_key(bundles, a.pos, hp.sigma, mode);
  SearchOptions search_opts{a.squared_l2 ? DistanceKind::squared_l2 : DistanceKind::l2, a.threads};
  auto hits = search(store, query, k, search_opts);
  auto g = input_ngram(sentence, a.pos, hp.ngram);
  auto neighbors = rerank(hits, store, g, hp.weights);

  out << "query \"" << a.sentence << "\" pos=" << a.pos << " k=" << k << " mode="
      << key_mode_name(mode) << " entries=" << store.size() << "\n";
  out << "input ngram:";
  for (TokenId id : g) out << " " << vocab.token(id);
  out << "\n";
  out << std::fixed << std::setprecision(6);
  out << "rank  entry  raw_dist   alpha      reranked   value        provenance\n";
  for (std::size_t r = 0; r < neighbors.size(); ++r) {
    const auto& nb = neighbors[r];
    out << std::setw(4) << (r + 1) << "  " << std::setw(5) << nb.entry << "  " << std::setw(9)
        << nb.raw_distance << "  " << std::setw(9) << nb.overlap << "  " << std::setw(9)
        << nb.reranked_distance << "  ";
    std::string value_text;
    for (TokenId id : store.value(nb.entry)) value_text += vocab.token(id);
    out << std::setw(10) << value_text << "  (" << store.provenance(nb.entry).sentence << ","
        << store.provenance(nb.entry).token << ")\n";
  }
  return kExitOk;
}

struct EvaluateArgs {
  std::string src, pred, gold, out;
};

inline int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  detail::Manifest manifest("evaluate");
  // Metrics compare code points positionally; any vocabulary covering the
  // files works, so one is synthesized from the union of their characters.
  std::vector<std::string> tokens{std::string(kBoundaryToken)};
  std::set<std::string> seen;
  for (const auto* path : {&a.src, &a.pred, &a.gold}) {
    for (const auto& line : read_lines(*path)) {
      for (auto& cp : split_code_points(line)) {
        if (seen.insert(cp).second) tokens.push_back(cp);
      }
    }
  }
  Vocab vocab(std::move(tokens));
  auto sources = load_sentences(a.src, vocab);
  auto predictions = load_sentences(a.pred, vocab);
  auto targets = load_sentences(a.gold, vocab);
  EvalReport report = evaluate(sources, predictions, targets);

  write_file_atomic(a.out, format_report_kv(report));
  manifest.add_input("src", a.src);
  manifest.add_input("pred", a.pred);
  manifest.add_input("gold", a.gold);
  manifest.add("output", a.out);
  manifest.write_beside(a.out);

  out << format_report(report);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"InfoKNN spelling-correction toolkit"};
  app.require_subcommand(1);

  BuildArgs build_args;
  auto* build = app.add_subcommand("build", "build a datastore from a parallel corpus");
  build->add_option("--corpus", build_args.corpus, "source<TAB>target pairs")->required();
  build->add_option("--vocab", build_args.vocab, "vocabulary file")->required();
  build->add_option("--out", build_args.out, "output datastore path")->required();
  build->add_option("--config", build_args.config, "key=value config file");
  build->add_option("--raw-text", build_args.raw_text, "raw sentences appended as y=x entries");
  build->add_flag("--plain-key", build_args.plain_key, "build with plain hidden-vector keys");
  build_args.encoder.attach(build);
  build_args.overrides.attach(build);

  CorrectArgs correct_args;
  auto* correct = app.add_subcommand("correct", "correct sentences through the full pipeline");
  correct->add_option("--in", correct_args.in, "input sentences, one per line")->required();
  correct->add_option("--datastore", correct_args.datastore, "datastore file")->required();
  correct->add_option("--vocab", correct_args.vocab, "vocabulary file")->required();
  correct->add_option("--config", correct_args.config, "key=value config file");
  correct->add_option("--base", correct_args.base, "uniform | oracle:<path>:<epsilon>");
  correct->add_option("--out", correct_args.out, "output path")->required();
  correct->add_flag("--no-rerank", correct_args.no_rerank, "disable n-gram reranking");
  correct->add_flag("--plain-key", correct_args.plain_key, "query with plain hidden-vector keys");
  correct->add_flag("--no-knn", correct_args.no_knn, "bypass retrieval (base model only)");
  correct->add_flag("--squared-l2", correct_args.squared_l2, "use squared l2 distances");
  correct->add_option("--threads", correct_args.threads, "scan threads (0 = auto)");
  correct_args.encoder.attach(correct);
  correct_args.overrides.attach(correct);

  QueryArgs query_args;
  auto* query = app.add_subcommand("query", "dump the neighbors for one position");
  query->add_option("--datastore", query_args.datastore, "datastore file")->required();
  query->add_option("--vocab", query_args.vocab, "vocabulary file")->required();
  query->add_option("--config", query_args.config, "key=value config file");
  query->add_option("--sentence", query_args.sentence, "query sentence text")->required();
  query->add_option("--pos", query_args.pos, "token position to query")->required();
  query->add_flag("--plain-key", query_args.plain_key, "query with plain hidden-vector keys");
  query->add_flag("--squared-l2", query_args.squared_l2, "use squared l2 distances");
  query->add_option("--threads", query_args.threads, "scan threads (0 = auto)");
  query_args.encoder.attach(query);
  query_args.overrides.attach(query);

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "sentence-level detection/correction metrics");
  evaluate->add_option("--src", eval_args.src, "source sentences")->required();
  evaluate->add_option("--pred", eval_args.pred, "predicted sentences")->required();
  evaluate->add_option("--gold", eval_args.gold, "gold sentences")->required();
  evaluate->add_option("--out", eval_args.out, "report output path")->required();

  try {
    std::reverse(args.begin(), args.end());  // CLI11 consumes a reversed vector
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (build->parsed()) return cmd_build(build_args, out);
    if (correct->parsed()) return cmd_correct(correct_args, out);
    if (query->parsed()) return cmd_query(query_args, out, err);
    if (evaluate->parsed()) return cmd_evaluate(eval_args, out);
    err << "usage error: no subcommand\n";
    return kExitUsage;
  } catch (const error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

/// argv adapter for main(). CLI11 parses reversed vectors, so `run` takes
/// the natural order and reverses internally.
inline int run_main(int argc, char** argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(std::move(args), out, err);
}

}  // namespace infoknn::cli
