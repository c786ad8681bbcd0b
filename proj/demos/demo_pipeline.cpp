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

// End-to-end library walkthrough: build a tiny datastore from parallel
// pairs, inspect the neighbors for one position, and correct a sentence.

#include <iostream>

#include "infoknn/infoknn.hpp"

using namespace infoknn;

int main() {
  Vocab vocab({"<b>", "这", "一", "以", "个", "你", "好", "很"});
  auto suite = make_hash_encoder(vocab, 17);
  Hyperparams hp;

  std::vector<ParallelPair> train;
  for (int i = 0; i < 6; ++i) {
    train.push_back(ParallelPair{tokenize("这以个", vocab), tokenize("这一个", vocab)});
  }
  train.push_back(ParallelPair{tokenize("你很好", vocab), tokenize("你很好", vocab)});
  Datastore store = build_datastore(train, suite, hp);
  std::cout << "datastore: " << store.size() << " entries, key dim " << store.key_dim() << "\n\n";

  Sentence input = tokenize("这以个", vocab);
  auto bundles = suite.encode(input);
  Key query = build_key(bundles, 1, hp.sigma);
  auto hits = search(store, query, static_cast<std::size_t>(hp.k));
  auto neighbors = rerank(hits, store, input_ngram(input, 1, hp.ngram), hp.weights);

  std::cout << "neighbors of position 1 (" << vocab.token(input.ids[1]) << "):\n";
  for (std::size_t r = 0; r < std::min<std::size_t>(neighbors.size(), 5); ++r) {
    const auto& nb = neighbors[r];
    std::string value;
    for (TokenId id : store.value(nb.entry)) value += vocab.token(id);
    std::cout << "  #" << (r + 1) << " value=" << value << " D=" << nb.raw_distance
              << " alpha=" << nb.overlap << " D'=" << nb.reranked_distance << "\n";
  }

  UniformBaseModel base(vocab.size());
  Sentence corrected = correct_sentence(input, base, suite, store, hp);
  std::cout << "\n" << detokenize(input, vocab) << " -> " << detokenize(corrected, vocab) << "\n";
  return 0;
}
