#include "betarank/features.hpp"

#include <cmath>
#include <stdexcept>

namespace betarank {

CountFeatures count_features(const CountTrie& trie, std::span<const ItemId, 4> window) {
  for (ItemId item : window) {
    if (item >= trie.vocab_size()) {
      throw std::out_of_range("count_features: item " + std::to_string(item) +
                              " outside the vocabulary");
    }
  }
  CountFeatures f;
  // k-th query uses the length-k suffix of the context plus the target,
  // i.e. window[3-k .. 3].
  for (int k = 0; k < 4; ++k) {
    const auto seq = window.subspan(static_cast<std::size_t>(3 - k));
    const auto prefix = seq.first(seq.size() - 1);
    f.pos[static_cast<std::size_t>(k)] = trie.count(seq);
    f.neg[static_cast<std::size_t>(k)] =
        trie.continuation_total(prefix) - f.pos[static_cast<std::size_t>(k)];
  }
  return f;
}

FeatureVector transform(const CountFeatures& f) {
  FeatureVector z;
  for (std::size_t k = 0; k < 4; ++k) {
    z[k] = std::log1p(static_cast<double>(f.pos[k]));
    z[k + 4] = std::log1p(static_cast<double>(f.neg[k]));
  }
  return z;
}

}  // namespace betarank
