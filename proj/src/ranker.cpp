#include "betarank/ranker.hpp"

#include <algorithm>
#include <stdexcept>

#include "betarank/features.hpp"

namespace betarank {

CandidateSet candidates(const CountTrie& trie, std::span<const ItemId, 3> prefix,
                        std::size_t k) {
  if (k == 0) throw std::invalid_argument("candidates: k must be >= 1");
  if (trie.empty()) throw std::runtime_error("candidates: empty trie");

  for (std::size_t level = 0; level <= 3; ++level) {
    const auto followers = trie.followers(prefix.subspan(level));
    if (followers.empty()) continue;
    CandidateSet set;
    set.backoff_level = static_cast<int>(level);
    const std::size_t take = std::min(k, followers.size());
    set.items.reserve(take);
    for (std::size_t i = 0; i < take; ++i) set.items.push_back(followers[i].item);
    return set;
  }
  // Unreachable on a nonempty trie: the level-3 list is the unigram
  // distribution, which is nonempty whenever total_unigrams > 0.
  throw std::runtime_error("candidates: no followers at any level");
}

Ranking rank(const ModelPair& model, const CountTrie& trie,
             std::span<const ItemId, 3> prefix, std::size_t k) {
  const CandidateSet set = candidates(trie, prefix, k);

  Ranking ranking;
  std::copy(prefix.begin(), prefix.end(), ranking.prefix.begin());
  ranking.backoff_level = set.backoff_level;
  ranking.items.reserve(set.items.size());

  std::array<ItemId, 4> window{prefix[0], prefix[1], prefix[2], 0};
  for (ItemId candidate : set.items) {
    window[3] = candidate;
    const FeatureVector z = transform(count_features(trie, window));
    const double mu = posterior_mean(forward(model.alpha, z), forward(model.beta, z));
    ranking.items.push_back({candidate, mu});
  }
  std::sort(ranking.items.begin(), ranking.items.end(),
            [](const ScoredItem& a, const ScoredItem& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.item < b.item;
            });
  return ranking;
}

}  // namespace betarank
