#include "betarank/baselines.hpp"

#include <algorithm>
#include <stdexcept>

#include "betarank/ranker.hpp"

namespace betarank {

namespace {

std::vector<ItemId> take_items(const std::vector<CountTrie::ItemCount>& followers,
                               std::size_t k) {
  std::vector<ItemId> items;
  items.reserve(std::min(k, followers.size()));
  for (std::size_t i = 0; i < followers.size() && i < k; ++i) {
    items.push_back(followers[i].item);
  }
  return items;
}

}  // namespace

std::vector<ItemId> markov_predict(const CountTrie& trie,
                                   std::span<const ItemId> prefix, int order,
                                   std::size_t k) {
  const int max_order = std::min<int>(order, static_cast<int>(prefix.size()));
  for (int n = max_order; n >= 1; --n) {
    const auto followers =
        trie.followers(prefix.subspan(prefix.size() - static_cast<std::size_t>(n)));
    if (!followers.empty()) return take_items(followers, k);
  }
  return take_items(trie.followers({}), k);  // below order 1: global popularity
}

std::vector<ItemId> context_max_predict(const CountTrie& trie,
                                        std::span<const ItemId> prefix,
                                        std::size_t k) {
  return markov_predict(trie, prefix, 3, k);
}

std::vector<ItemId> most_popular_predict(const CountTrie& trie, std::size_t k) {
  if (trie.empty()) throw std::runtime_error("most_popular_predict: empty trie");
  return take_items(trie.followers({}), k);
}

std::vector<ItemId> BayesianPredictor::predict(std::span<const ItemId> prefix,
                                               std::size_t k) const {
  if (prefix.size() != 3) {
    throw std::invalid_argument("bayesian predictor needs a 3-item prefix");
  }
  const Ranking ranking =
      rank(model_, trie_, std::span<const ItemId, 3>(prefix.data(), 3), k);
  std::vector<ItemId> items;
  items.reserve(ranking.items.size());
  for (const ScoredItem& s : ranking.items) items.push_back(s.item);
  return items;
}

}  // namespace betarank
