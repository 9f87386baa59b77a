#pragma once

#include <array>
#include <span>
#include <vector>

#include "betarank/beta_net.hpp"
#include "betarank/count_trie.hpp"
#include "betarank/types.hpp"

namespace betarank {

struct CandidateSet {
  std::vector<ItemId> items;
  int backoff_level;  // 0 = full prefix, 1 = length-2 suffix, 2 = length-1, 3 = global
};

struct ScoredItem {
  ItemId item;
  double score;  // Beta posterior mean, strictly inside (0,1)
};

struct Ranking {
  std::vector<ScoredItem> items;  // scores non-increasing
  std::array<ItemId, 3> prefix;
  int backoff_level;
};

/// Top-k followers of the prefix in the deterministic follower order,
/// backing off to shorter suffixes (then global popularity) only when a
/// level yields no followers at all. Throws std::runtime_error on an
/// empty trie.
CandidateSet candidates(const CountTrie& trie, std::span<const ItemId, 3> prefix,
                        std::size_t k);

/// Scores each candidate window prefix++[c] by the posterior mean of the
/// two learned prior parameters; sorts by score descending, ties by
/// ascending id.
Ranking rank(const ModelPair& model, const CountTrie& trie,
             std::span<const ItemId, 3> prefix, std::size_t k);

}  // namespace betarank
