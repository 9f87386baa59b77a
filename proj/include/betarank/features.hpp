#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "betarank/count_trie.hpp"
#include "betarank/types.hpp"

namespace betarank {

/// The 8 count statistics of a 4-item window (a,b,c,d).
/// pos[k] counts the length-k suffix of (a,b,c) followed by d, so
/// pos = [#(d), #(cd), #(bcd), #(abcd)]. neg[k] counts the same prefix
/// followed by anything other than d:
/// neg[k] = continuation_total(prefix_k) - pos[k], with neg[0] using the
/// corpus-wide unigram total.
struct CountFeatures {
  std::array<std::uint64_t, 4> pos{};
  std::array<std::uint64_t, 4> neg{};
  bool operator==(const CountFeatures&) const = default;
};

/// Network input: elementwise ln(1+count), positives then negatives.
/// Raw counts through the exponential layers would overflow; the log
/// transform is strictly monotone so the ordering information survives.
using FeatureVector = std::array<double, 8>;

/// Throws std::out_of_range if a window item is outside the trie's
/// vocabulary.
CountFeatures count_features(const CountTrie& trie, std::span<const ItemId, 4> window);

FeatureVector transform(const CountFeatures& f);

}  // namespace betarank
