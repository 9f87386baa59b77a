#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "betarank/corpus.hpp"
#include "betarank/count_trie.hpp"
#include "betarank/features.hpp"
#include "betarank/types.hpp"

namespace betarank {

/// One contrastive training instance: counts of an observed window and of
/// the alternative window ending in the selected negative item. Windows are
/// kept for provenance; only the 16 counts are persisted.
struct TrainingPair {
  CountFeatures pos;
  CountFeatures neg;
  std::array<ItemId, 4> pos_window{};
  std::array<ItemId, 4> neg_window{};
};

/// Picks the contrast item for an observed (prefix, pos_item) window:
/// the most popular follower of the prefix, or the second most popular when
/// pos_item itself is the most popular. When no second follower exists the
/// search backs off to the length-2 suffix, then length-1, then the global
/// unigram argmax, always excluding pos_item. Throws std::runtime_error if
/// no candidate exists anywhere (single-item vocabulary).
ItemId select_negative(const CountTrie& trie, std::span<const ItemId, 3> prefix,
                       ItemId pos_item);

/// One pair per length-4 window per session, in session order. Sessions
/// shorter than 4 items contribute nothing.
std::vector<TrainingPair> make_pairs(const CountTrie& trie, const Corpus& corpus);

/// Header `PAIRS v1`, then one line per pair: the positive instance's
/// 8 counts followed by the negative instance's 8, space-separated.
void write_pairs(std::span<const TrainingPair> pairs, const std::filesystem::path& path);

/// Round-trips the 16 counts per pair; window provenance is not stored.
/// Throws std::runtime_error on a line without exactly 16 integer fields
/// (the message names the line).
std::vector<TrainingPair> read_pairs(const std::filesystem::path& path);

}  // namespace betarank
