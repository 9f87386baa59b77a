#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "betarank/corpus.hpp"
#include "betarank/types.hpp"

namespace betarank {

/// Frozen prefix tree holding occurrence counts of every 1..max_n-gram of
/// the training corpus, counted with overlapping sliding windows (a session
/// of length L contributes L-n+1 n-grams). Immutable after build; safe for
/// concurrent reads.
class CountTrie {
 public:
  struct ItemCount {
    ItemId item;
    std::uint64_t count;
    bool operator==(const ItemCount&) const = default;
  };

  /// Counts every length-n window, n in [1, max_n], of every session.
  /// max_n must be >= 2.
  static CountTrie build(const Corpus& corpus, int max_n = 4);

  /// Exact occurrence count of `seq`; 0 if unseen. |seq| must be in [1, max_n].
  std::uint64_t count(std::span<const ItemId> seq) const;

  /// Items observed immediately after `prefix`, sorted by count descending,
  /// ties by ascending id. Empty prefix yields the unigram distribution.
  /// |prefix| must be <= max_n - 1. Unseen prefix yields an empty list.
  std::vector<ItemCount> followers(std::span<const ItemId> prefix) const;

  /// Sum of follower counts of `prefix`; total_unigrams() for the empty
  /// prefix. |prefix| must be <= max_n - 1.
  std::uint64_t continuation_total(std::span<const ItemId> prefix) const;

  std::uint64_t total_unigrams() const { return nodes_[0].children_total; }

  int max_n() const { return max_n_; }

  /// Size of the id universe this trie answers queries for.
  std::size_t vocab_size() const { return vocab_size_; }

  bool empty() const { return total_unigrams() == 0; }

 private:
  struct Node {
    std::uint64_t count = 0;
    std::uint64_t children_total = 0;
    std::uint32_t child_begin = 0;
    std::uint32_t child_end = 0;
  };

  static constexpr std::uint32_t kNoNode = 0xffffffffu;

  CountTrie() = default;

  /// Index of the node reached by `seq`, or kNoNode.
  std::uint32_t walk(std::span<const ItemId> seq) const;

  std::vector<Node> nodes_;  // nodes_[0] is the root
  std::vector<std::pair<ItemId, std::uint32_t>> children_;  // id-sorted slices
  int max_n_ = 4;
  std::size_t vocab_size_ = 0;

  friend class TrieBuilder;
  friend void write_counts_snapshot(const CountTrie&, const Vocabulary&,
                                    const std::filesystem::path&);
};

/// Parsed `NGRAM-COUNTS v1` file: (token sequence, count) entries in file order.
struct SnapshotData {
  std::vector<std::pair<std::vector<std::string>, std::uint64_t>> entries;
  int max_n = 4;
};

/// Writes the snapshot: header `NGRAM-COUNTS v1`, then one line per stored
/// n-gram, `n<TAB>tok1 ... tokn<TAB>count`, in depth-then-lexicographic
/// token order. Byte-exact for a given corpus.
void write_counts_snapshot(const CountTrie& trie, const Vocabulary& vocab,
                           const std::filesystem::path& path);

/// Throws std::runtime_error on a missing/invalid header or a malformed
/// line (the message names the line number).
SnapshotData read_counts_snapshot(const std::filesystem::path& path);

/// Vocabulary of the snapshot's unigram entries, ids in file order.
Vocabulary vocab_from_snapshot(const SnapshotData& snapshot);

/// Rebuilds the trie with ids resolved through `vocab`. Throws
/// std::runtime_error if a snapshot token is absent from `vocab`.
CountTrie trie_from_snapshot(const SnapshotData& snapshot, const Vocabulary& vocab);

}  // namespace betarank
