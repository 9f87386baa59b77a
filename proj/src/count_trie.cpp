#include "betarank/count_trie.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace betarank {

namespace {

struct BuildNode {
  std::uint64_t count = 0;
  std::map<ItemId, std::unique_ptr<BuildNode>> children;

  BuildNode* child(ItemId item) {
    auto& slot = children[item];
    if (!slot) slot = std::make_unique<BuildNode>();
    return slot.get();
  }
};

constexpr std::string_view kSnapshotHeader = "NGRAM-COUNTS v1";

}  // namespace

class TrieBuilder {
 public:
  BuildNode root;

  /// Adds one sliding-window start: increments every prefix of
  /// seq[0..depth) for depth = 1..|seq|.
  void add_window(std::span<const ItemId> seq) {
    BuildNode* node = &root;
    for (ItemId item : seq) {
      node = node->child(item);
      node->count += 1;
    }
  }

  void add_count(std::span<const ItemId> seq, std::uint64_t count) {
    BuildNode* node = &root;
    for (ItemId item : seq) node = node->child(item);
    node->count += count;
  }

  CountTrie freeze(int max_n, std::size_t vocab_size) const {
    CountTrie trie;
    trie.max_n_ = max_n;
    trie.vocab_size_ = vocab_size;

    // Breadth-first layout; each node's children occupy one id-sorted slice.
    trie.nodes_.emplace_back();
    std::vector<const BuildNode*> pending{&root};
    trie.nodes_[0].count = root.count;
    for (std::size_t i = 0; i < pending.size(); ++i) {
      const BuildNode* src = pending[i];
      trie.nodes_[i].child_begin = static_cast<std::uint32_t>(trie.children_.size());
      for (const auto& [item, child] : src->children) {
        const auto child_index = static_cast<std::uint32_t>(pending.size());
        trie.children_.emplace_back(item, child_index);
        pending.push_back(child.get());
        trie.nodes_.emplace_back().count = child->count;  // may reallocate nodes_
        trie.nodes_[i].children_total += child->count;
      }
      trie.nodes_[i].child_end = static_cast<std::uint32_t>(trie.children_.size());
    }
    return trie;
  }
};

CountTrie CountTrie::build(const Corpus& corpus, int max_n) {
  if (max_n < 2) throw std::invalid_argument("CountTrie::build: max_n must be >= 2");
  TrieBuilder builder;
  for (const Session& session : corpus.sessions) {
    const std::size_t len = session.size();
    for (std::size_t start = 0; start < len; ++start) {
      const std::size_t depth = std::min<std::size_t>(max_n, len - start);
      builder.add_window(std::span(session).subspan(start, depth));
    }
  }
  return builder.freeze(max_n, corpus.vocab.size());
}

std::uint32_t CountTrie::walk(std::span<const ItemId> seq) const {
  std::uint32_t node = 0;
  for (ItemId item : seq) {
    const Node& n = nodes_[node];
    const auto begin = children_.begin() + n.child_begin;
    const auto end = children_.begin() + n.child_end;
    const auto it = std::lower_bound(
        begin, end, item, [](const auto& c, ItemId x) { return c.first < x; });
    if (it == end || it->first != item) return kNoNode;
    node = it->second;
  }
  return node;
}

std::uint64_t CountTrie::count(std::span<const ItemId> seq) const {
  if (seq.empty() || seq.size() > static_cast<std::size_t>(max_n_)) {
    throw std::invalid_argument("CountTrie::count: |seq| must be in [1, max_n]");
  }
  const std::uint32_t node = walk(seq);
  return node == kNoNode ? 0 : nodes_[node].count;
}

std::vector<CountTrie::ItemCount> CountTrie::followers(
    std::span<const ItemId> prefix) const {
  if (prefix.size() > static_cast<std::size_t>(max_n_ - 1)) {
    throw std::invalid_argument("CountTrie::followers: |prefix| must be <= max_n - 1");
  }
  const std::uint32_t node = walk(prefix);
  std::vector<ItemCount> result;
  if (node == kNoNode) return result;
  const Node& n = nodes_[node];
  result.reserve(n.child_end - n.child_begin);
  for (std::uint32_t c = n.child_begin; c < n.child_end; ++c) {
    result.push_back({children_[c].first, nodes_[children_[c].second].count});
  }
  std::sort(result.begin(), result.end(), [](const ItemCount& a, const ItemCount& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.item < b.item;
  });
  return result;
}

std::uint64_t CountTrie::continuation_total(std::span<const ItemId> prefix) const {
  if (prefix.size() > static_cast<std::size_t>(max_n_ - 1)) {
    throw std::invalid_argument(
        "CountTrie::continuation_total: |prefix| must be <= max_n - 1");
  }
  const std::uint32_t node = walk(prefix);
  return node == kNoNode ? 0 : nodes_[node].children_total;
}

void write_counts_snapshot(const CountTrie& trie, const Vocabulary& vocab,
                           const std::filesystem::path& path) {
  // Collect (token path, count) per depth, then emit depth-major with
  // lexicographic token order inside each depth.
  std::vector<std::vector<std::pair<std::vector<std::string>, std::uint64_t>>>
      by_depth(static_cast<std::size_t>(trie.max_n()) + 1);

  struct Frame {
    std::uint32_t node;
    std::uint32_t next_child;
  };
  std::vector<Frame> stack{{0, trie.nodes_[0].child_begin}};
  std::vector<std::string> tokens;
  while (!stack.empty()) {
    Frame& frame = stack.back();
    const CountTrie::Node& n = trie.nodes_[frame.node];
    if (frame.next_child >= n.child_end) {
      stack.pop_back();
      if (!tokens.empty()) tokens.pop_back();
      continue;
    }
    const auto [item, child] = trie.children_[frame.next_child++];
    tokens.push_back(vocab.token(item));
    by_depth[tokens.size()].emplace_back(tokens, trie.nodes_[child].count);
    stack.push_back({child, trie.nodes_[child].child_begin});
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());
  out << kSnapshotHeader << '\n';
  for (std::size_t depth = 1; depth < by_depth.size(); ++depth) {
    auto& bucket = by_depth[depth];
    std::sort(bucket.begin(), bucket.end());
    for (const auto& [toks, count] : bucket) {
      out << depth << '\t';
      for (std::size_t i = 0; i < toks.size(); ++i) {
        if (i) out << ' ';
        out << toks[i];
      }
      out << '\t' << count << '\n';
    }
  }
  if (!out) throw std::runtime_error("I/O error writing " + path.string());
}

SnapshotData read_counts_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open counts snapshot: " + path.string());

  std::string line;
  if (!std::getline(in, line) || line != kSnapshotHeader) {
    throw std::runtime_error("bad counts snapshot header in " + path.string());
  }

  SnapshotData snapshot;
  int seen_max_n = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fail = [&](const char* what) {
      throw std::runtime_error(path.string() + " line " + std::to_string(lineno) +
                               ": " + what);
    };
    const std::size_t tab1 = line.find('\t');
    const std::size_t tab2 = line.find('\t', tab1 + 1);
    if (tab1 == std::string::npos || tab2 == std::string::npos) {
      fail("expected 3 tab-separated fields");
    }
    int n = 0;
    auto [p1, e1] = std::from_chars(line.data(), line.data() + tab1, n);
    if (e1 != std::errc{} || p1 != line.data() + tab1 || n < 1) fail("bad n field");
    std::uint64_t count = 0;
    auto [p2, e2] =
        std::from_chars(line.data() + tab2 + 1, line.data() + line.size(), count);
    if (e2 != std::errc{} || p2 != line.data() + line.size()) fail("bad count field");

    std::istringstream toks(line.substr(tab1 + 1, tab2 - tab1 - 1));
    std::vector<std::string> tokens;
    std::string tok;
    while (toks >> tok) tokens.push_back(std::move(tok));
    if (tokens.size() != static_cast<std::size_t>(n)) fail("token count != n");

    seen_max_n = std::max(seen_max_n, n);
    snapshot.entries.emplace_back(std::move(tokens), count);
  }
  if (in.bad()) throw std::runtime_error("I/O error reading " + path.string());
  snapshot.max_n = std::max(seen_max_n, 4);
  return snapshot;
}

Vocabulary vocab_from_snapshot(const SnapshotData& snapshot) {
  Vocabulary vocab;
  for (const auto& [tokens, count] : snapshot.entries) {
    if (tokens.size() == 1) vocab.add(tokens[0]);
  }
  return vocab;
}

CountTrie trie_from_snapshot(const SnapshotData& snapshot, const Vocabulary& vocab) {
  TrieBuilder builder;
  std::vector<ItemId> ids;
  for (const auto& [tokens, count] : snapshot.entries) {
    ids.clear();
    for (const std::string& tok : tokens) {
      const auto id = vocab.find(tok);
      if (!id) {
        throw std::runtime_error("vocabulary mismatch: snapshot token '" + tok +
                                 "' not in sessions vocabulary");
      }
      ids.push_back(*id);
    }
    builder.add_count(ids, count);
  }
  return builder.freeze(snapshot.max_n, vocab.size());
}

}  // namespace betarank
