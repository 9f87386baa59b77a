#include "betarank/sampling.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string_view>

namespace betarank {

namespace {

constexpr std::string_view kPairsHeader = "PAIRS v1";

/// Most popular follower of `prefix` that is not `excluded`, if any.
std::optional<ItemId> best_follower_excluding(const CountTrie& trie,
                                              std::span<const ItemId> prefix,
                                              ItemId excluded) {
  for (const auto& f : trie.followers(prefix)) {
    if (f.item != excluded) return f.item;
  }
  return std::nullopt;
}

}  // namespace

ItemId select_negative(const CountTrie& trie, std::span<const ItemId, 3> prefix,
                       ItemId pos_item) {
  const auto followers = trie.followers(prefix);
  if (!followers.empty()) {
    if (followers.front().item != pos_item) return followers.front().item;
    if (followers.size() > 1) return followers[1].item;
  }
  // Degenerate prefix: back off through shorter suffixes, then global
  // popularity, so the positive window stays usable.
  for (std::size_t from = 1; from <= 3; ++from) {
    const auto candidate =
        best_follower_excluding(trie, prefix.subspan(from), pos_item);
    if (candidate) return *candidate;
  }
  throw std::runtime_error("select_negative: no alternative item exists");
}

std::vector<TrainingPair> make_pairs(const CountTrie& trie, const Corpus& corpus) {
  std::vector<TrainingPair> pairs;
  for (const Session& session : corpus.sessions) {
    if (session.size() < kWindowSize) continue;
    for (std::size_t start = 0; start + kWindowSize <= session.size(); ++start) {
      TrainingPair pair;
      std::copy_n(session.begin() + static_cast<std::ptrdiff_t>(start), kWindowSize,
                  pair.pos_window.begin());
      pair.neg_window = pair.pos_window;
      pair.neg_window[3] = select_negative(
          trie, std::span<const ItemId, 3>(pair.pos_window.data(), 3),
          pair.pos_window[3]);
      pair.pos = count_features(trie, pair.pos_window);
      pair.neg = count_features(trie, pair.neg_window);
      pairs.push_back(pair);
    }
  }
  return pairs;
}

void write_pairs(std::span<const TrainingPair> pairs,
                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());
  out << kPairsHeader << '\n';
  for (const TrainingPair& p : pairs) {
    for (int k = 0; k < 4; ++k) out << p.pos.pos[k] << ' ';
    for (int k = 0; k < 4; ++k) out << p.pos.neg[k] << ' ';
    for (int k = 0; k < 4; ++k) out << p.neg.pos[k] << ' ';
    for (int k = 0; k < 4; ++k) out << p.neg.neg[k] << (k == 3 ? '\n' : ' ');
  }
  if (!out) throw std::runtime_error("I/O error writing " + path.string());
}

std::vector<TrainingPair> read_pairs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pairs file: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kPairsHeader) {
    throw std::runtime_error("bad pairs header in " + path.string());
  }

  std::vector<TrainingPair> pairs;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::array<std::uint64_t, 16> values;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    std::size_t got = 0;
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      if (got == 16) {
        ++got;  // too many fields
        break;
      }
      auto [next, ec] = std::from_chars(p, end, values[got]);
      if (ec != std::errc{} || (next < end && *next != ' ')) {
        got = 0;
        break;
      }
      ++got;
      p = next;
    }
    if (got != 16) {
      throw std::runtime_error(path.string() + " line " + std::to_string(lineno) +
                               ": expected 16 integer fields");
    }
    TrainingPair pair;
    for (std::size_t k = 0; k < 4; ++k) {
      pair.pos.pos[k] = values[k];
      pair.pos.neg[k] = values[k + 4];
      pair.neg.pos[k] = values[k + 8];
      pair.neg.neg[k] = values[k + 12];
    }
    pairs.push_back(pair);
  }
  if (in.bad()) throw std::runtime_error("I/O error reading " + path.string());
  return pairs;
}

}  // namespace betarank
