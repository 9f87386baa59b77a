#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "betarank/types.hpp"

namespace betarank {

/// Bijective token <-> id mapping. Ids are dense and assigned in
/// first-appearance order.
class Vocabulary {
 public:
  /// Returns the id of `token`, adding it if unseen.
  ItemId add(std::string_view token);

  std::optional<ItemId> find(std::string_view token) const;

  const std::string& token(ItemId id) const;

  std::size_t size() const { return tokens_.size(); }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, ItemId> ids_;
};

struct Corpus {
  std::vector<Session> sessions;
  Vocabulary vocab;
};

/// Parameters of the seeded synthetic corpus generator.
struct SyntheticSpec {
  std::size_t num_items = 0;
  std::size_t num_sessions = 0;
  std::size_t min_len = 5;   // must be >= 4 so every session yields a window
  std::size_t max_len = 12;
  int markov_order = 1;      // only first-order chains are generated
  double concentration = 0.3;
  std::uint64_t seed = 1;
};

/// Row-stochastic transition matrix, indexed [from][to].
using TransitionMatrix = std::vector<std::vector<double>>;

/// Reads a sessions file: one session per line, whitespace-separated
/// tokens, '#'-prefixed comment lines and blank lines skipped.
/// Throws std::runtime_error on I/O failure or malformed UTF-8 (the
/// message names the offending line).
Corpus load_sessions(const std::filesystem::path& path);

/// Like load_sessions but resolves tokens against `base`, extending it
/// with unseen tokens in first-appearance order.
Corpus load_sessions(const std::filesystem::path& path, Vocabulary base);

void save_sessions(const Corpus& corpus, const std::filesystem::path& path);

/// Session-level split. |test| = round(test_fraction * |sessions|);
/// both halves share the corpus vocabulary. Throws std::invalid_argument
/// if either side would be empty.
std::pair<Corpus, Corpus> split(const Corpus& corpus, double test_fraction,
                                std::uint64_t seed);

/// Samples sessions from a first-order Markov chain whose rows are drawn
/// from a symmetric Dirichlet(concentration). Deterministic given the seed.
std::pair<Corpus, TransitionMatrix> generate_synthetic(const SyntheticSpec& spec);

/// One line per item: `token<TAB>p0 p1 ... p(V-1)`, 9 significant digits.
void save_transitions(const Corpus& corpus, const TransitionMatrix& transitions,
                      const std::filesystem::path& path);

}  // namespace betarank
