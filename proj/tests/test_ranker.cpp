#include <doctest.h>

#include <set>

#include "betarank/ranker.hpp"
#include "support/oracles.hpp"

using namespace betarank;
using namespace betarank::testing;

namespace {

std::array<ItemId, 3> prefix3(ItemId a, ItemId b, ItemId c) { return {a, b, c}; }

/// Model whose posterior mean is 0.5 for every input (both nets zero).
ModelPair flat_model() {
  ModelPair m = init_model(0, NetShape{{8, 2, 2, 1}, 30.0});
  for (BetaNet* n : {&m.alpha, &m.beta}) {
    n->w1.setZero();
    n->w2.setZero();
    n->w3.setZero();
  }
  return m;
}

}  // namespace

TEST_CASE("candidates from the full prefix") {
  const CountTrie trie = CountTrie::build(t1_corpus());
  const auto set = candidates(trie, prefix3(0, 1, 2), 20);
  CHECK(set.items == std::vector<ItemId>{4, 3});  // e:3, d:2
  CHECK(set.backoff_level == 0);

  const auto top1 = candidates(trie, prefix3(0, 1, 2), 1);
  CHECK(top1.items == std::vector<ItemId>{4});
}

TEST_CASE("candidates back off through suffixes to the global list") {
  // T1 plus a session introducing x,y so they are real vocabulary items
  // that never form a prefix with c.
  Corpus corpus = t1_corpus();
  corpus.vocab.add("x");
  corpus.vocab.add("y");
  corpus.sessions.push_back({5, 6});
  const CountTrie trie = CountTrie::build(corpus);

  const auto level2 = candidates(trie, prefix3(5, 6, 2), 20);
  CHECK(level2.items == std::vector<ItemId>{4, 3});  // followers of (c)
  CHECK(level2.backoff_level == 2);

  // Ids beyond the vocabulary can still be queried; nothing follows them.
  const auto level3 = candidates(trie, prefix3(40, 41, 42), 20);
  CHECK(level3.backoff_level == 3);
  REQUIRE(!level3.items.empty());
  CHECK(level3.items.front() == ItemId{0});  // a leads the count-5 tie

  CHECK_THROWS_AS(candidates(CountTrie::build(Corpus{}), prefix3(0, 1, 2), 20),
                  std::runtime_error);
  CHECK_THROWS_AS(candidates(trie, prefix3(0, 1, 2), 0), std::invalid_argument);
}

TEST_CASE("backoff level is minimal on random corpora") {
  rng::SplitMix64 g(606);
  for (int round = 0; round < 20; ++round) {
    const Corpus corpus = random_corpus(g, 20, 8, 8);
    const CountTrie trie = CountTrie::build(corpus);
    if (trie.empty()) continue;
    const WindowOracle oracle(corpus);

    for (int q = 0; q < 20; ++q) {
      const auto pick = [&] {
        return static_cast<ItemId>(rng::uniform_below(g, corpus.vocab.size() + 2));
      };
      const auto prefix = prefix3(pick(), pick(), pick());
      const auto set = candidates(trie, prefix, 5);
      for (int level = 0; level < set.backoff_level; ++level) {
        const std::vector<ItemId> suffix(prefix.begin() + level, prefix.end());
        CHECK(oracle.followers(suffix).empty());
      }
    }
  }
}

TEST_CASE("rank scores candidates and orders ties by id") {
  const CountTrie trie = CountTrie::build(t1_corpus());
  const ModelPair model = flat_model();

  const Ranking ranking = rank(model, trie, prefix3(0, 1, 2), 20);
  REQUIRE(ranking.items.size() == 2);
  // Equal scores everywhere: ascending id order wins (d=3 before e=4).
  CHECK(ranking.items[0].item == ItemId{3});
  CHECK(ranking.items[1].item == ItemId{4});
  CHECK(ranking.items[0].score == ranking.items[1].score);
  CHECK(ranking.backoff_level == 0);

  const Ranking top1 = rank(model, trie, prefix3(0, 1, 2), 1);
  CHECK(top1.items.size() == 1);
}

TEST_CASE("ranking is a permutation of the candidate set with scores in (0,1)") {
  rng::SplitMix64 g(707);
  const NetShape small{{8, 10, 5, 1}, 30.0};
  for (int round = 0; round < 15; ++round) {
    const Corpus corpus = random_corpus(g, 25, 8, 10);
    const CountTrie trie = CountTrie::build(corpus);
    if (trie.empty()) continue;
    const ModelPair model = init_model(g.next(), small);

    const auto pick = [&] {
      return static_cast<ItemId>(rng::uniform_below(g, corpus.vocab.size()));
    };
    const auto prefix = prefix3(pick(), pick(), pick());
    const auto set = candidates(trie, prefix, 10);
    const Ranking ranking = rank(model, trie, prefix, 10);

    REQUIRE(ranking.items.size() == set.items.size());
    std::set<ItemId> from_rank, from_candidates(set.items.begin(), set.items.end());
    double previous = 1.0;
    for (const ScoredItem& s : ranking.items) {
      from_rank.insert(s.item);
      CHECK(s.score > 0.0);
      CHECK(s.score < 1.0);
      CHECK(s.score <= previous);
      previous = s.score;
    }
    CHECK(from_rank == from_candidates);
    CHECK(ranking.backoff_level == set.backoff_level);
  }
}

TEST_CASE("training on the fixture ranks the dominant continuation first") {
  const Corpus corpus = t1_corpus();
  const CountTrie trie = CountTrie::build(corpus);
  const auto pairs = make_pairs(trie, corpus);

  ModelPair model = init_model(11);
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.epochs = 120;
  cfg.batch_size = 8;
  train(model, pairs, cfg);

  const Ranking ranking = rank(model, trie, prefix3(0, 1, 2), 20);
  REQUIRE(ranking.items.size() == 2);
  CHECK(ranking.items[0].item == ItemId{4});  // e: more frequent, majority positive
  CHECK(ranking.items[0].score > ranking.items[1].score);
}
