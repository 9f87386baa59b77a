#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "betarank/beta_net.hpp"
#include "betarank/count_trie.hpp"
#include "betarank/types.hpp"

namespace betarank {

/// Uniform interface over the ranked-list predictors: given a prefix of up
/// to 3 items and k, return a ranked list of <= k unique items.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::vector<ItemId> predict(std::span<const ItemId> prefix,
                                      std::size_t k) const = 0;
  virtual std::string_view name() const = 0;
};

/// n-order Markov prediction: followers of the last-n suffix in frequency
/// order, retrying with order n-1 when nothing is found, down to global
/// popularity below order 1.
std::vector<ItemId> markov_predict(const CountTrie& trie,
                                   std::span<const ItemId> prefix, int order,
                                   std::size_t k);

/// Most popular items seen after the full 3-item prefix, with the same
/// backoff as the order-3 Markov chain.
std::vector<ItemId> context_max_predict(const CountTrie& trie,
                                        std::span<const ItemId> prefix,
                                        std::size_t k);

/// Global unigram top-k, independent of the prefix. Throws
/// std::runtime_error on an empty trie.
std::vector<ItemId> most_popular_predict(const CountTrie& trie, std::size_t k);

class MarkovPredictor final : public Predictor {
 public:
  MarkovPredictor(const CountTrie& trie, int order)
      : trie_(trie), order_(order), name_("markov-" + std::to_string(order)) {}
  std::vector<ItemId> predict(std::span<const ItemId> prefix,
                              std::size_t k) const override {
    return markov_predict(trie_, prefix, order_, k);
  }
  std::string_view name() const override { return name_; }

 private:
  const CountTrie& trie_;
  int order_;
  std::string name_;
};

class ContextMaxPredictor final : public Predictor {
 public:
  explicit ContextMaxPredictor(const CountTrie& trie) : trie_(trie) {}
  std::vector<ItemId> predict(std::span<const ItemId> prefix,
                              std::size_t k) const override {
    return context_max_predict(trie_, prefix, k);
  }
  std::string_view name() const override { return "context-max"; }

 private:
  const CountTrie& trie_;
};

class MostPopularPredictor final : public Predictor {
 public:
  explicit MostPopularPredictor(const CountTrie& trie) : trie_(trie) {}
  std::vector<ItemId> predict(std::span<const ItemId>, std::size_t k) const override {
    return most_popular_predict(trie_, k);
  }
  std::string_view name() const override { return "most-popular"; }

 private:
  const CountTrie& trie_;
};

/// The learned ranker behind the Predictor interface.
class BayesianPredictor final : public Predictor {
 public:
  BayesianPredictor(const ModelPair& model, const CountTrie& trie)
      : model_(model), trie_(trie) {}
  std::vector<ItemId> predict(std::span<const ItemId> prefix,
                              std::size_t k) const override;
  std::string_view name() const override { return "bayesian"; }

 private:
  const ModelPair& model_;
  const CountTrie& trie_;
};

}  // namespace betarank
