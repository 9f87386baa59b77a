#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "betarank/baselines.hpp"
#include "betarank/beta_net.hpp"
#include "betarank/corpus.hpp"
#include "betarank/count_trie.hpp"
#include "betarank/metrics.hpp"
#include "betarank/ranker.hpp"
#include "betarank/sampling.hpp"

namespace {

using namespace betarank;

struct SynthArgs {
  SyntheticSpec spec;
  std::string out;
};

int run_synth(const SynthArgs& args) {
  const auto [corpus, transitions] = generate_synthetic(args.spec);
  save_sessions(corpus, args.out);
  save_transitions(corpus, transitions, args.out + ".transitions");
  return 0;
}

int run_build_counts(const std::string& sessions, const std::string& out, int max_n) {
  const Corpus corpus = load_sessions(sessions);
  const CountTrie trie = CountTrie::build(corpus, max_n);
  write_counts_snapshot(trie, corpus.vocab, out);
  return 0;
}

int run_make_pairs(const std::string& sessions, const std::string& counts,
                   const std::string& out) {
  const Corpus corpus = load_sessions(sessions);
  const SnapshotData snapshot = read_counts_snapshot(counts);
  const Vocabulary counts_vocab = vocab_from_snapshot(snapshot);
  for (std::size_t id = 0; id < corpus.vocab.size(); ++id) {
    const std::string& token = corpus.vocab.token(static_cast<ItemId>(id));
    if (!counts_vocab.find(token)) {
      throw std::runtime_error("vocabulary mismatch: sessions token '" + token +
                               "' not in counts snapshot");
    }
  }
  const CountTrie trie = trie_from_snapshot(snapshot, corpus.vocab);
  const std::vector<TrainingPair> pairs = make_pairs(trie, corpus);
  write_pairs(pairs, out);
  return 0;
}

int run_train(const std::string& pairs_path, const std::string& out,
              const TrainConfig& cfg) {
  const std::vector<TrainingPair> pairs = read_pairs(pairs_path);
  if (pairs.empty()) throw std::runtime_error("empty pairs file: " + pairs_path);
  ModelPair model = init_model(cfg.seed, NetShape{.exp_clamp = cfg.exp_clamp});
  const TrainResult result = train(model, pairs, cfg);
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    std::printf("epoch %zu loss %.6f\n", e + 1, result.epoch_loss[e]);
  }
  save_model(model, out);
  return 0;
}

int run_evaluate(const std::string& sessions_test, const std::string& counts,
                 const std::string& model_path, const std::string& out,
                 std::size_t k, const std::string& baselines) {
  const SnapshotData snapshot = read_counts_snapshot(counts);
  // Test tokens unseen in training extend the vocabulary so their windows
  // are representable; the trie simply has no counts for them.
  const Corpus test = load_sessions(sessions_test, vocab_from_snapshot(snapshot));
  const CountTrie trie = trie_from_snapshot(snapshot, test.vocab);
  const ModelPair model = load_model(model_path);

  const std::vector<EvalInstance> instances = make_instances(test);
  if (instances.empty()) {
    throw std::runtime_error("no evaluable windows in " + sessions_test);
  }

  const BayesianPredictor bayesian(model, trie);
  const MarkovPredictor markov1(trie, 1), markov2(trie, 2), markov3(trie, 3);
  const ContextMaxPredictor context_max(trie);
  const MostPopularPredictor most_popular(trie);

  std::vector<const Predictor*> predictors{&bayesian};
  const auto wants = [&](std::string_view name) {
    if (baselines == "all") return true;
    std::istringstream list{baselines};
    for (std::string part; std::getline(list, part, ',');) {
      if (part == name) return true;
    }
    return false;
  };
  if (wants("markov-1")) predictors.push_back(&markov1);
  if (wants("markov-2")) predictors.push_back(&markov2);
  if (wants("markov-3")) predictors.push_back(&markov3);
  if (wants("context-max")) predictors.push_back(&context_max);
  if (wants("most-popular")) predictors.push_back(&most_popular);

  const EvalReport report = compare(predictors, instances, k);
  write_report_tsv(report, out);
  std::cout << format_report_table(report);
  return 0;
}

int run_recommend(const std::string& counts, const std::string& model_path,
                  const std::string& prefix_str, std::size_t k) {
  const SnapshotData snapshot = read_counts_snapshot(counts);
  const Vocabulary vocab = vocab_from_snapshot(snapshot);
  const CountTrie trie = trie_from_snapshot(snapshot, vocab);
  const ModelPair model = load_model(model_path);

  std::istringstream tokens(prefix_str);
  std::vector<ItemId> prefix;
  std::string token;
  while (tokens >> token) {
    const auto id = vocab.find(token);
    if (!id) {
      std::cerr << "unknown item token: " << token << '\n';
      return 2;
    }
    prefix.push_back(*id);
  }
  if (prefix.size() != 3) {
    throw std::runtime_error("--prefix must contain exactly 3 tokens");
  }

  const Ranking ranking =
      rank(model, trie, std::span<const ItemId, 3>(prefix.data(), 3), k);
  for (const ScoredItem& item : ranking.items) {
    std::printf("%s\t%.9f\t%d\n", vocab.token(item.item).c_str(), item.score,
                ranking.backoff_level);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Beta-prior next-item prediction toolchain"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* cmd_synth = app.add_subcommand(
      "synth", "Generate a synthetic session corpus with known transitions");
  cmd_synth->add_option("--items", synth.spec.num_items)->required();
  cmd_synth->add_option("--sessions", synth.spec.num_sessions)->required();
  cmd_synth->add_option("--min-len", synth.spec.min_len);
  cmd_synth->add_option("--max-len", synth.spec.max_len);
  cmd_synth->add_option("--concentration", synth.spec.concentration);
  cmd_synth->add_option("--seed", synth.spec.seed);
  cmd_synth->add_option("--out", synth.out)->required();

  std::string sessions, counts, pairs, model, out, prefix;
  std::string baselines = "all";
  int max_n = 4;
  std::size_t k = 20;
  TrainConfig cfg;

  auto* cmd_counts = app.add_subcommand(
      "build-counts", "Count all 1..max-n gram occurrences of a sessions file");
  cmd_counts->add_option("--sessions", sessions)->required();
  cmd_counts->add_option("--out", out)->required();
  cmd_counts->add_option("--max-n", max_n);

  auto* cmd_pairs = app.add_subcommand(
      "make-pairs", "Emit contrastive 16-count training instances");
  cmd_pairs->add_option("--sessions", sessions)->required();
  cmd_pairs->add_option("--counts", counts)->required();
  cmd_pairs->add_option("--out", out)->required();

  auto* cmd_train =
      app.add_subcommand("train", "Train the two prior-parameter networks");
  cmd_train->add_option("--pairs", pairs)->required();
  cmd_train->add_option("--out", out)->required();
  cmd_train->add_option("--epochs", cfg.epochs);
  cmd_train->add_option("--lr", cfg.learning_rate);
  cmd_train->add_option("--batch", cfg.batch_size);
  cmd_train->add_option("--margin", cfg.margin);
  cmd_train->add_option("--seed", cfg.seed);

  auto* cmd_eval = app.add_subcommand(
      "evaluate", "Compare the trained ranker against the frequency baselines");
  cmd_eval->add_option("--sessions-test", sessions)->required();
  cmd_eval->add_option("--counts", counts)->required();
  cmd_eval->add_option("--model", model)->required();
  cmd_eval->add_option("--out", out)->required();
  cmd_eval->add_option("--k", k);
  cmd_eval->add_option("--baselines", baselines);

  auto* cmd_rec =
      app.add_subcommand("recommend", "Rank continuations of a 3-item prefix");
  cmd_rec->add_option("--counts", counts)->required();
  cmd_rec->add_option("--model", model)->required();
  cmd_rec->add_option("--prefix", prefix)->required();
  cmd_rec->add_option("--k", k);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_synth->parsed()) return run_synth(synth);
    if (cmd_counts->parsed()) return run_build_counts(sessions, out, max_n);
    if (cmd_pairs->parsed()) return run_make_pairs(sessions, counts, out);
    if (cmd_train->parsed()) return run_train(pairs, out, cfg);
    if (cmd_eval->parsed()) {
      return run_evaluate(sessions, counts, model, out, k, baselines);
    }
    if (cmd_rec->parsed()) return run_recommend(counts, model, prefix, k);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
