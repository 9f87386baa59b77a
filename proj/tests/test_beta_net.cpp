#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>

#include "betarank/beta_net.hpp"
#include "support/oracles.hpp"

using namespace betarank;
using namespace betarank::testing;

namespace {

struct Chunk {
  double* data;
  std::ptrdiff_t size;
};

std::vector<Chunk> net_chunks(BetaNet& n) {
  return {{n.w1.data(), n.w1.size()}, {n.b1.data(), n.b1.size()},
          {n.w2.data(), n.w2.size()}, {n.b2.data(), n.b2.size()},
          {n.w3.data(), n.w3.size()}, {n.b3.data(), n.b3.size()}};
}

std::vector<Chunk> grad_chunks(NetGradients& g) {
  return {{g.w1.data(), g.w1.size()}, {g.b1.data(), g.b1.size()},
          {g.w2.data(), g.w2.size()}, {g.b2.data(), g.b2.size()},
          {g.w3.data(), g.w3.size()}, {g.b3.data(), g.b3.size()}};
}

std::uint64_t model_checksum(ModelPair& m) {
  std::string bytes;
  for (BetaNet* n : {&m.alpha, &m.beta}) {
    for (const Chunk& c : net_chunks(*n)) {
      bytes.append(reinterpret_cast<const char*>(c.data),
                   static_cast<std::size_t>(c.size) * sizeof(double));
    }
  }
  return fnv1a(bytes);
}

bool models_equal(ModelPair& a, ModelPair& b) {
  return model_checksum(a) == model_checksum(b);
}

/// All-zero net of the given shape; forward output is exp(0) = 1.
BetaNet zero_net(const NetShape& shape) {
  BetaNet n = init_model(0, shape).alpha;
  for (const Chunk& c : net_chunks(n)) std::fill(c.data, c.data + c.size, 0.0);
  return n;
}

/// Net computing value --> constant through a zero body and b3 = ln(value).
BetaNet constant_net(double value, const NetShape& shape) {
  BetaNet n = zero_net(shape);
  n.b3(0) = std::log(value);
  return n;
}

TrainingPair pair_with_counts(std::uint64_t pos0, std::uint64_t neg0) {
  TrainingPair p;
  p.pos.pos = {pos0, 0, 0, 0};
  p.neg.pos = {neg0, 0, 0, 0};
  return p;
}

TrainingPair random_pair(rng::SplitMix64& g, std::uint64_t max_count) {
  TrainingPair p;
  for (int k = 0; k < 4; ++k) {
    p.pos.pos[k] = rng::uniform_below(g, max_count + 1);
    p.pos.neg[k] = rng::uniform_below(g, max_count + 1);
    p.neg.pos[k] = rng::uniform_below(g, max_count + 1);
    p.neg.neg[k] = rng::uniform_below(g, max_count + 1);
  }
  return p;
}

}  // namespace

TEST_CASE("init is seed-deterministic with distinct nets per seed") {
  ModelPair a = init_model(42);
  ModelPair b = init_model(42);
  ModelPair c = init_model(43);

  CHECK(models_equal(a, b));
  CHECK(model_checksum(a) != model_checksum(c));
  CHECK(!a.alpha.w1.isApprox(a.beta.w1));  // independent parameter streams
  CHECK(a.alpha.b1.isZero(0.0));
}

TEST_CASE("zero-parameter net outputs exactly one") {
  const BetaNet n = zero_net(NetShape{});
  FeatureVector z{1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0};
  CHECK(forward(n, z) == 1.0);
}

TEST_CASE("forward output is positive and finite for random draws") {
  rng::SplitMix64 g(9);
  const NetShape small{{8, 16, 8, 1}, 30.0};
  for (int round = 0; round < 1000; ++round) {
    const ModelPair m =
        init_model(g.next(), round % 100 == 0 ? NetShape{} : small);
    FeatureVector z;
    for (double& v : z) {
      v = std::log1p(static_cast<double>(rng::uniform_below(g, 1000000)));
    }
    const double a = forward(m.alpha, z);
    CHECK(a > 0.0);
    CHECK(std::isfinite(a));
  }
}

TEST_CASE("clamped exponential caps the contribution without overflow") {
  BetaNet n = zero_net(NetShape{{8, 2, 2, 1}, 30.0});
  n.b1(0) = 100.0;   // pre-activation far beyond the clamp
  n.w2(0, 0) = 1.0;
  n.w3(0, 0) = 1.0;
  FeatureVector z{};
  const double out = forward(n, z);
  CHECK(std::isfinite(out));
  CHECK(out == std::exp(30.0));
}

TEST_CASE("forward rejects non-finite input") {
  const BetaNet n = zero_net(NetShape{});
  FeatureVector z{};
  z[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(forward(n, z), std::invalid_argument);
}

TEST_CASE("posterior mean") {
  CHECK(posterior_mean(1.0, 1.0) == 0.5);
  CHECK(posterior_mean(3.0, 1.0) == 0.75);
  for (double a : {0.1, 1.0, 7.5, 1e6}) CHECK(posterior_mean(a, a) == 0.5);

  CHECK_THROWS_AS(posterior_mean(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(posterior_mean(1.0, -2.0), std::invalid_argument);
  CHECK_THROWS_AS(posterior_mean(std::numeric_limits<double>::infinity(), 1.0),
                  std::invalid_argument);

  CHECK(posterior_mean_gradient(2.0, 2.0).first == 0.125);
  CHECK(posterior_mean_gradient(2.0, 2.0).second == -0.125);
}

TEST_CASE("pair loss equals the hinge of the posterior-mean difference") {
  const NetShape tiny{{8, 1, 1, 1}, 30.0};
  TrainConfig cfg;

  SUBCASE("identical branches give diff 0 and loss = margin") {
    ModelPair m{constant_net(2.0, tiny), constant_net(5.0, tiny)};
    const auto [loss, diff] = pair_loss(m, TrainingPair{}, cfg);
    CHECK(diff == 0.0);
    CHECK(loss == cfg.margin);
  }

  SUBCASE("input-sensitive alpha net produces the hinge values") {
    // alpha(z) = exp(ln3 * e^{z0}): 3 for count 0, 9 for count 1; beta = 1.
    BetaNet alpha = zero_net(tiny);
    alpha.w1(0, 0) = 1.0;
    alpha.w2(0, 0) = 1.0;
    alpha.w3(0, 0) = std::log(3.0);
    ModelPair m{alpha, constant_net(1.0, tiny)};

    // mu+ = 3/4, mu- = 9/10: diff -0.15, loss 1.15.
    const auto neg_case = pair_loss(m, pair_with_counts(0, 1), cfg);
    CHECK(neg_case.diff == doctest::Approx(-0.15).epsilon(1e-12));
    CHECK(neg_case.loss == doctest::Approx(1.15).epsilon(1e-12));

    // Swapped branches: diff +0.15; a margin below the gap zeroes the loss.
    const auto pos_case = pair_loss(m, pair_with_counts(1, 0), cfg);
    CHECK(pos_case.diff == doctest::Approx(0.15).epsilon(1e-12));
    CHECK(pos_case.loss == doctest::Approx(0.85).epsilon(1e-12));

    TrainConfig slack = cfg;
    slack.margin = 0.1;
    CHECK(pair_loss(m, pair_with_counts(1, 0), slack).loss == 0.0);
  }

  SUBCASE("bounds for margin 1: loss in [0,2], diff in (-1,1)") {
    rng::SplitMix64 g(123);
    for (int round = 0; round < 200; ++round) {
      const ModelPair m = init_model(g.next(), NetShape{{8, 12, 6, 1}, 30.0});
      const auto [loss, diff] = pair_loss(m, random_pair(g, 5000), cfg);
      CHECK(loss >= 0.0);
      CHECK(loss <= 2.0);
      CHECK(diff > -1.0);
      CHECK(diff < 1.0);
      CHECK(loss == std::max(0.0, cfg.margin - cfg.y_true * diff));
    }
  }
}

TEST_CASE("backward returns exact zeros when the hinge is inactive") {
  const NetShape tiny{{8, 1, 1, 1}, 30.0};
  BetaNet alpha = zero_net(tiny);
  alpha.w1(0, 0) = 1.0;
  alpha.w2(0, 0) = 1.0;
  alpha.w3(0, 0) = std::log(3.0);
  ModelPair m{alpha, constant_net(1.0, tiny)};

  TrainConfig cfg;
  cfg.margin = 0.1;  // diff 0.15 clears it
  REQUIRE(pair_loss(m, pair_with_counts(1, 0), cfg).loss == 0.0);

  ModelGradients g = backward(m, pair_with_counts(1, 0), cfg);
  for (NetGradients* ng : {&g.alpha, &g.beta}) {
    for (const Chunk& c : grad_chunks(*ng)) {
      for (std::ptrdiff_t i = 0; i < c.size; ++i) CHECK(c.data[i] == 0.0);
    }
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  const NetShape shape{{8, 5, 3, 1}, 1e9};  // clamp disabled in the test range
  TrainConfig cfg;
  cfg.exp_clamp = shape.exp_clamp;

  rng::SplitMix64 g(314);
  const double eps = 1e-5;
  for (int round = 0; round < 5; ++round) {
    ModelPair m = init_model(g.next(), shape);
    for (BetaNet* n : {&m.alpha, &m.beta}) {
      for (const Chunk& c : net_chunks(*n)) {
        for (std::ptrdiff_t i = 0; i < c.size; ++i) c.data[i] *= 0.25;
      }
    }
    const TrainingPair pair = random_pair(g, 30);

    ModelGradients analytic = backward(m, pair, cfg);
    std::vector<Chunk> params = net_chunks(m.alpha);
    for (const Chunk& c : net_chunks(m.beta)) params.push_back(c);
    std::vector<Chunk> grads = grad_chunks(analytic.alpha);
    for (const Chunk& c : grad_chunks(analytic.beta)) grads.push_back(c);

    for (std::size_t t = 0; t < params.size(); ++t) {
      for (std::ptrdiff_t i = 0; i < params[t].size; ++i) {
        const double saved = params[t].data[i];
        params[t].data[i] = saved + eps;
        const double up = pair_loss(m, pair, cfg).loss;
        params[t].data[i] = saved - eps;
        const double down = pair_loss(m, pair, cfg).loss;
        params[t].data[i] = saved;

        const double fd = (up - down) / (2.0 * eps);
        const double an = grads[t].data[i];
        const double tol = 1e-8 + 1e-4 * std::max(std::abs(fd), std::abs(an));
        CHECK(std::abs(fd - an) <= tol);
      }
    }
  }
}

TEST_CASE("training drives a single free pair toward the margin") {
  const Corpus corpus = t1_corpus();
  const CountTrie trie = CountTrie::build(corpus);
  const auto pairs = make_pairs(trie, corpus);
  const std::vector<TrainingPair> one{pairs[2]};  // pos = abce, neg = abcd

  ModelPair model = init_model(7);
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.epochs = 1200;
  cfg.batch_size = 1;
  const TrainResult result = train(model, one, cfg);

  REQUIRE(result.epoch_loss.size() == cfg.epochs);
  CHECK(result.epoch_loss.back() <= result.epoch_loss.front());
  CHECK(result.epoch_loss.back() < 0.05);
}

TEST_CASE("zero epochs leave the model at init") {
  ModelPair model = init_model(5, NetShape{{8, 6, 4, 1}, 30.0});
  ModelPair reference = init_model(5, NetShape{{8, 6, 4, 1}, 30.0});
  rng::SplitMix64 g(1);
  std::vector<TrainingPair> pairs{random_pair(g, 50)};

  TrainConfig cfg;
  cfg.epochs = 0;
  const TrainResult result = train(model, pairs, cfg);
  CHECK(result.epoch_loss.empty());
  CHECK(models_equal(model, reference));
}

TEST_CASE("training is deterministic for a fixed config") {
  rng::SplitMix64 g(88);
  std::vector<TrainingPair> pairs;
  for (int i = 0; i < 40; ++i) pairs.push_back(random_pair(g, 200));

  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 16;
  cfg.seed = 9;

  const NetShape shape{{8, 10, 5, 1}, 30.0};
  ModelPair a = init_model(4, shape);
  ModelPair b = init_model(4, shape);
  train(a, pairs, cfg);
  train(b, pairs, cfg);
  CHECK(models_equal(a, b));

  ModelPair c = init_model(4, shape);
  TrainConfig other = cfg;
  other.seed = 10;
  train(c, pairs, other);
  CHECK(model_checksum(a) != model_checksum(c));
}

TEST_CASE("training rejects an empty pair list") {
  ModelPair model = init_model(1, NetShape{{8, 4, 2, 1}, 30.0});
  TrainConfig cfg;
  CHECK_THROWS_AS(train(model, {}, cfg), std::invalid_argument);
}

TEST_CASE("a non-finite loss aborts naming the batch") {
  const NetShape tiny{{8, 2, 2, 1}, 30.0};
  ModelPair model = init_model(2, tiny);
  // h2 = (2, 2); w3 = (1e308, -1e308) makes a3 = inf - inf = NaN.
  model.alpha.w2.setZero();
  model.alpha.b2 << 2.0, 2.0;
  model.alpha.w3 << 1e308, -1e308;

  rng::SplitMix64 g(3);
  std::vector<TrainingPair> pairs{random_pair(g, 10)};
  TrainConfig cfg;
  cfg.epochs = 1;
  try {
    train(model, pairs, cfg);
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("batch 0") != std::string::npos);
  }
}

TEST_CASE("model file round trip") {
  TempDir dir("betarank_model");
  const NetShape shape{{8, 5, 3, 1}, 30.0};
  ModelPair model = init_model(21, shape);
  save_model(model, dir.file("m.txt"));

  ModelPair loaded = load_model(dir.file("m.txt"));
  CHECK(models_equal(model, loaded));
  CHECK(loaded.alpha.exp_clamp == 30.0);

  rng::SplitMix64 g(6);
  for (int round = 0; round < 100; ++round) {
    FeatureVector z;
    for (double& v : z) v = rng::uniform(g, 0.0, 10.0);
    CHECK(forward(model.alpha, z) == forward(loaded.alpha, z));
    CHECK(forward(model.beta, z) == forward(loaded.beta, z));
  }

  save_model(loaded, dir.file("m2.txt"));
  CHECK(slurp(dir.file("m2.txt")) == slurp(dir.file("m.txt")));
}

TEST_CASE("model load failure modes") {
  TempDir dir("betarank_model_bad");
  const NetShape shape{{8, 4, 3, 1}, 30.0};
  ModelPair model = init_model(33, shape);
  save_model(model, dir.file("m.txt"));
  const std::string bytes = slurp(dir.file("m.txt"));

  {
    std::ofstream out(dir.file("trunc.txt"), std::ios::binary);
    out << bytes.substr(0, bytes.size() / 2);
  }
  CHECK_THROWS_AS(load_model(dir.file("trunc.txt")), std::runtime_error);

  {
    std::string tampered = bytes;
    tampered.replace(tampered.find("BETANET v1"), 10, "BETANET v9");
    std::ofstream out(dir.file("version.txt"), std::ios::binary);
    out << tampered;
  }
  CHECK_THROWS_AS(load_model(dir.file("version.txt")), std::runtime_error);

  {
    std::string tampered = bytes;
    tampered.replace(tampered.find("W1 8 4"), 6, "W1 8 9");
    std::ofstream out(dir.file("dims.txt"), std::ios::binary);
    out << tampered;
  }
  CHECK_THROWS_AS(load_model(dir.file("dims.txt")), std::runtime_error);

  CHECK_THROWS_AS(load_model(dir.file("missing.txt")), std::runtime_error);
}
