#include "betarank/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "betarank/rng.hpp"

namespace betarank {
namespace {

bool is_valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t need;
    unsigned lo = 0x80, hi = 0xbf;  // allowed range of the first continuation byte
    if (c < 0x80) {
      ++i;
      continue;
    } else if (c >= 0xc2 && c <= 0xdf) {
      need = 1;
    } else if (c == 0xe0) {
      need = 2;
      lo = 0xa0;  // reject overlong
    } else if (c == 0xed) {
      need = 2;
      hi = 0x9f;  // reject surrogates
    } else if ((c & 0xf0) == 0xe0) {
      need = 2;
    } else if (c == 0xf0) {
      need = 3;
      lo = 0x90;  // reject overlong
    } else if (c == 0xf4) {
      need = 3;
      hi = 0x8f;  // reject beyond U+10FFFF
    } else if (c == 0xf1 || c == 0xf2 || c == 0xf3) {
      need = 3;
    } else {
      return false;  // 0x80..0xc1, 0xf5..0xff can never start a sequence
    }
    if (i + need >= s.size()) return false;
    const auto c1 = static_cast<unsigned char>(s[i + 1]);
    if (c1 < lo || c1 > hi) return false;
    for (std::size_t k = 2; k <= need; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) & 0xc0) != 0x80) return false;
    }
    i += need + 1;
  }
  return true;
}

}  // namespace

ItemId Vocabulary::add(std::string_view token) {
  auto it = ids_.find(std::string(token));
  if (it != ids_.end()) return it->second;
  const auto id = static_cast<ItemId>(tokens_.size());
  tokens_.emplace_back(token);
  ids_.emplace(tokens_.back(), id);
  return id;
}

std::optional<ItemId> Vocabulary::find(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::token(ItemId id) const {
  if (id >= tokens_.size()) throw std::out_of_range("Vocabulary::token: bad id");
  return tokens_[id];
}

Corpus load_sessions(const std::filesystem::path& path) {
  return load_sessions(path, Vocabulary{});
}

Corpus load_sessions(const std::filesystem::path& path, Vocabulary base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sessions file: " + path.string());

  Corpus corpus;
  corpus.vocab = std::move(base);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!is_valid_utf8(line)) {
      throw std::runtime_error("malformed UTF-8 in " + path.string() + " line " +
                               std::to_string(lineno));
    }
    std::istringstream fields(line);
    std::string tok;
    Session session;
    while (fields >> tok) {
      if (session.empty() && tok[0] == '#') break;  // comment line
      session.push_back(corpus.vocab.add(tok));
    }
    if (!session.empty()) corpus.sessions.push_back(std::move(session));
  }
  if (in.bad()) throw std::runtime_error("I/O error reading " + path.string());
  return corpus;
}

void save_sessions(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());
  for (const Session& s : corpus.sessions) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) out << ' ';
      out << corpus.vocab.token(s[i]);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("I/O error writing " + path.string());
}

std::pair<Corpus, Corpus> split(const Corpus& corpus, double test_fraction,
                                std::uint64_t seed) {
  const std::size_t n = corpus.sessions.size();
  if (n == 0) throw std::invalid_argument("split: empty corpus");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("split: test_fraction must be in (0,1)");
  }
  const auto n_test =
      static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  if (n_test == 0 || n_test == n) {
    throw std::invalid_argument("split: fraction leaves one side empty");
  }

  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  rng::SplitMix64 g(seed);
  rng::shuffle(g, idx);

  std::vector<bool> in_test(n, false);
  for (std::size_t i = 0; i < n_test; ++i) in_test[idx[i]] = true;

  Corpus train, test;
  train.vocab = corpus.vocab;
  test.vocab = corpus.vocab;
  for (std::size_t i = 0; i < n; ++i) {
    (in_test[i] ? test : train).sessions.push_back(corpus.sessions[i]);
  }
  return {std::move(train), std::move(test)};
}

std::pair<Corpus, TransitionMatrix> generate_synthetic(const SyntheticSpec& spec) {
  if (spec.num_items == 0) throw std::invalid_argument("synthetic: num_items == 0");
  if (spec.num_sessions == 0) throw std::invalid_argument("synthetic: num_sessions == 0");
  if (spec.min_len < 4) throw std::invalid_argument("synthetic: min_len must be >= 4");
  if (spec.max_len < spec.min_len) {
    throw std::invalid_argument("synthetic: max_len < min_len");
  }
  if (!(spec.concentration > 0.0)) {
    throw std::invalid_argument("synthetic: concentration must be positive");
  }
  if (spec.markov_order != 1) {
    throw std::invalid_argument("synthetic: only first-order chains supported");
  }

  const std::size_t v = spec.num_items;
  rng::SplitMix64 g(spec.seed);

  TransitionMatrix transitions(v, std::vector<double>(v));
  for (std::size_t i = 0; i < v; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < v; ++j) {
      transitions[i][j] = rng::gamma(g, spec.concentration);
      sum += transitions[i][j];
    }
    for (std::size_t j = 0; j < v; ++j) transitions[i][j] /= sum;
  }

  Corpus corpus;
  for (std::size_t i = 0; i < v; ++i) corpus.vocab.add("i" + std::to_string(i));

  corpus.sessions.reserve(spec.num_sessions);
  for (std::size_t s = 0; s < spec.num_sessions; ++s) {
    const std::size_t len =
        spec.min_len + rng::uniform_below(g, spec.max_len - spec.min_len + 1);
    Session session;
    session.reserve(len);
    auto cur = static_cast<ItemId>(rng::uniform_below(g, v));
    session.push_back(cur);
    for (std::size_t t = 1; t < len; ++t) {
      const double u = rng::uniform01(g);
      double acc = 0.0;
      ItemId next = static_cast<ItemId>(v - 1);
      for (std::size_t j = 0; j < v; ++j) {
        acc += transitions[cur][j];
        if (u < acc) {
          next = static_cast<ItemId>(j);
          break;
        }
      }
      session.push_back(next);
      cur = next;
    }
    corpus.sessions.push_back(std::move(session));
  }
  return {std::move(corpus), std::move(transitions)};
}

void save_transitions(const Corpus& corpus, const TransitionMatrix& transitions,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());
  char buf[40];
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    out << corpus.vocab.token(static_cast<ItemId>(i)) << '\t';
    for (std::size_t j = 0; j < transitions[i].size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.9g", transitions[i][j]);
      if (j) out << ' ';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("I/O error writing " + path.string());
}

}  // namespace betarank
