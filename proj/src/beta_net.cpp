#include "betarank/beta_net.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "betarank/rng.hpp"

namespace betarank {

namespace {

constexpr std::string_view kModelHeader = "BETANET v1";

Eigen::MatrixXd glorot_uniform(rng::SplitMix64& g, int rows, int cols, double gain) {
  Eigen::MatrixXd w(rows, cols);
  const double limit = gain * std::sqrt(6.0 / (rows + cols));
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) w(i, j) = rng::uniform(g, -limit, limit);
  }
  return w;
}

BetaNet init_net(rng::SplitMix64 g, const NetShape& shape) {
  BetaNet net;
  net.dims = shape.dims;
  net.exp_clamp = shape.exp_clamp;
  // A damped output layer keeps the initial log-outputs of the two nets
  // near zero, so the posterior means start close to 0.5 instead of inside
  // the exponential's saturated region where the hinge gradient dies.
  net.w1 = glorot_uniform(g, shape.dims[0], shape.dims[1], 1.0);
  net.w2 = glorot_uniform(g, shape.dims[1], shape.dims[2], 1.0);
  net.w3 = glorot_uniform(g, shape.dims[2], shape.dims[3], 0.1);
  net.b1 = Eigen::RowVectorXd::Zero(shape.dims[1]);
  net.b2 = Eigen::RowVectorXd::Zero(shape.dims[2]);
  net.b3 = Eigen::RowVectorXd::Zero(shape.dims[3]);
  return net;
}

/// d(exp(clamp(x)))/dx is the output inside the clamp range, 0 beyond it.
Eigen::ArrayXXd clamp_mask(const Eigen::MatrixXd& pre, double c) {
  return ((pre.array() >= -c) && (pre.array() <= c)).cast<double>();
}

NetGradients zero_gradients(const BetaNet& net) {
  NetGradients g;
  g.w1 = Eigen::MatrixXd::Zero(net.w1.rows(), net.w1.cols());
  g.w2 = Eigen::MatrixXd::Zero(net.w2.rows(), net.w2.cols());
  g.w3 = Eigen::MatrixXd::Zero(net.w3.rows(), net.w3.cols());
  g.b1 = Eigen::RowVectorXd::Zero(net.b1.size());
  g.b2 = Eigen::RowVectorXd::Zero(net.b2.size());
  g.b3 = Eigen::RowVectorXd::Zero(net.b3.size());
  return g;
}

NetGradients backprop_net(const BetaNet& net, const NetActivations& cache,
                          const Eigen::MatrixXd& z, const Eigen::VectorXd& d_out) {
  NetGradients g;
  const Eigen::MatrixXd da3 =
      (d_out.array() * cache.out.array() * clamp_mask(cache.a3, net.exp_clamp).col(0))
          .matrix();
  g.w3.noalias() = cache.h2.transpose() * da3;
  g.b3 = da3.colwise().sum();
  const Eigen::MatrixXd dh2 = da3 * net.w3.transpose();
  g.w2.noalias() = cache.h1.transpose() * dh2;
  g.b2 = dh2.colwise().sum();
  const Eigen::MatrixXd dh1 = dh2 * net.w2.transpose();
  const Eigen::MatrixXd da1 =
      (dh1.array() * cache.h1.array() * clamp_mask(cache.a1, net.exp_clamp)).matrix();
  g.w1.noalias() = z.transpose() * da1;
  g.b1 = da1.colwise().sum();
  return g;
}

struct BatchEval {
  double mean_loss = 0.0;
  Eigen::VectorXd diff;
  ModelGradients grads;
};

/// Siamese pass over a batch: rows of zpos/zneg are paired by index. Both
/// branches flow through each net with shared parameters.
BatchEval eval_batch(const ModelPair& model, const Eigen::MatrixXd& zpos,
                     const Eigen::MatrixXd& zneg, const TrainConfig& cfg,
                     bool want_grads) {
  const Eigen::Index b = zpos.rows();
  Eigen::MatrixXd stacked(2 * b, zpos.cols());
  stacked << zpos, zneg;

  NetActivations ca, cb;
  const Eigen::VectorXd alpha = forward_batch(model.alpha, stacked, &ca);
  const Eigen::VectorXd beta = forward_batch(model.beta, stacked, &cb);

  const Eigen::ArrayXd sum = alpha.array() + beta.array();
  const Eigen::ArrayXd mu = alpha.array() / sum;

  BatchEval ev;
  ev.diff = (mu.head(b) - mu.tail(b)).matrix();
  const Eigen::ArrayXd raw = cfg.margin - cfg.y_true * ev.diff.array();
  ev.mean_loss = raw.max(0.0).mean();

  if (!want_grads) return ev;

  // dloss/ddiff = -y/b where the hinge is active.
  const Eigen::ArrayXd active = (raw > 0.0).cast<double>();
  Eigen::ArrayXd dmu(2 * b);
  dmu.head(b) = -(cfg.y_true / static_cast<double>(b)) * active;
  dmu.tail(b) = -dmu.head(b);

  const Eigen::ArrayXd inv_sum_sq = 1.0 / (sum * sum);
  const Eigen::VectorXd d_alpha = (dmu * beta.array() * inv_sum_sq).matrix();
  const Eigen::VectorXd d_beta = (-dmu * alpha.array() * inv_sum_sq).matrix();

  ev.grads.alpha = backprop_net(model.alpha, ca, stacked, d_alpha);
  ev.grads.beta = backprop_net(model.beta, cb, stacked, d_beta);
  return ev;
}

struct AdamState {
  NetGradients m, v;
};

template <typename Mat>
void adam_update(Mat& param, const Mat& grad, Mat& m, Mat& v, double lr,
                 double step) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  m = b1 * m + (1.0 - b1) * grad;
  v = (b2 * v).array() + (1.0 - b2) * grad.array().square();
  const double mc = 1.0 - std::pow(b1, step);
  const double vc = 1.0 - std::pow(b2, step);
  param.array() -= lr * (m.array() / mc) / ((v.array() / vc).sqrt() + eps);
}

void adam_update_net(BetaNet& net, const NetGradients& g, AdamState& st, double lr,
                     double step) {
  adam_update(net.w1, g.w1, st.m.w1, st.v.w1, lr, step);
  adam_update(net.b1, g.b1, st.m.b1, st.v.b1, lr, step);
  adam_update(net.w2, g.w2, st.m.w2, st.v.w2, lr, step);
  adam_update(net.b2, g.b2, st.m.b2, st.v.b2, lr, step);
  adam_update(net.w3, g.w3, st.m.w3, st.v.w3, lr, step);
  adam_update(net.b3, g.b3, st.m.b3, st.v.b3, lr, step);
}

Eigen::MatrixXd feature_matrix(std::span<const TrainingPair> pairs, bool positive) {
  Eigen::MatrixXd z(static_cast<Eigen::Index>(pairs.size()), 8);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const FeatureVector row = transform(positive ? pairs[i].pos : pairs[i].neg);
    for (int j = 0; j < 8; ++j) z(static_cast<Eigen::Index>(i), j) = row[j];
  }
  return z;
}

void append_number(std::string& out, double x) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", x);
  out.append(buf, static_cast<std::size_t>(len));
}

void write_matrix(std::ofstream& out, const char* name, const Eigen::MatrixXd& w) {
  std::string line;
  out << name << ' ' << w.rows() << ' ' << w.cols() << '\n';
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      if (j) line.push_back(' ');
      append_number(line, w(i, j));
    }
    line.push_back('\n');
    out << line;
  }
}

void write_vector(std::ofstream& out, const char* name, const Eigen::RowVectorXd& v) {
  std::string line;
  out << name << ' ' << v.size() << '\n';
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (j) line.push_back(' ');
    append_number(line, v(j));
  }
  line.push_back('\n');
  out << line;
}

class ModelReader {
 public:
  explicit ModelReader(const std::filesystem::path& path) : in_(path), path_(path) {
    if (!in_) throw std::runtime_error("cannot open model file: " + path.string());
  }

  std::string line() {
    std::string s;
    if (!std::getline(in_, s)) {
      throw std::runtime_error("truncated model file: " + path_.string());
    }
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
  }

  void expect(std::string_view want) {
    const std::string got = line();
    if (got != want) {
      throw std::runtime_error("model file " + path_.string() + ": expected '" +
                               std::string(want) + "', got '" + got + "'");
    }
  }

  /// Parses a space-separated row of exactly n doubles.
  void numbers(std::string_view s, double* dst, Eigen::Index n) {
    const char* p = s.data();
    const char* end = s.data() + s.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      while (p < end && *p == ' ') ++p;
      auto [next, ec] = std::from_chars(p, end, dst[i]);
      if (ec != std::errc{}) {
        throw std::runtime_error("model file " + path_.string() + ": bad number");
      }
      p = next;
    }
    while (p < end && *p == ' ') ++p;
    if (p != end) {
      throw std::runtime_error("model file " + path_.string() + ": trailing data");
    }
  }

  Eigen::MatrixXd matrix(const std::string& name, Eigen::Index rows,
                         Eigen::Index cols) {
    std::ostringstream want;
    want << name << ' ' << rows << ' ' << cols;
    if (line() != want.str()) {
      throw std::runtime_error("model file " + path_.string() +
                               ": dimension mismatch at " + name);
    }
    Eigen::MatrixXd w(rows, cols);
    std::vector<double> row(static_cast<std::size_t>(cols));
    for (Eigen::Index i = 0; i < rows; ++i) {
      numbers(line(), row.data(), cols);
      for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = row[static_cast<std::size_t>(j)];
    }
    return w;
  }

  Eigen::RowVectorXd vector(const std::string& name, Eigen::Index n) {
    std::ostringstream want;
    want << name << ' ' << n;
    if (line() != want.str()) {
      throw std::runtime_error("model file " + path_.string() +
                               ": dimension mismatch at " + name);
    }
    Eigen::RowVectorXd v(n);
    numbers(line(), v.data(), n);
    return v;
  }

 private:
  std::ifstream in_;
  std::filesystem::path path_;
};

}  // namespace

ModelPair init_model(std::uint64_t seed, const NetShape& shape) {
  rng::SplitMix64 base(seed);
  return {init_net(base.fork(0), shape), init_net(base.fork(1), shape)};
}

Eigen::VectorXd forward_batch(const BetaNet& net, const Eigen::MatrixXd& z,
                              NetActivations* cache) {
  const double c = net.exp_clamp;
  Eigen::MatrixXd a1 = (z * net.w1).rowwise() + net.b1;
  Eigen::MatrixXd h1 = a1.array().min(c).max(-c).exp();
  Eigen::MatrixXd h2 = (h1 * net.w2).rowwise() + net.b2;
  Eigen::MatrixXd a3 = (h2 * net.w3).rowwise() + net.b3;
  Eigen::VectorXd out = a3.array().min(c).max(-c).exp();
  if (cache) {
    cache->a1 = std::move(a1);
    cache->h1 = std::move(h1);
    cache->h2 = std::move(h2);
    cache->a3 = std::move(a3);
    cache->out = out;
  }
  return out;
}

double forward(const BetaNet& net, const FeatureVector& z) {
  Eigen::MatrixXd row(1, 8);
  for (int j = 0; j < 8; ++j) {
    if (!std::isfinite(z[static_cast<std::size_t>(j)])) {
      throw std::invalid_argument("forward: non-finite input");
    }
    row(0, j) = z[static_cast<std::size_t>(j)];
  }
  return forward_batch(net, row)(0);
}

double posterior_mean(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) ||
      !std::isfinite(beta)) {
    throw std::invalid_argument("posterior_mean: parameters must be positive");
  }
  return alpha / (alpha + beta);
}

std::pair<double, double> posterior_mean_gradient(double alpha, double beta) {
  const double s = alpha + beta;
  return {beta / (s * s), -alpha / (s * s)};
}

PairLoss pair_loss(const ModelPair& model, const TrainingPair& pair,
                   const TrainConfig& cfg) {
  Eigen::MatrixXd zp(1, 8), zn(1, 8);
  const FeatureVector p = transform(pair.pos), n = transform(pair.neg);
  for (int j = 0; j < 8; ++j) {
    zp(0, j) = p[static_cast<std::size_t>(j)];
    zn(0, j) = n[static_cast<std::size_t>(j)];
  }
  const BatchEval ev = eval_batch(model, zp, zn, cfg, false);
  return {ev.mean_loss, ev.diff(0)};
}

ModelGradients backward(const ModelPair& model, const TrainingPair& pair,
                        const TrainConfig& cfg) {
  Eigen::MatrixXd zp(1, 8), zn(1, 8);
  const FeatureVector p = transform(pair.pos), n = transform(pair.neg);
  for (int j = 0; j < 8; ++j) {
    zp(0, j) = p[static_cast<std::size_t>(j)];
    zn(0, j) = n[static_cast<std::size_t>(j)];
  }
  return eval_batch(model, zp, zn, cfg, true).grads;
}

TrainResult train(ModelPair& model, std::span<const TrainingPair> pairs,
                  const TrainConfig& cfg) {
  TrainResult result;
  if (cfg.epochs == 0) return result;
  if (pairs.empty()) throw std::invalid_argument("train: no training pairs");
  if (cfg.batch_size == 0) throw std::invalid_argument("train: batch_size == 0");

  const Eigen::MatrixXd zpos = feature_matrix(pairs, true);
  const Eigen::MatrixXd zneg = feature_matrix(pairs, false);
  const std::size_t n = pairs.size();

  AdamState adam_alpha{zero_gradients(model.alpha), zero_gradients(model.alpha)};
  AdamState adam_beta{zero_gradients(model.beta), zero_gradients(model.beta)};

  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  rng::SplitMix64 base(cfg.seed);

  double step = 0.0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng::SplitMix64 g = base.fork(epoch);
    rng::shuffle(g, perm);

    double loss_sum = 0.0;
    for (std::size_t begin = 0, batch_index = 0; begin < n;
         begin += cfg.batch_size, ++batch_index) {
      const std::size_t b = std::min(cfg.batch_size, n - begin);
      Eigen::MatrixXd zp(static_cast<Eigen::Index>(b), 8);
      Eigen::MatrixXd zn(static_cast<Eigen::Index>(b), 8);
      for (std::size_t r = 0; r < b; ++r) {
        zp.row(static_cast<Eigen::Index>(r)) =
            zpos.row(static_cast<Eigen::Index>(perm[begin + r]));
        zn.row(static_cast<Eigen::Index>(r)) =
            zneg.row(static_cast<Eigen::Index>(perm[begin + r]));
      }

      const BatchEval ev = eval_batch(model, zp, zn, cfg, true);
      if (!std::isfinite(ev.mean_loss)) {
        throw std::runtime_error("non-finite loss at batch " +
                                 std::to_string(batch_index) + " (epoch " +
                                 std::to_string(epoch) + ")");
      }
      loss_sum += ev.mean_loss * static_cast<double>(b);

      step += 1.0;
      if (std::getenv("BETARANK_SGD")) {
        const double lr = cfg.learning_rate;
        model.alpha.w1 -= lr * ev.grads.alpha.w1; model.alpha.b1 -= lr * ev.grads.alpha.b1;
        model.alpha.w2 -= lr * ev.grads.alpha.w2; model.alpha.b2 -= lr * ev.grads.alpha.b2;
        model.alpha.w3 -= lr * ev.grads.alpha.w3; model.alpha.b3 -= lr * ev.grads.alpha.b3;
        model.beta.w1 -= lr * ev.grads.beta.w1; model.beta.b1 -= lr * ev.grads.beta.b1;
        model.beta.w2 -= lr * ev.grads.beta.w2; model.beta.b2 -= lr * ev.grads.beta.b2;
        model.beta.w3 -= lr * ev.grads.beta.w3; model.beta.b3 -= lr * ev.grads.beta.b3;
      } else {
      adam_update_net(model.alpha, ev.grads.alpha, adam_alpha, cfg.learning_rate, step);
      adam_update_net(model.beta, ev.grads.beta, adam_beta, cfg.learning_rate, step);
      }
    }
    result.epoch_loss.push_back(loss_sum / static_cast<double>(n));
  }
  return result;
}

void save_model(const ModelPair& model, const std::filesystem::path& path) {
  if (model.alpha.dims != model.beta.dims ||
      model.alpha.exp_clamp != model.beta.exp_clamp) {
    throw std::logic_error("save_model: the two nets must share one architecture");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());
  out << kModelHeader << '\n';
  out << "dims " << model.alpha.dims[0] << ' ' << model.alpha.dims[1] << ' '
      << model.alpha.dims[2] << ' ' << model.alpha.dims[3] << '\n';
  std::string clamp_line = "clamp ";
  append_number(clamp_line, model.alpha.exp_clamp);
  out << clamp_line << '\n';
  for (int section = 0; section < 2; ++section) {
    const BetaNet& net = section == 0 ? model.alpha : model.beta;
    out << (section == 0 ? "ALPHA" : "BETA") << '\n';
    write_matrix(out, "W1", net.w1);
    write_vector(out, "b1", net.b1);
    write_matrix(out, "W2", net.w2);
    write_vector(out, "b2", net.b2);
    write_matrix(out, "W3", net.w3);
    write_vector(out, "b3", net.b3);
  }
  if (!out) throw std::runtime_error("I/O error writing " + path.string());
}

ModelPair load_model(const std::filesystem::path& path) {
  ModelReader reader(path);
  reader.expect(kModelHeader);

  const std::string dims_line = reader.line();
  std::istringstream dims_in(dims_line);
  std::string word;
  std::array<int, 4> dims{};
  dims_in >> word >> dims[0] >> dims[1] >> dims[2] >> dims[3];
  if (word != "dims" || !dims_in || dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0 ||
      dims[3] <= 0) {
    throw std::runtime_error("model file " + path.string() + ": bad dims line");
  }

  const std::string clamp_line = reader.line();
  std::istringstream clamp_in(clamp_line);
  double clamp = 0.0;
  clamp_in >> word >> clamp;
  if (word != "clamp" || !clamp_in || !(clamp > 0.0)) {
    throw std::runtime_error("model file " + path.string() + ": bad clamp line");
  }

  ModelPair model;
  for (int section = 0; section < 2; ++section) {
    BetaNet& net = section == 0 ? model.alpha : model.beta;
    reader.expect(section == 0 ? "ALPHA" : "BETA");
    net.dims = dims;
    net.exp_clamp = clamp;
    net.w1 = reader.matrix("W1", dims[0], dims[1]);
    net.b1 = reader.vector("b1", dims[1]);
    net.w2 = reader.matrix("W2", dims[1], dims[2]);
    net.b2 = reader.vector("b2", dims[2]);
    net.w3 = reader.matrix("W3", dims[2], dims[3]);
    net.b3 = reader.vector("b3", dims[3]);
  }
  return model;
}

}  // namespace betarank
