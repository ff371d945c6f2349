#pragma once

#include "sparsegen/genmodel.hpp"
#include "sparsegen/optimizer.hpp"

namespace sparsegen {

// Encoder maps inputs to concatenated (mean, log-variance) of the Gaussian
// posterior; decoder is the generator function handed to recovery.
struct VaeModel {
  GeneratorNetwork encoder;
  GeneratorNetwork decoder;

  Eigen::Index input_dim() const { return encoder.latent_dim(); }
  Eigen::Index latent_dim() const { return decoder.latent_dim(); }
};

struct TrainConfig {
  double learning_rate = 0.001;
  long epochs = 10;
  long batch_size = 100;
  std::uint64_t seed = 0;
};

namespace detail {

inline GeneratorNetwork he_initialized(const std::vector<Eigen::Index>& dims,
                                       const std::vector<Activation>& acts, SeededRng& rng) {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const double std_dev = std::sqrt(2.0 / static_cast<double>(dims[l]));
    Eigen::MatrixXd w(dims[l + 1], dims[l]);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = std_dev * rng.gaussian();
    weights.push_back(std::move(w));
    biases.push_back(Eigen::VectorXd::Zero(dims[l + 1]));
  }
  return make_network(std::move(weights), std::move(biases), acts);
}

}  // namespace detail

// Appendix-style architecture: input-hidden-hidden-latent with ReLU hidden
// units; the inference net ends with 2*latent units (mean and log-variance).
inline VaeModel make_vae(Eigen::Index input, Eigen::Index hidden, Eigen::Index latent,
                         std::uint64_t seed) {
  SeededRng rng(seed, /*stream=*/3);
  VaeModel model;
  model.encoder = detail::he_initialized(
      {input, hidden, hidden, 2 * latent},
      {Activation::relu, Activation::relu, Activation::identity}, rng);
  model.decoder = detail::he_initialized(
      {latent, hidden, hidden, input},
      {Activation::relu, Activation::relu, Activation::sigmoid}, rng);
  return model;
}

struct NetGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

struct ElboResult {
  double neg_elbo = 0;  // per-sample mean
  double bce = 0;
  double kl = 0;
  NetGradients encoder_grads;
  NetGradients decoder_grads;
};

namespace detail {

// Backpropagates `delta` (loss gradient at the final preactivation) through
// the net, filling parameter gradients and returning the input gradient.
inline Eigen::MatrixXd backprop_params(const GeneratorNetwork& g, const ForwardTrace& trace,
                                       Eigen::MatrixXd delta, NetGradients& grads) {
  grads.weights.resize(g.depth());
  grads.biases.resize(g.depth());
  for (std::size_t l = g.depth(); l-- > 0;) {
    const Eigen::MatrixXd input =
        l == 0 ? trace.input : activate(trace.pre[l - 1], g.activations[l - 1]);
    grads.weights[l] = delta * input.transpose();
    grads.biases[l] = delta.rowwise().sum();
    delta = (g.weights[l].transpose() * delta).eval();
    if (l > 0) delta = delta.cwiseProduct(activate_grad(trace.pre[l - 1], g.activations[l - 1]));
  }
  return delta;
}

inline double stable_bce(const Eigen::MatrixXd& logits, const Eigen::MatrixXd& x) {
  // sum over entries of max(t,0) - t*x + log(1 + exp(-|t|))
  double total = 0;
  for (Eigen::Index j = 0; j < logits.cols(); ++j)
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
      const double t = logits(i, j);
      total += std::max(t, 0.0) - t * x(i, j) + std::log1p(std::exp(-std::abs(t)));
    }
  return total;
}

}  // namespace detail

// Single-sample reparameterized negative ELBO with Bernoulli likelihood:
//   BCE(x, sigmoid(decoder(z))) + KL(N(mu, sigma^2) || N(0, I)),
//   z = mu + sigma .* eta,  eta ~ N(0, I)  drawn from rng.
// Values are per-sample means; gradients via manual reverse mode.
inline ElboResult elbo(const VaeModel& model, const Eigen::MatrixXd& batch, SeededRng& rng) {
  const Eigen::Index batch_size = batch.cols();
  if (batch_size == 0) throw std::invalid_argument("elbo: empty batch");
  if (batch.rows() != model.input_dim()) throw std::invalid_argument("elbo: input dim mismatch");
  if ((batch.array() < 0).any() || (batch.array() > 1).any())
    throw std::invalid_argument("elbo: pixel values outside [0,1]");
  const Eigen::Index k = model.latent_dim();

  ForwardTrace enc_trace;
  const Eigen::MatrixXd enc_out = forward_batch(model.encoder, batch, &enc_trace);
  const Eigen::MatrixXd mu = enc_out.topRows(k);
  const Eigen::MatrixXd logvar = enc_out.bottomRows(k);
  const Eigen::MatrixXd sigma = (0.5 * logvar).array().exp();

  Eigen::MatrixXd eta(k, batch_size);
  for (Eigen::Index j = 0; j < batch_size; ++j)
    for (Eigen::Index i = 0; i < k; ++i) eta(i, j) = rng.gaussian();
  const Eigen::MatrixXd z = mu + sigma.cwiseProduct(eta);

  ForwardTrace dec_trace;
  forward_batch(model.decoder, z, &dec_trace);
  const Eigen::MatrixXd& logits = dec_trace.pre.back();
  const Eigen::MatrixXd probs = detail::activate(logits, Activation::sigmoid);

  const double inv_b = 1.0 / static_cast<double>(batch_size);
  ElboResult result;
  result.bce = detail::stable_bce(logits, batch) * inv_b;
  result.kl = 0.5 *
              (mu.array().square() + sigma.array().square() - logvar.array() - 1.0).sum() * inv_b;
  result.neg_elbo = result.bce + result.kl;

  // Reconstruction gradient at the decoder's final preactivation.
  const Eigen::MatrixXd dlogits = (probs - batch) * inv_b;
  const Eigen::MatrixXd dz = detail::backprop_params(model.decoder, dec_trace, dlogits,
                                                     result.decoder_grads);

  const Eigen::MatrixXd dmu = dz + mu * inv_b;
  const Eigen::MatrixXd dlogvar =
      0.5 * dz.cwiseProduct(eta).cwiseProduct(sigma) +
      0.5 * inv_b * (sigma.array().square() - 1.0).matrix();
  Eigen::MatrixXd denc(2 * k, batch_size);
  denc.topRows(k) = dmu;
  denc.bottomRows(k) = dlogvar;
  detail::backprop_params(model.encoder, enc_trace, denc, result.encoder_grads);
  return result;
}

struct EpochStats {
  double mean_neg_elbo = 0;
  double mean_bce = 0;
  double mean_kl = 0;
};

// Adam training over shuffled minibatches; bit-reproducible per seed.
inline std::vector<EpochStats> train(VaeModel& model, const Eigen::MatrixXd& dataset,
                                     const TrainConfig& cfg) {
  const Eigen::Index count = dataset.cols();
  if (count == 0) throw std::invalid_argument("train: empty dataset");
  if (cfg.learning_rate <= 0) throw std::invalid_argument("train: learning rate must be positive");
  if (cfg.batch_size < 1) throw std::invalid_argument("train: batch size must be positive");

  std::vector<Adam> enc_w, enc_b, dec_w, dec_b;
  for (std::size_t l = 0; l < model.encoder.depth(); ++l) {
    enc_w.emplace_back(model.encoder.weights[l].rows(), model.encoder.weights[l].cols(),
                       cfg.learning_rate);
    enc_b.emplace_back(model.encoder.biases[l].size(), 1, cfg.learning_rate);
  }
  for (std::size_t l = 0; l < model.decoder.depth(); ++l) {
    dec_w.emplace_back(model.decoder.weights[l].rows(), model.decoder.weights[l].cols(),
                       cfg.learning_rate);
    dec_b.emplace_back(model.decoder.biases[l].size(), 1, cfg.learning_rate);
  }

  std::vector<EpochStats> stats;
  std::vector<Eigen::Index> order(count);
  for (Eigen::Index i = 0; i < count; ++i) order[i] = i;

  for (long epoch = 0; epoch < cfg.epochs; ++epoch) {
    SeededRng shuffle_rng(cfg.seed, mix_seed(0x73687566ull, static_cast<std::uint64_t>(epoch)));
    for (Eigen::Index i = count - 1; i > 0; --i)
      std::swap(order[i], order[shuffle_rng.below(static_cast<std::uint64_t>(i + 1))]);

    EpochStats epoch_stats;
    long batches = 0;
    for (Eigen::Index start = 0; start < count; start += cfg.batch_size, ++batches) {
      const Eigen::Index size = std::min<Eigen::Index>(cfg.batch_size, count - start);
      Eigen::MatrixXd batch(dataset.rows(), size);
      for (Eigen::Index j = 0; j < size; ++j) batch.col(j) = dataset.col(order[start + j]);

      SeededRng noise_rng(cfg.seed, mix_seed(0x656C626Full, static_cast<std::uint64_t>(epoch),
                                             static_cast<std::uint64_t>(start)));
      const ElboResult r = elbo(model, batch, noise_rng);
      epoch_stats.mean_neg_elbo += r.neg_elbo;
      epoch_stats.mean_bce += r.bce;
      epoch_stats.mean_kl += r.kl;

      for (std::size_t l = 0; l < model.encoder.depth(); ++l) {
        enc_w[l].update(model.encoder.weights[l], r.encoder_grads.weights[l]);
        Eigen::MatrixXd b = model.encoder.biases[l];
        enc_b[l].update(b, r.encoder_grads.biases[l]);
        model.encoder.biases[l] = b;
      }
      for (std::size_t l = 0; l < model.decoder.depth(); ++l) {
        dec_w[l].update(model.decoder.weights[l], r.decoder_grads.weights[l]);
        Eigen::MatrixXd b = model.decoder.biases[l];
        dec_b[l].update(b, r.decoder_grads.biases[l]);
        model.decoder.biases[l] = b;
      }
    }
    epoch_stats.mean_neg_elbo /= batches;
    epoch_stats.mean_bce /= batches;
    epoch_stats.mean_kl /= batches;
    stats.push_back(epoch_stats);
  }
  return stats;
}

inline GeneratorNetwork decoder_of(const VaeModel& model) { return model.decoder; }

inline void write_loss_trace(const std::vector<EpochStats>& stats,
                             const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open for writing: " + path.string());
  os << "epoch,mean_neg_elbo,mean_bce,mean_kl\n";
  char line[160];
  for (std::size_t i = 0; i < stats.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g\n", i, stats[i].mean_neg_elbo,
                  stats[i].mean_bce, stats[i].mean_kl);
    os << line;
  }
}

}  // namespace sparsegen
