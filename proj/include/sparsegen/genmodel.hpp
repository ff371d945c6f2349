#pragma once

#include <filesystem>
#include <fstream>

#include "sparsegen/sensing.hpp"

namespace sparsegen {

using LatentCode = Eigen::VectorXd;

enum class Activation : std::uint8_t { identity = 0, relu = 1, sigmoid = 2 };

namespace detail {

inline Eigen::MatrixXd activate(const Eigen::MatrixXd& pre, Activation a) {
  switch (a) {
    case Activation::identity: return pre;
    case Activation::relu: return pre.cwiseMax(0.0);
    case Activation::sigmoid:
      return pre.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
  }
  throw std::invalid_argument("unknown activation");
}

// Derivative of the activation evaluated at the stored preactivation.
// ReLU subgradient at exactly 0 is taken as 0.
inline Eigen::MatrixXd activate_grad(const Eigen::MatrixXd& pre, Activation a) {
  switch (a) {
    case Activation::identity: return Eigen::MatrixXd::Ones(pre.rows(), pre.cols());
    case Activation::relu:
      return pre.unaryExpr([](double x) { return x > 0 ? 1.0 : 0.0; });
    case Activation::sigmoid:
      return pre.unaryExpr([](double x) {
        const double s = 1.0 / (1.0 + std::exp(-x));
        return s * (1.0 - s);
      });
  }
  throw std::invalid_argument("unknown activation");
}

inline double activation_lipschitz(Activation a) {
  return a == Activation::sigmoid ? 0.25 : 1.0;
}

}  // namespace detail

// Fixed-architecture MLP G: R^k -> R^n with exact reverse-mode gradients.
// Immutable once built; forward/vjp keep per-call state only.
struct GeneratorNetwork {
  std::vector<Eigen::MatrixXd> weights;  // layer l: dims[l+1] x dims[l]
  std::vector<Eigen::VectorXd> biases;
  std::vector<Activation> activations;

  Eigen::Index latent_dim() const { return weights.front().cols(); }
  Eigen::Index output_dim() const { return weights.back().rows(); }
  std::size_t depth() const { return weights.size(); }

  std::vector<Eigen::Index> layer_dims() const {
    std::vector<Eigen::Index> dims{latent_dim()};
    for (const auto& w : weights) dims.push_back(w.rows());
    return dims;
  }
};

inline GeneratorNetwork make_network(std::vector<Eigen::MatrixXd> weights,
                                     std::vector<Eigen::VectorXd> biases,
                                     std::vector<Activation> activations) {
  if (weights.empty() || weights.size() != biases.size() || weights.size() != activations.size())
    throw std::invalid_argument("make_network: inconsistent layer counts");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() == 0 || weights[l].cols() == 0)
      throw std::invalid_argument("make_network: empty weight matrix");
    if (biases[l].size() != weights[l].rows())
      throw std::invalid_argument("make_network: bias length does not match layer output");
    if (l + 1 < weights.size() && weights[l + 1].cols() != weights[l].rows())
      throw std::invalid_argument("make_network: layer dimensions do not chain");
  }
  return {std::move(weights), std::move(biases), std::move(activations)};
}

// Stored preactivations from a forward pass, consumed by vjp.
struct ForwardTrace {
  Eigen::MatrixXd input;                // k x batch
  std::vector<Eigen::MatrixXd> pre;     // per layer, out x batch
};

inline Eigen::MatrixXd forward_batch(const GeneratorNetwork& g, const Eigen::MatrixXd& z,
                                     ForwardTrace* trace = nullptr) {
  if (z.rows() != g.latent_dim())
    throw std::invalid_argument("forward: latent dimension mismatch");
  if (trace) {
    trace->input = z;
    trace->pre.clear();
    trace->pre.reserve(g.depth());
  }
  Eigen::MatrixXd h = z;
  for (std::size_t l = 0; l < g.depth(); ++l) {
    Eigen::MatrixXd pre = (g.weights[l] * h).colwise() + g.biases[l];
    h = detail::activate(pre, g.activations[l]);
    if (trace) trace->pre.push_back(std::move(pre));
  }
  return h;
}

inline Signal forward(const GeneratorNetwork& g, const LatentCode& z) {
  return forward_batch(g, z);
}

// J^T u through the stored trace, one column per batch element.
inline Eigen::MatrixXd vjp_batch(const GeneratorNetwork& g, const ForwardTrace& trace,
                                 const Eigen::MatrixXd& cotangent) {
  if (cotangent.rows() != g.output_dim() || cotangent.cols() != trace.input.cols())
    throw std::invalid_argument("vjp: cotangent shape mismatch");
  Eigen::MatrixXd grad = cotangent;
  for (std::size_t l = g.depth(); l-- > 0;) {
    grad = grad.cwiseProduct(detail::activate_grad(trace.pre[l], g.activations[l]));
    grad = (g.weights[l].transpose() * grad).eval();
  }
  return grad;
}

inline LatentCode vjp(const GeneratorNetwork& g, const LatentCode& z, const Signal& cotangent) {
  ForwardTrace trace;
  forward_batch(g, z, &trace);
  return vjp_batch(g, trace, cotangent);
}

namespace detail {

inline double operator_norm(const Eigen::MatrixXd& w, int iterations = 50, double tol = 1e-8) {
  Eigen::VectorXd v = Eigen::VectorXd::Constant(w.cols(), 1.0 / std::sqrt(double(w.cols())));
  double lambda = 0;
  for (int it = 0; it < iterations; ++it) {
    Eigen::VectorXd wv = w * v;
    const double norm_wv = wv.norm();
    if (norm_wv == 0) return 0;
    Eigen::VectorXd next = w.transpose() * wv;
    const double norm_next = next.norm();
    if (norm_next == 0) return norm_wv;
    v = next / norm_next;
    const double prev = lambda;
    lambda = norm_wv;
    if (it > 0 && std::abs(lambda - prev) <= tol * lambda) break;
  }
  return (w * v).norm();
}

}  // namespace detail

// Product over layers of operator norm times activation Lipschitz constant;
// an upper bound on the Lipschitz constant of G.
inline double lipschitz_upper(const GeneratorNetwork& g) {
  double bound = 1.0;
  for (std::size_t l = 0; l < g.depth(); ++l)
    bound *= detail::operator_norm(g.weights[l]) * detail::activation_lipschitz(g.activations[l]);
  return bound;
}

// G(z) = 0 for all z; plugging it into the joint objective recovers LASSO.
inline GeneratorNetwork zero_generator(Eigen::Index k, Eigen::Index n) {
  return make_network({Eigen::MatrixXd::Zero(n, k)}, {Eigen::VectorXd::Zero(n)},
                      {Activation::identity});
}

inline GeneratorNetwork affine_generator(Eigen::MatrixXd w, Eigen::VectorXd b) {
  return make_network({std::move(w)}, {std::move(b)}, {Activation::identity});
}

// He-initialized MLP with ReLU hidden layers and identity output, zero biases.
inline GeneratorNetwork random_relu_generator(const std::vector<Eigen::Index>& dims,
                                              std::uint64_t seed) {
  if (dims.size() < 2) throw std::invalid_argument("random_relu_generator: need >= 2 dims");
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  std::vector<Activation> acts;
  SeededRng rng(seed, /*stream=*/2);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const double std_dev = std::sqrt(2.0 / static_cast<double>(dims[l]));
    Eigen::MatrixXd w(dims[l + 1], dims[l]);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = std_dev * rng.gaussian();
    weights.push_back(std::move(w));
    biases.push_back(Eigen::VectorXd::Zero(dims[l + 1]));
    acts.push_back(l + 2 < dims.size() ? Activation::relu : Activation::identity);
  }
  return make_network(std::move(weights), std::move(biases), std::move(acts));
}

// Weight file: magic "MLPW", u32 version=1, u32 layer count d, d+1 u32 dims,
// d u8 activation codes (0=identity, 1=relu, 2=sigmoid), then per layer
// row-major little-endian f64 weights followed by f64 biases.
inline void save_weights(const GeneratorNetwork& g, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open for writing: " + path.string());
  os.write("MLPW", 4);
  detail::write_u32(os, 1);
  detail::write_u32(os, static_cast<std::uint32_t>(g.depth()));
  const auto dims = g.layer_dims();
  for (const auto d : dims) detail::write_u32(os, static_cast<std::uint32_t>(d));
  for (const auto a : g.activations) os.put(static_cast<char>(a));
  for (std::size_t l = 0; l < g.depth(); ++l) {
    for (Eigen::Index i = 0; i < g.weights[l].rows(); ++i)
      for (Eigen::Index j = 0; j < g.weights[l].cols(); ++j)
        detail::write_f64(os, g.weights[l](i, j));
    for (Eigen::Index i = 0; i < g.biases[l].size(); ++i) detail::write_f64(os, g.biases[l][i]);
  }
  if (!os) throw FormatError("write failed: " + path.string());
}

inline GeneratorNetwork load_weights(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open: " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "MLPW", 4) != 0)
    throw FormatError("bad weight magic: " + path.string());
  if (detail::read_u32(is, "weight header") != 1)
    throw FormatError("unsupported weight version");
  const std::uint32_t layer_count = detail::read_u32(is, "weight header");
  if (layer_count == 0 || layer_count > 64) throw FormatError("weight layer count out of range");
  std::vector<Eigen::Index> dims(layer_count + 1);
  for (auto& d : dims) {
    d = detail::read_u32(is, "weight dims");
    if (d == 0) throw FormatError("weight shape mismatch: zero dimension");
  }
  std::vector<Activation> acts(layer_count);
  for (auto& a : acts) {
    const int c = is.get();
    if (c == EOF) throw FormatError("truncated activation codes");
    if (c < 0 || c > 2) throw FormatError("unknown activation code");
    a = static_cast<Activation>(c);
  }
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  for (std::uint32_t l = 0; l < layer_count; ++l) {
    Eigen::MatrixXd w(dims[l + 1], dims[l]);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = detail::read_f64(is, "weight entries");
    Eigen::VectorXd b(dims[l + 1]);
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = detail::read_f64(is, "bias entries");
    weights.push_back(std::move(w));
    biases.push_back(std::move(b));
  }
  return make_network(std::move(weights), std::move(biases), std::move(acts));
}

}  // namespace sparsegen
