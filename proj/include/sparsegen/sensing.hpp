#pragma once

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "sparsegen/core.hpp"

namespace sparsegen {

using Measurements = Eigen::VectorXd;

enum class EnsembleKind { gaussian, bernoulli };

// Entry scale for random ensembles. The theory results use variance 1/m
// (std 1/sqrt(m)); the literal experimental-protocol reading is std 1/m.
enum class EntryScaling { variance_over_m, std_over_m };

struct SensingEnsemble {
  DenseMatrix matrix;  // m x n
  double noise_std = 0.0;
  std::uint64_t seed = 0;

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index cols() const { return matrix.cols(); }
};

inline SensingEnsemble gaussian_ensemble(Eigen::Index m, Eigen::Index n, double noise_std,
                                         std::uint64_t seed,
                                         EntryScaling scaling = EntryScaling::variance_over_m,
                                         EnsembleKind kind = EnsembleKind::gaussian) {
  if (m < 1 || n < 1) throw std::invalid_argument("gaussian_ensemble: zero dimension");
  if (noise_std < 0) throw std::invalid_argument("gaussian_ensemble: negative noise_std");
  const double scale = scaling == EntryScaling::variance_over_m
                           ? 1.0 / std::sqrt(static_cast<double>(m))
                           : 1.0 / static_cast<double>(m);
  SensingEnsemble e{DenseMatrix(m, n), noise_std, seed};
  SeededRng rng(seed, /*stream=*/0);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (kind == EnsembleKind::gaussian) {
        e.matrix(i, j) = scale * rng.gaussian();
      } else {
        e.matrix(i, j) = rng.next_u32() & 1u ? scale : -scale;
      }
    }
  }
  return e;
}

inline SensingEnsemble bernoulli_ensemble(Eigen::Index m, Eigen::Index n, double noise_std,
                                          std::uint64_t seed) {
  return gaussian_ensemble(m, n, noise_std, seed, EntryScaling::variance_over_m,
                           EnsembleKind::bernoulli);
}

// y = A x + eps with eps_i iid N(0, noise_std^2), deterministic per noise_seed.
inline Measurements sense(const SensingEnsemble& e, const Signal& x, std::uint64_t noise_seed) {
  if (x.size() != e.cols())
    throw std::invalid_argument("sense: signal length does not match ensemble columns");
  Measurements y = e.matrix * x;
  if (e.noise_std > 0) {
    SeededRng rng(noise_seed, /*stream=*/1);
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += e.noise_std * rng.gaussian();
  }
  return y;
}

// m = ceil(C/alpha^2 * (k ln(L r / delta) + l ln(n / l))), the measurement
// count sufficient for recovery over an L-Lipschitz generator with latent
// dimension k plus l-sparse deviations. The big-O constant is explicit.
inline long sufficient_measurements(long k, long l, long n, double lipschitz, double radius,
                                    double delta, double alpha, double constant) {
  if (k < 1 || l < 1 || n < 1 || constant <= 0)
    throw std::invalid_argument("sufficient_measurements: nonpositive argument");
  if (alpha <= 0 || alpha >= 1) throw std::invalid_argument("sufficient_measurements: alpha outside (0,1)");
  if (lipschitz <= 0 || radius <= 0 || delta <= 0)
    throw std::invalid_argument("sufficient_measurements: nonpositive argument");
  const double log_net = std::log(lipschitz * radius / delta);
  const double log_sparse = std::log(static_cast<double>(n) / static_cast<double>(l));
  if (log_net <= 0 || log_sparse <= 0)
    throw std::invalid_argument("sufficient_measurements: nonpositive log argument");
  const double m = constant / (alpha * alpha) *
                   (static_cast<double>(k) * log_net + static_cast<double>(l) * log_sparse);
  return static_cast<long>(std::ceil(m));
}

// ReLU-network variant: m = ceil(C/alpha^2 * ((k+l) d ln c + (k+l) ln(n/l)))
// for depth-d ReLU generators with at most c nodes per layer.
inline long sufficient_measurements_relu(long k, long l, long n, long depth, long width,
                                         double alpha, double constant) {
  if (k < 1 || l < 1 || n < 1 || depth < 1 || width < 2 || constant <= 0)
    throw std::invalid_argument("sufficient_measurements_relu: nonpositive argument");
  if (alpha <= 0 || alpha >= 1)
    throw std::invalid_argument("sufficient_measurements_relu: alpha outside (0,1)");
  const double log_sparse = std::log(static_cast<double>(n) / static_cast<double>(l));
  if (log_sparse <= 0)
    throw std::invalid_argument("sufficient_measurements_relu: nonpositive log argument");
  const double kl = static_cast<double>(k + l);
  const double m = constant / (alpha * alpha) *
                   (kl * static_cast<double>(depth) * std::log(static_cast<double>(width)) +
                    kl * log_sparse);
  return static_cast<long>(std::ceil(m));
}

namespace detail {

inline void write_u32(std::ostream& os, std::uint32_t v) {
  char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8), static_cast<char>(v >> 16),
               static_cast<char>(v >> 24)};
  os.write(b, 4);
}

inline void write_u64(std::ostream& os, std::uint64_t v) {
  write_u32(os, static_cast<std::uint32_t>(v));
  write_u32(os, static_cast<std::uint32_t>(v >> 32));
}

inline void write_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  write_u64(os, bits);
}

inline std::uint32_t read_u32(std::istream& is, const char* what) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw FormatError(std::string("truncated ") + what);
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

inline std::uint64_t read_u64(std::istream& is, const char* what) {
  const std::uint64_t lo = read_u32(is, what);
  const std::uint64_t hi = read_u32(is, what);
  return (hi << 32) | lo;
}

inline double read_f64(std::istream& is, const char* what) {
  const std::uint64_t bits = read_u64(is, what);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace detail

// Binary ensemble file: magic "CSEN", u32 version=1, u64 seed, u32 m, u32 n,
// f64 noise_std, then m*n little-endian f64 entries row-major.
inline void save_ensemble(const SensingEnsemble& e, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open for writing: " + path.string());
  os.write("CSEN", 4);
  detail::write_u32(os, 1);
  detail::write_u64(os, e.seed);
  detail::write_u32(os, static_cast<std::uint32_t>(e.rows()));
  detail::write_u32(os, static_cast<std::uint32_t>(e.cols()));
  detail::write_f64(os, e.noise_std);
  for (Eigen::Index i = 0; i < e.rows(); ++i)
    for (Eigen::Index j = 0; j < e.cols(); ++j) detail::write_f64(os, e.matrix(i, j));
  if (!os) throw FormatError("write failed: " + path.string());
}

inline SensingEnsemble load_ensemble(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open: " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "CSEN", 4) != 0)
    throw FormatError("bad ensemble magic: " + path.string());
  const std::uint32_t version = detail::read_u32(is, "ensemble header");
  if (version != 1) throw FormatError("unsupported ensemble version");
  SensingEnsemble e;
  e.seed = detail::read_u64(is, "ensemble header");
  const std::uint32_t m = detail::read_u32(is, "ensemble header");
  const std::uint32_t n = detail::read_u32(is, "ensemble header");
  if (m == 0 || n == 0) throw FormatError("ensemble with zero dimension");
  e.noise_std = detail::read_f64(is, "ensemble header");
  e.matrix.resize(m, n);
  for (std::uint32_t i = 0; i < m; ++i)
    for (std::uint32_t j = 0; j < n; ++j) e.matrix(i, j) = detail::read_f64(is, "ensemble entries");
  return e;
}

}  // namespace sparsegen
