#pragma once

#include "sparsegen/recover.hpp"

namespace sparsegen {

enum class PropertyKind { rip, rec, srec };

// How a property check explores the sparse set:
//  - sample_vectors: random sparse unit vectors (Gaussian values, normalized)
//  - sample_supports: random supports, checked for all vectors at once via
//    the extreme singular values of the column submatrix (discriminative)
//  - exhaustive: every support, submatrix singular values; tiny n only
enum class CheckMode { sample_vectors, sample_supports, exhaustive };

struct PropertyReport {
  PropertyKind property = PropertyKind::rip;
  Eigen::Index l = 0;
  double alpha_or_gamma = 0;
  double delta = 0;
  long trials = 0;
  long violations = 0;
  double worst_ratio = 1;  // ||Ax||/||x|| farthest from the allowed region
};

namespace detail {

inline std::vector<Eigen::Index> sample_support(SeededRng& rng, Eigen::Index n, Eigen::Index l) {
  std::vector<Eigen::Index> pool(n);
  for (Eigen::Index i = 0; i < n; ++i) pool[i] = i;
  for (Eigen::Index i = 0; i < l; ++i) {
    const auto j = i + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(l);
  return pool;
}

// Gaussian values on a uniform support. Callers compare ||Ax|| against
// bounds scaled by the computed ||x|| so exact isometries stay exact.
inline Signal sparse_gaussian_vector(SeededRng& rng, Eigen::Index n, Eigen::Index l) {
  Signal x = Signal::Zero(n);
  for (const auto i : sample_support(rng, n, l)) x[i] = rng.gaussian();
  if (x.norm() == 0) x[0] = 1;  // measure-zero fallback
  return x;
}

inline std::pair<double, double> support_singular_range(const DenseMatrix& a,
                                                        const std::vector<Eigen::Index>& support) {
  Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = a.col(support[j]);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub);
  const auto& sv = svd.singularValues();
  return {sv[sv.size() - 1], sv[0]};
}

}  // namespace detail

inline PropertyReport check_rip(const DenseMatrix& a, Eigen::Index l, double alpha, long trials,
                                std::uint64_t seed, CheckMode mode = CheckMode::sample_vectors) {
  if (l < 1 || l > a.cols()) throw std::invalid_argument("check_rip: l out of range");
  if (alpha <= 0 || alpha >= 1) throw std::invalid_argument("check_rip: alpha outside (0,1)");
  PropertyReport report{PropertyKind::rip, l, alpha, 0, 0, 0, 1};
  auto note = [&](double lo, double hi) {
    ++report.trials;
    if (lo < 1 - alpha || hi > 1 + alpha) ++report.violations;
    if (std::abs(lo - 1) > std::abs(report.worst_ratio - 1)) report.worst_ratio = lo;
    if (std::abs(hi - 1) > std::abs(report.worst_ratio - 1)) report.worst_ratio = hi;
  };
  if (mode == CheckMode::exhaustive) {
    if (a.cols() > 12 || l > 2)
      throw std::invalid_argument("check_rip: exhaustive mode needs n <= 12, l <= 2");
    for (const auto& support : detail::all_supports(a.cols(), l)) {
      const auto [lo, hi] = detail::support_singular_range(a, support);
      note(lo, hi);
    }
    return report;
  }
  for (long t = 0; t < trials; ++t) {
    SeededRng rng(seed, mix_seed(0x726970ull, static_cast<std::uint64_t>(t)));
    if (mode == CheckMode::sample_vectors) {
      const Signal x = detail::sparse_gaussian_vector(rng, a.cols(), l);
      const double r = (a * x).norm() / x.norm();
      note(r, r);
    } else {
      const auto [lo, hi] = detail::support_singular_range(a, detail::sample_support(rng, a.cols(), l));
      note(lo, hi);
    }
  }
  return report;
}

inline PropertyReport check_rec(const DenseMatrix& a, Eigen::Index l, double gamma, long trials,
                                std::uint64_t seed, CheckMode mode = CheckMode::sample_vectors) {
  if (l < 1 || l > a.cols()) throw std::invalid_argument("check_rec: l out of range");
  if (gamma <= 0) throw std::invalid_argument("check_rec: gamma must be positive");
  PropertyReport report{PropertyKind::rec, l, gamma, 0, 0, 0,
                        std::numeric_limits<double>::infinity()};
  auto note = [&](double lo) {
    ++report.trials;
    if (lo < gamma) ++report.violations;
    report.worst_ratio = std::min(report.worst_ratio, lo);
  };
  if (mode == CheckMode::exhaustive) {
    if (a.cols() > 12 || l > 2)
      throw std::invalid_argument("check_rec: exhaustive mode needs n <= 12, l <= 2");
    for (const auto& support : detail::all_supports(a.cols(), l))
      note(detail::support_singular_range(a, support).first);
    return report;
  }
  for (long t = 0; t < trials; ++t) {
    SeededRng rng(seed, mix_seed(0x726563ull, static_cast<std::uint64_t>(t)));
    if (mode == CheckMode::sample_vectors) {
      const Signal x = detail::sparse_gaussian_vector(rng, a.cols(), l);
      note((a * x).norm() / x.norm());
    } else {
      note(detail::support_singular_range(a, detail::sample_support(rng, a.cols(), l)).first);
    }
  }
  return report;
}

// REC evaluated on caller-provided vectors; check_srec with a zero generator
// reduces to this on the sampled differences.
inline PropertyReport check_rec_on(const DenseMatrix& a, double gamma,
                                   const std::vector<Signal>& vectors) {
  PropertyReport report{PropertyKind::rec, 0, gamma, 0, 0, 0,
                        std::numeric_limits<double>::infinity()};
  for (const auto& v : vectors) {
    const double nrm = v.norm();
    if (nrm == 0) continue;
    const double r = (a * v).norm() / nrm;
    ++report.trials;
    if (r < gamma) ++report.violations;
    report.worst_ratio = std::min(report.worst_ratio, r);
  }
  return report;
}

// Sampled members of S_{l,G}: x = G(z) + nu with z ~ N(0,I), nu l-sparse with
// Gaussian values. check_srec draws two per trial and tests the difference.
inline std::vector<Signal> srec_sample_differences(const GeneratorNetwork& g, Eigen::Index l,
                                                   long trials, std::uint64_t seed) {
  const Eigen::Index n = g.output_dim();
  std::vector<Signal> diffs;
  diffs.reserve(trials);
  for (long t = 0; t < trials; ++t) {
    SeededRng rng(seed, mix_seed(0x73726563ull, static_cast<std::uint64_t>(t)));
    Signal pair[2];
    for (auto& member : pair) {
      const LatentCode z = rng.gaussian_vector(g.latent_dim());
      Signal nu = Signal::Zero(n);
      for (const auto i : detail::sample_support(rng, n, l)) nu[i] = rng.gaussian();
      member = forward(g, z) + nu;
    }
    diffs.push_back(pair[0] - pair[1]);
  }
  return diffs;
}

// S-REC(S_{l,G}, gamma, delta): ||A(x1-x2)|| >= gamma ||x1-x2|| - delta over
// sampled pairs from the sparse-deviation set.
inline PropertyReport check_srec(const DenseMatrix& a, const GeneratorNetwork& g, Eigen::Index l,
                                 double gamma, double delta, long trials, std::uint64_t seed) {
  if (g.output_dim() != a.cols()) throw std::invalid_argument("check_srec: dimension mismatch");
  if (l < 0 || l > a.cols()) throw std::invalid_argument("check_srec: l out of range");
  if (gamma <= 0 || delta < 0) throw std::invalid_argument("check_srec: bad gamma/delta");
  PropertyReport report{PropertyKind::srec, l, gamma, delta, 0, 0,
                        std::numeric_limits<double>::infinity()};
  for (const auto& d : srec_sample_differences(g, l, trials, seed)) {
    const double nrm = d.norm();
    ++report.trials;
    if (nrm == 0) continue;
    const double lhs = (a * d).norm();
    if (lhs < gamma * nrm - delta) ++report.violations;
    report.worst_ratio = std::min(report.worst_ratio, lhs / nrm);
  }
  return report;
}

// Exact worst-case RIP deviation over every l-support (max of sigma_max - 1
// and 1 - sigma_min); tiny n only.
inline double exhaustive_rip_alpha(const DenseMatrix& a, Eigen::Index l) {
  if (a.cols() > 12) throw std::invalid_argument("exhaustive_rip_alpha: n too large");
  double alpha = 0;
  for (const auto& support : detail::all_supports(a.cols(), l)) {
    const auto [lo, hi] = detail::support_singular_range(a, support);
    alpha = std::max({alpha, 1 - lo, hi - 1});
  }
  return alpha;
}

// Exact worst-case REC constant (min sigma_min) over every l-support.
inline double exhaustive_rec_gamma(const DenseMatrix& a, Eigen::Index l) {
  if (a.cols() > 12) throw std::invalid_argument("exhaustive_rec_gamma: n too large");
  double gamma = std::numeric_limits<double>::infinity();
  for (const auto& support : detail::all_supports(a.cols(), l))
    gamma = std::min(gamma, detail::support_singular_range(a, support).first);
  return gamma;
}

struct BoundConstants {
  double alpha = 0;
  double delta = 0;
  double c0 = 0;       // 2((1+alpha)(1-alpha)^-1 + 1)
  double c1 = 0;       // 2(1-alpha)^-1
  double delta_prime = 0;  // delta (1-alpha)^-1
};

inline BoundConstants bound_constants(double alpha, double delta) {
  if (alpha <= 0 || alpha >= 1) throw std::invalid_argument("bound_constants: alpha outside (0,1)");
  if (delta < 0) throw std::invalid_argument("bound_constants: negative delta");
  BoundConstants c;
  c.alpha = alpha;
  c.delta = delta;
  c.c0 = 2.0 * ((1.0 + alpha) / (1.0 - alpha) + 1.0);
  c.c1 = 2.0 / (1.0 - alpha);
  c.delta_prime = delta / (1.0 - alpha);
  return c;
}

// Least l1 distance from x to the sparse-deviation set: for each grid z the
// optimal support absorbs the l largest residuals, so sigma is the sum of the
// n-l smallest |x - G(z)| magnitudes, minimized over the latent grid.
inline double sigma_lG(const Signal& x, const GeneratorNetwork& g, Eigen::Index l) {
  const Eigen::Index n = x.size();
  if (n > 12) throw std::invalid_argument("sigma_lG scale limits exceeded: need n <= 12");
  if (l < 0 || l > n) throw std::invalid_argument("sigma_lG: l out of range");
  if (g.output_dim() != n) throw std::invalid_argument("sigma_lG: dimension mismatch");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& z : detail::oracle_latent_grid(g)) {
    Signal diff = (x - forward(g, z)).cwiseAbs();
    std::sort(diff.data(), diff.data() + diff.size());
    double sum = 0;
    for (Eigen::Index i = 0; i < n - l; ++i) sum += diff[i];
    best = std::min(best, sum);
  }
  return best;
}

struct Lemma1Report {
  long trials = 0;
  long violations = 0;       // recovery error exceeding the bound
  long tube_violations = 0;  // ||A(x - decode)|| > 2 eps_max (+ solver slack)
  double worst_ratio = 0;    // max observed lhs / rhs
};

// Monte-Carlo check of the decoder bound
//   ||x - Delta(Ax + eps)||_2 <= (2l)^{-1/2} C0 sigma_{l,G}(x) + C1 eps_max + delta'
// with constants computed from an externally measured alpha. Noise is drawn
// with ||eps|| <= eps_max. Expected to show zero violations whenever the
// matrix passed the RIP / S-REC checks at the same parameters.
inline Lemma1Report check_lemma1_bound(const SensingEnsemble& e, const GeneratorNetwork& g,
                                       Eigen::Index l, double alpha_measured, double delta,
                                       double eps_max, long trials, std::uint64_t seed) {
  const Eigen::Index n = e.cols();
  if (n > 12 || l > 2) throw std::invalid_argument("check_lemma1_bound: scale limits exceeded");
  const BoundConstants c = bound_constants(alpha_measured, delta);
  Lemma1Report report;
  for (long t = 0; t < trials; ++t) {
    SeededRng rng(seed, mix_seed(0x6C656D31ull, static_cast<std::uint64_t>(t)));
    const Signal x = rng.gaussian_vector(n);
    Measurements y = e.matrix * x;
    if (eps_max > 0) {
      Measurements eps = rng.gaussian_vector(e.rows());
      eps *= eps_max * rng.uniform() / eps.norm();
      y += eps;
    }
    const Signal decoded = oracle_decode(e, y, g, l, eps_max);
    const double lhs = (x - decoded).norm();
    const double rhs = c.c0 * sigma_lG(x, g, l) / std::sqrt(2.0 * static_cast<double>(l)) +
                       c.c1 * eps_max + c.delta_prime;
    ++report.trials;
    if (lhs > rhs + 1e-9) ++report.violations;
    if (rhs > 0) report.worst_ratio = std::max(report.worst_ratio, lhs / rhs);
    if ((e.matrix * (x - decoded)).norm() > 2 * eps_max + 1e-6) ++report.tube_violations;
  }
  return report;
}

inline const char* property_name(PropertyKind p) {
  switch (p) {
    case PropertyKind::rip: return "rip";
    case PropertyKind::rec: return "rec";
    case PropertyKind::srec: return "srec";
  }
  return "?";
}

}  // namespace sparsegen
