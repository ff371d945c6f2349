#pragma once

#include <limits>
#include <optional>

#include "sparsegen/basis.hpp"
#include "sparsegen/genmodel.hpp"
#include "sparsegen/optimizer.hpp"

namespace sparsegen {

enum class SolverMode { joint_subgradient, alternating_prox };

struct SolverConfig {
  double lambda = 100.0;      // Lagrange multiplier on the measurement term
  double step_size = 0.01;    // Adam step for the latent variable
  long iterations = 1000;
  long polish_iterations = 0;  // extra alternating-prox steps after the main loop
  long restarts = 10;
  SolverMode mode = SolverMode::joint_subgradient;
  double clip_lo = 0.0;
  double clip_hi = 1.0;
  std::optional<double> project_latent_radius;  // renormalize z after each step
  std::uint64_t seed = 0;
  bool freeze_nu = false;  // hold the deviation at zero (pure generative path)
  // Warm starts: every restart begins from these instead of z ~ N(0,I), nu = 0.
  std::optional<LatentCode> z_init;
  std::optional<Signal> nu_init;
};

struct RecoveryResult {
  Signal x_hat;
  std::optional<LatentCode> z_hat;
  std::optional<Signal> nu_hat;
  std::vector<double> objective_trace;  // selected restart; entry 0 is the initial state
  double measurement_error = 0;         // ||A x_hat - y||_2
  long restarts_used = 0;
  long best_restart = 0;
};

inline SolverMode parse_solver_mode(const std::string& name) {
  if (name == "joint-subgradient") return SolverMode::joint_subgradient;
  if (name == "alternating-prox") return SolverMode::alternating_prox;
  throw std::invalid_argument("unknown solver mode: " + name);
}

namespace detail {

inline void check_finite(const Signal& v, const char* what) {
  if (!v.allFinite()) throw NumericError(std::string("non-finite values in ") + what);
}

inline Eigen::MatrixXd basis_apply(const OrthonormalBasis& b, const Eigen::MatrixXd& m) {
  return b.kind == BasisKind::identity ? m : Eigen::MatrixXd(b.matrix * m);
}

inline Eigen::MatrixXd basis_apply_inverse(const OrthonormalBasis& b, const Eigen::MatrixXd& m) {
  return b.kind == BasisKind::identity ? m : Eigen::MatrixXd(b.matrix.transpose() * m);
}

}  // namespace detail

// l1-regularized least squares  min ||A x - y||_2^2 + mu ||x||_1  by FISTA.
// Gradient step 1/(2 lambda_max(A^T A)) with a small margin for the power
// iteration estimate; the returned signal is clipped.
inline RecoveryResult lasso(const SensingEnsemble& e, const Measurements& y, double mu,
                            long iterations = 1000, double clip_lo = 0.0, double clip_hi = 1.0) {
  if (mu <= 0) throw std::invalid_argument("lasso: mu must be positive");
  if (y.size() != e.rows()) throw std::invalid_argument("lasso: measurement length mismatch");
  if (!y.allFinite()) throw NumericError("lasso: non-finite measurements");
  const Eigen::Index n = e.cols();
  const double lip = 2.0 * top_eigenvalue_ata(e.matrix) * 1.02;
  const double step = lip > 0 ? 1.0 / lip : 1.0;

  Signal x = Signal::Zero(n);
  Signal momentum = x;
  double t = 1.0;
  std::vector<double> trace;
  trace.reserve(iterations + 1);
  trace.push_back(y.squaredNorm());
  for (long it = 0; it < iterations; ++it) {
    const Signal grad = 2.0 * (e.matrix.transpose() * (e.matrix * momentum - y));
    const Signal next = soft_threshold(momentum - step * grad, step * mu);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    momentum = next + ((t - 1.0) / t_next) * (next - x);
    x = next;
    t = t_next;
    trace.push_back((e.matrix * x - y).squaredNorm() + mu * x.lpNorm<1>());
  }
  detail::check_finite(x, "lasso iterate");

  RecoveryResult result;
  result.x_hat = clip_to_box(x, clip_lo, clip_hi);
  result.nu_hat = x;
  result.objective_trace = std::move(trace);
  result.measurement_error = (e.matrix * result.x_hat - y).norm();
  result.restarts_used = 1;
  return result;
}

namespace detail {

// One proximal step on nu at fixed z for the joint objective
// ||B nu||_1 + lambda ||A (gz + nu) - y||_2^2 with step eta <= 1/(2 lambda L_A):
// nu <- B^T soft_threshold(B (nu - eta * 2 lambda A^T r), eta).
inline Signal prox_nu_step(const SensingEnsemble& e, const Measurements& y, const Signal& gz,
                           const OrthonormalBasis& basis, const Signal& nu, double eta,
                           double lambda) {
  const Signal grad = 2.0 * lambda * (e.matrix.transpose() * (e.matrix * (gz + nu) - y));
  return apply_inverse(basis, soft_threshold(apply(basis, nu - eta * grad), eta));
}

inline double joint_objective(const SensingEnsemble& e, const Measurements& y, const Signal& gz,
                              const OrthonormalBasis& basis, const Signal& nu, double lambda) {
  return apply(basis, nu).lpNorm<1>() + lambda * (e.matrix * (gz + nu) - y).squaredNorm();
}

}  // namespace detail

// Joint recovery  min_{z,nu} ||B nu||_1 + lambda ||A (G(z) + nu) - y||_2^2.
// All restarts run batched (one column each); the restart whose clipped
// candidate has the smallest measurement error wins, lowest index on ties.
inline RecoveryResult sparse_gen(const SensingEnsemble& e, const Measurements& y,
                                 const GeneratorNetwork& g, const OrthonormalBasis& basis,
                                 const SolverConfig& cfg) {
  if (g.output_dim() != e.cols())
    throw std::invalid_argument("sparse_gen: generator output does not match ensemble columns");
  if (y.size() != e.rows()) throw std::invalid_argument("sparse_gen: measurement length mismatch");
  if (!y.allFinite()) throw NumericError("sparse_gen: non-finite measurements");
  if (basis.size != e.cols()) throw std::invalid_argument("sparse_gen: basis size mismatch");
  if (cfg.lambda <= 0 || cfg.step_size <= 0 || cfg.restarts < 1)
    throw std::invalid_argument("sparse_gen: invalid solver config");

  const Eigen::Index k = g.latent_dim();
  const Eigen::Index n = e.cols();
  const long restarts = cfg.restarts;

  Eigen::MatrixXd z(k, restarts);
  if (cfg.z_init) {
    if (cfg.z_init->size() != k) throw std::invalid_argument("sparse_gen: z_init size mismatch");
    z = cfg.z_init->replicate(1, restarts);
  } else {
    for (long r = 0; r < restarts; ++r) {
      SeededRng rng(cfg.seed, mix_seed(0x7265737461727473ull, static_cast<std::uint64_t>(r)));
      for (Eigen::Index i = 0; i < k; ++i) z(i, r) = rng.gaussian();
    }
  }
  Eigen::MatrixXd nu = Eigen::MatrixXd::Zero(n, restarts);
  if (cfg.nu_init) {
    if (cfg.nu_init->size() != n) throw std::invalid_argument("sparse_gen: nu_init size mismatch");
    nu = cfg.nu_init->replicate(1, restarts);
  }

  Adam adam_z(k, restarts, cfg.step_size);
  Adam adam_nu(n, restarts, cfg.step_size);
  const double eta_prox =
      1.0 / (2.0 * cfg.lambda * std::max(top_eigenvalue_ata(e.matrix), 1e-12) * 1.02);

  const Eigen::MatrixXd y_rep = y.replicate(1, restarts);
  std::vector<std::vector<double>> traces(restarts);

  auto record = [&](const Eigen::MatrixXd& resid) {
    Eigen::VectorXd l1 = Eigen::VectorXd::Zero(restarts);
    if (!cfg.freeze_nu)
      l1 = detail::basis_apply(basis, nu).cwiseAbs().colwise().sum().transpose();
    for (long r = 0; r < restarts; ++r)
      traces[r].push_back(l1[r] + cfg.lambda * resid.col(r).squaredNorm());
  };

  ForwardTrace trace;
  auto run_phase = [&](SolverMode mode, long iterations) {
    for (long it = 0; it < iterations; ++it) {
      Eigen::MatrixXd gz = forward_batch(g, z, &trace);
      Eigen::MatrixXd resid = e.matrix * (gz + nu) - y_rep;                       // m x R
      record(resid);
      Eigen::MatrixXd cot = (2.0 * cfg.lambda) * (e.matrix.transpose() * resid);  // n x R
      adam_z.update(z, vjp_batch(g, trace, cot));
      if (cfg.project_latent_radius) {
        const double radius = *cfg.project_latent_radius;
        for (long r = 0; r < restarts; ++r) {
          const double zn = z.col(r).norm();
          if (zn > radius) z.col(r) *= radius / zn;
        }
      }

      if (!cfg.freeze_nu) {
        if (mode == SolverMode::joint_subgradient) {
          const Eigen::MatrixXd bn = detail::basis_apply(basis, nu);
          const Eigen::MatrixXd sign =
              bn.unaryExpr([](double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); });
          Eigen::MatrixXd grad_nu = cot + detail::basis_apply_inverse(basis, sign);
          adam_nu.update(nu, grad_nu);
        } else {
          const Eigen::MatrixXd gz_new = forward_batch(g, z);
          const Eigen::MatrixXd resid_new = e.matrix * (gz_new + nu) - y_rep;
          const Eigen::MatrixXd grad =
              (2.0 * cfg.lambda) * (e.matrix.transpose() * resid_new);
          nu = detail::basis_apply_inverse(
              basis, detail::basis_apply(basis, Eigen::MatrixXd(nu - eta_prox * grad))
                         .unaryExpr([eta = eta_prox](double x) {
                           const double m = std::abs(x) - eta;
                           return m > 0 ? (x > 0 ? m : -m) : 0.0;
                         }));
        }
      }
    }
  };
  run_phase(cfg.mode, cfg.iterations);
  if (cfg.polish_iterations > 0) run_phase(SolverMode::alternating_prox, cfg.polish_iterations);
  const Eigen::MatrixXd gz_final = forward_batch(g, z);
  record(e.matrix * (gz_final + nu) - y_rep);

  // Select by measurement error of the clipped candidate.
  long best = 0;
  double best_err = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd candidates(n, restarts);
  for (long r = 0; r < restarts; ++r) {
    candidates.col(r) = clip_to_box(Signal(gz_final.col(r) + nu.col(r)), cfg.clip_lo, cfg.clip_hi);
    const double err = (e.matrix * candidates.col(r) - y).norm();
    if (err < best_err) {
      best_err = err;
      best = r;
    }
  }

  RecoveryResult result;
  result.x_hat = candidates.col(best);
  detail::check_finite(result.x_hat, "sparse_gen result");
  result.z_hat = LatentCode(z.col(best));
  result.nu_hat = Signal(nu.col(best));
  result.objective_trace = std::move(traces[best]);
  result.measurement_error = best_err;
  result.restarts_used = restarts;
  result.best_restart = best;
  return result;
}

inline RecoveryResult sparse_gen(const SensingEnsemble& e, const Measurements& y,
                                 const GeneratorNetwork& g, const SolverConfig& cfg) {
  return sparse_gen(e, y, g, identity_basis(e.cols()), cfg);
}

// min_z ||A G(z) - y||_2^2 over restarts: the lambda=1, frozen-nu special
// case of the joint solver, so both share trajectories under equal seeds.
inline RecoveryResult gen_recover(const SensingEnsemble& e, const Measurements& y,
                                  const GeneratorNetwork& g, const SolverConfig& cfg) {
  SolverConfig inner = cfg;
  inner.lambda = 1.0;
  inner.freeze_nu = true;
  inner.mode = SolverMode::joint_subgradient;
  RecoveryResult result = sparse_gen(e, y, g, identity_basis(e.cols()), inner);
  result.nu_hat.reset();
  return result;
}

namespace detail {

// min ||u restricted to mask||_1  s.t.  ||A u - b||_2 <= eps, by ADMM.
// mask[i] == 1 marks coordinates that are penalized (off-support). Iterates
// until the primal residuals drop below tol (consensus copies then agree, so
// the ball constraint holds to the same accuracy).
inline Signal l1_tube_min(const DenseMatrix& a, const Measurements& b,
                          const Eigen::VectorXd& mask, double eps, double tol = 1e-9,
                          int max_iterations = 50000, double rho = 1.0) {
  const Eigen::Index n = a.cols();
  Eigen::MatrixXd normal = a.transpose() * a;
  normal.diagonal() += mask;  // M^T M for a 0/1 diagonal mask
  const Eigen::LDLT<Eigen::MatrixXd> solver(normal);

  Signal u = Signal::Zero(n);
  Signal w = Signal::Zero(n);  // consensus copy of masked u
  Measurements v = b;          // consensus copy of A u
  Signal dual_w = Signal::Zero(n);
  Measurements dual_v = Measurements::Zero(a.rows());

  for (int it = 0; it < max_iterations; ++it) {
    const Signal rhs = mask.cwiseProduct(w - dual_w) + a.transpose() * (v - dual_v);
    u = solver.solve(rhs);
    w = soft_threshold(mask.cwiseProduct(u) + dual_w, 1.0 / rho);
    const Measurements au = a * u;
    const Measurements shifted = au + dual_v - b;
    const double dist = shifted.norm();
    v = b + (dist > eps && dist > 0 ? eps / dist : 1.0) * shifted;
    const double primal_w = (mask.cwiseProduct(u) - w).norm();
    const double primal_v = (au - v).norm();
    dual_w += mask.cwiseProduct(u) - w;
    dual_v += au - v;
    if (it > 10 && primal_w < tol && primal_v < tol) break;
  }
  return u;
}

inline std::vector<std::vector<Eigen::Index>> all_supports(Eigen::Index n, Eigen::Index l) {
  std::vector<std::vector<Eigen::Index>> out;
  if (l == 0) {
    out.push_back({});
    return out;
  }
  std::vector<Eigen::Index> idx(l);
  for (Eigen::Index i = 0; i < l; ++i) idx[i] = i;
  while (true) {
    out.push_back(idx);
    Eigen::Index pos = l - 1;
    while (pos >= 0 && idx[pos] == n - l + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (Eigen::Index j = pos + 1; j < l; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

// Latent grid for the toy-scale oracles: 21 points per axis over [-3, 3],
// k <= 2. Zero generators evaluate a single point.
inline std::vector<LatentCode> oracle_latent_grid(const GeneratorNetwork& g) {
  const bool zero_net = g.depth() == 1 && g.weights[0].isZero(0) && g.biases[0].isZero(0);
  if (zero_net) return {LatentCode::Zero(g.latent_dim())};
  const bool affine = g.depth() == 1 && g.activations[0] == Activation::identity;
  if (!affine || g.latent_dim() > 2)
    throw std::invalid_argument(
        "oracle scale limits exceeded: generator must be zero or affine with k <= 2");
  const int points = 21;
  std::vector<LatentCode> grid;
  if (g.latent_dim() == 1) {
    for (int i = 0; i < points; ++i) {
      LatentCode z(1);
      z[0] = -3.0 + 6.0 * i / (points - 1);
      grid.push_back(z);
    }
  } else {
    for (int i = 0; i < points; ++i)
      for (int j = 0; j < points; ++j) {
        LatentCode z(2);
        z[0] = -3.0 + 6.0 * i / (points - 1);
        z[1] = -3.0 + 6.0 * j / (points - 1);
        grid.push_back(z);
      }
  }
  return grid;
}

}  // namespace detail

// Brute-force realization of the existence decoder
//   Delta(y) = argmin_{x : ||A x - y||_2 <= eps_max} sigma_{l,G}(x)
// over all supports and a coarse latent grid. Feasible only at toy scale.
inline Signal oracle_decode(const SensingEnsemble& e, const Measurements& y,
                            const GeneratorNetwork& g, Eigen::Index l, double eps_max) {
  const Eigen::Index n = e.cols();
  if (n > 12 || l > 2 || l < 0)
    throw std::invalid_argument("oracle_decode scale limits exceeded: need n <= 12, l <= 2");
  if (g.output_dim() != n) throw std::invalid_argument("oracle_decode: generator size mismatch");
  const auto grid = detail::oracle_latent_grid(g);
  const auto supports = detail::all_supports(n, l);

  // Fast path: a model point G(z) + nu inside the tube has sigma = 0 and is
  // an exact argmin. Least squares on the support columns finds the best nu.
  bool found = false;
  double best_residual = std::numeric_limits<double>::infinity();
  Signal best_x;
  for (const auto& z : grid) {
    const Signal gz = forward(g, z);
    const Measurements target = y - e.matrix * gz;
    for (const auto& support : supports) {
      Signal candidate = gz;
      double residual;
      if (support.empty()) {
        residual = target.norm();
      } else {
        Eigen::MatrixXd cols(e.rows(), static_cast<Eigen::Index>(support.size()));
        for (std::size_t j = 0; j < support.size(); ++j) cols.col(j) = e.matrix.col(support[j]);
        const Eigen::VectorXd coef = cols.colPivHouseholderQr().solve(target);
        for (std::size_t j = 0; j < support.size(); ++j) candidate[support[j]] += coef[j];
        residual = (cols * coef - target).norm();
      }
      if (residual <= eps_max + 1e-12 && residual < best_residual) {
        best_residual = residual;
        best_x = candidate;
        found = true;
      }
    }
  }
  if (found) return best_x;
  if (l == 0) throw std::domain_error("oracle_decode: infeasible (no model point in the tube)");

  // No model point is feasible: minimize the off-support l1 distance over the
  // tube exactly, per (z, support), and keep the global minimizer.
  double best_sigma = std::numeric_limits<double>::infinity();
  for (const auto& z : grid) {
    const Signal gz = forward(g, z);
    const Measurements shifted = y - e.matrix * gz;
    for (const auto& support : supports) {
      Eigen::VectorXd mask = Eigen::VectorXd::Ones(n);
      for (const auto i : support) mask[i] = 0.0;
      const Signal u = detail::l1_tube_min(e.matrix, shifted, mask, eps_max);
      const double sigma = mask.cwiseProduct(u).lpNorm<1>();
      if (sigma < best_sigma) {
        best_sigma = sigma;
        best_x = gz + u;
      }
    }
  }
  return best_x;
}

}  // namespace sparsegen
