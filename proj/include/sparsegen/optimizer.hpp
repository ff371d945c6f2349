#pragma once

#include "sparsegen/core.hpp"

namespace sparsegen {

// Elementwise Adam over an Eigen matrix; columns can hold independent
// problems (parallel restarts) since all state is per-entry.
class Adam {
 public:
  Adam(Eigen::Index rows, Eigen::Index cols, double step, double beta1 = 0.9,
       double beta2 = 0.999, double eps = 1e-8)
      : step_(step), beta1_(beta1), beta2_(beta2), eps_(eps),
        m_(Eigen::MatrixXd::Zero(rows, cols)), v_(Eigen::MatrixXd::Zero(rows, cols)) {}

  void update(Eigen::MatrixXd& params, const Eigen::MatrixXd& grad) {
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
    const double bias1 = 1.0 - std::pow(beta1_, t_);
    const double bias2 = 1.0 - std::pow(beta2_, t_);
    params -= (step_ / bias1) *
              m_.cwiseQuotient(((v_ / bias2).cwiseSqrt().array() + eps_).matrix());
  }

 private:
  double step_, beta1_, beta2_, eps_;
  long t_ = 0;
  Eigen::MatrixXd m_, v_;
};

// Top eigenvalue of A^T A by power iteration with deterministic start.
inline double top_eigenvalue_ata(const DenseMatrix& a, int iterations = 30) {
  Eigen::VectorXd v = Eigen::VectorXd::Constant(a.cols(), 1.0 / std::sqrt(double(a.cols())));
  double lambda = 0;
  for (int it = 0; it < iterations; ++it) {
    Eigen::VectorXd next = a.transpose() * (a * v);
    const double norm_next = next.norm();
    if (norm_next == 0) return 0;
    lambda = norm_next;  // Rayleigh quotient of unit v equals ||A^T A v||
    v = next / norm_next;
  }
  return lambda;
}

}  // namespace sparsegen
