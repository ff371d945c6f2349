// Checks RIP on a Gaussian measurement matrix at two measurement counts to
// show how concentration kicks in as m grows.
#include <cstdio>

#include "sparsegen/verify.hpp"

int main() {
  using namespace sparsegen;

  for (const Eigen::Index m : {20, 80, 160}) {
    const auto e = gaussian_ensemble(m, 256, 0, /*seed=*/7);
    const auto report =
        check_rip(e.matrix, /*l=*/5, /*alpha=*/0.5, /*trials=*/500, /*seed=*/1,
                  CheckMode::sample_supports);
    std::printf("m = %3ld: %ld / %ld sampled supports inside the (1 +/- alpha) band, worst %.3f\n",
                static_cast<long>(m), report.trials - report.violations, report.trials,
                report.worst_ratio);
  }
  return 0;
}
