#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>

#include "eagle/checks/check.hpp"
#include "eagle/checks/oracles.hpp"
#include "eagle/glm.hpp"

namespace eagle::checks {

// Gap between the optimizer and the closed-form minimum on S = 1 instances:
// 4x4x2 features, 1-4 samples, K in {1, 3}, default regularizer.
struct GlmConvergence {
  int converged[2] = {0, 0};  // by K = 1, K = 3
  int total[2] = {0, 0};
  double worst_gap = 0.0;
  bool monotone = true;

  std::string summary(double tol) const {
    return "gap <= " + format_double(tol) + " after 50 steps: K=1 " + std::to_string(converged[0]) + "/" +
           std::to_string(total[0]) + ", K=3 " + std::to_string(converged[1]) + "/" + std::to_string(total[1]) +
           "; worst gap " + format_double(worst_gap);
  }
  bool all() const { return converged[0] == total[0] && converged[1] == total[1]; }
};

inline GlmConvergence glm_wls_convergence(std::uint64_t seed, double tol, bool through_memory) {
  std::mt19937_64 rng(seed);
  GlmConvergence out;
  const double lambda = 0.1;
  for (int rep = 0; rep < 5; ++rep) {
    for (int n = 1; n <= 4; ++n) {
      for (int kk = 0; kk < 2; ++kk) {
        const int k = kk ? 3 : 1;
        const auto samples = oracle::random_glm_samples(rng, n, 4, 4, 2, true);
        OptimizeTrace tr;
        double loss = 0.0;
        if (through_memory) {
          GlmMemory mem(samples[0]);
          for (std::size_t i = 1; i < samples.size(); ++i) mem.push_dynamic(samples[i]);
          loss = track_loss(optimize_filter(TrackFilter::zeros(k, 2, lambda), mem, 50, {}, &tr), mem);
        } else {
          std::vector<const GlmSample*> ptrs;
          for (const auto& s : samples) ptrs.push_back(&s);
          const TrackObjective obj(ptrs, {}, lambda);
          loss = obj.loss(optimize_filter(TrackFilter::zeros(k, 2, lambda), obj, 50, &tr).kernel);
        }
        const double best =
            oracle::track_loss(oracle::track_normal_equations(samples, k, {}, lambda), samples, {}, lambda);
        const double gap = loss - best;
        out.worst_gap = std::max(out.worst_gap, gap);
        out.total[kk] += 1;
        out.converged[kk] += gap <= tol;
        for (std::size_t i = 1; i < tr.losses.size(); ++i) out.monotone &= tr.losses[i] <= tr.losses[i - 1];
      }
    }
  }
  return out;
}

}  // namespace eagle::checks
