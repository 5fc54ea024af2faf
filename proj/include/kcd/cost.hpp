#pragma once

// Threshold schedule and training-cost accounting.

#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "kcd/error.hpp"

namespace kcd::cost {

// tau_s = rho^(s/S), s = 1..S. tau_S == rho.
inline std::vector<double> tau_schedule(double rho, std::size_t stages) {
  if (!(rho > 0.0 && rho <= 1.0)) throw InvalidInput("rho must lie in (0, 1]");
  if (stages == 0) throw InvalidInput("stage count must be >= 1");
  std::vector<double> taus(stages);
  for (std::size_t s = 1; s <= stages; ++s) {
    taus[s - 1] = s == stages ? rho : std::pow(rho, static_cast<double>(s) / static_cast<double>(stages));
  }
  return taus;
}

// Fraction of full-set knowledge points consumed when every stage trains the
// same number of epochs on a tau_s share of the set.
inline double relative_cost(std::span<const double> taus) {
  if (taus.empty()) throw InvalidInput("empty tau schedule");
  return std::accumulate(taus.begin(), taus.end(), 0.0) / static_cast<double>(taus.size());
}

// Per-sample floating-point cost of each network pass.
struct PassFlops {
  double teacher_forward = 1.0;
  double student_forward = 1.0;
  double student_backward = 1.0;
};

// Total samples pushed through each pass over a whole run.
struct PassCounts {
  double teacher_forward = 0.0;
  double student_forward = 0.0;
  double student_backward = 0.0;
};

inline double flops(const PassCounts& n, const PassFlops& f) {
  return n.teacher_forward * f.teacher_forward + n.student_forward * f.student_forward +
         n.student_backward * f.student_backward;
}

// Ratio of the FLOP totals of a method and a baseline.
inline double computation_ratio(const PassCounts& method, const PassCounts& baseline, const PassFlops& f) {
  const double base = flops(baseline, f);
  if (!(base > 0.0)) throw InvalidInput("baseline computation must be positive");
  return flops(method, f) / base;
}

// Conventional KD: every one of the N points goes through all three passes
// in each of the I epochs.
inline PassCounts full_kd_passes(double n_points, double epochs) {
  const double n = n_points * epochs;
  return {n, n, n};
}

// Condensed KD: stage s feeds |K| * tau_s points for stage_len epochs, and
// each fed point takes all three passes.
inline PassCounts condensed_passes(double n_points, std::span<const double> taus, double stage_len) {
  const double n = n_points * std::accumulate(taus.begin(), taus.end(), 0.0) * stage_len;
  return {n, n, n};
}

// Sampling-based baselines that re-forward the full set through the student
// (N_s1 = N + N_k) while only N_k points take the teacher forward and the
// student backward.
inline PassCounts sampled_passes(double n_total, double n_kept) {
  return {n_kept, n_total + n_kept, n_kept};
}

}  // namespace kcd::cost
