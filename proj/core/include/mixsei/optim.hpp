#pragma once

#include <cstdint>
#include <vector>

namespace mixsei::nn {

// Adam state plus the step-decay schedule that drives its learning rate.
struct AdamState {
  std::int64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double lr0 = 3e-4;
  int step_size = 20;
  double gamma = 0.5;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

// lr0 * gamma^floor(epoch / step_size), epochs counted from zero.
double steplr(const AdamState& state, int epoch);

// One Adam update with bias correction; params and grads must match the
// state's moment-array length.
void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               AdamState& state, double lr);

}  // namespace mixsei::nn
