#pragma once

#include <vector>

#include "ua/codec/layers.hpp"

namespace ua {

// Adam with bias correction, one moment pair per parameter tensor.
class Adam {
 public:
  Adam(const std::vector<nn::Mat*>& params, double beta1 = 0.9, double beta2 = 0.999,
       double epsilon = 1e-8);
  void step(const std::vector<nn::Mat*>& params, const std::vector<nn::Mat*>& grads, double lr);

 private:
  double beta1_;
  double beta2_;
  double epsilon_;
  long long t_ = 0;
  std::vector<nn::Mat> m1_;
  std::vector<nn::Mat> m2_;
};

void sgd_step(const std::vector<nn::Mat*>& params, const std::vector<nn::Mat*>& grads, double lr);

// lr scaled by 0.5 * (1 + cos(pi * step / (steps - 1))).
double cosine_lr(double lr, int step, int steps);

}  // namespace ua
