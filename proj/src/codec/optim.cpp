#include "ua/codec/optim.hpp"

#include <cmath>
#include <numbers>

namespace ua {

Adam::Adam(const std::vector<nn::Mat*>& params, double beta1, double beta2, double epsilon)
    : beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {
  for (const nn::Mat* p : params) {
    m1_.push_back(nn::Mat::Zero(p->rows(), p->cols()));
    m2_.push_back(nn::Mat::Zero(p->rows(), p->cols()));
  }
}

void Adam::step(const std::vector<nn::Mat*>& params, const std::vector<nn::Mat*>& grads,
                double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m1_[i] = beta1_ * m1_[i] + (1.0 - beta1_) * *grads[i];
    m2_[i] = beta2_ * m2_[i] + (1.0 - beta2_) * grads[i]->cwiseProduct(*grads[i]);
    params[i]->array() -= lr * (m1_[i].array() / c1) / ((m2_[i].array() / c2).sqrt() + epsilon_);
  }
}

void sgd_step(const std::vector<nn::Mat*>& params, const std::vector<nn::Mat*>& grads, double lr) {
  for (std::size_t i = 0; i < params.size(); ++i) *params[i] -= lr * *grads[i];
}

double cosine_lr(double lr, int step, int steps) {
  if (steps <= 1) return lr;
  return lr * 0.5 * (1.0 + std::cos(std::numbers::pi * step / (steps - 1)));
}

}  // namespace ua
