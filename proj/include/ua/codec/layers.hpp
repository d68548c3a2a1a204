#pragma once

// Minimal 1-D convolutional building blocks with hand-written backward
// passes. Activations are (channels x batch*length) column-major matrices;
// column b*length + t holds timestep t of batch item b.
//
// Layers hold parameters only. Forward passes write what the backward pass
// needs into a caller-owned cache, so a parameter set can be shared by
// concurrent inference calls. Gradients accumulate into a second instance
// of the same layer type (see zeros_like).

#include <vector>

#include <Eigen/Core>

#include "ua/common/rng.hpp"

namespace ua::nn {

using Mat = Eigen::MatrixXd;

struct SeqShape {
  int batch = 1;
  int length = 0;
  int columns() const { return batch * length; }
};

enum class Activation { kIdentity, kGelu };

// Strided 1-D convolution with independent left/right zero padding. Weight
// column k*in + c multiplies input channel c at tap k.
struct Conv1d {
  Mat weight;  // out x (kernel * in)
  Mat bias;    // out x 1
  int in = 0;
  int out = 0;
  int kernel = 1;
  int stride = 1;
  int pad_left = 0;
  int pad_right = 0;

  struct Cache {
    Mat cols;
    SeqShape in_shape;
  };

  static Conv1d make(int in, int out, int kernel, int stride, int pad_left, int pad_right);
  int out_length(int in_length) const {
    return (in_length + pad_left + pad_right - kernel) / stride + 1;
  }
  Mat forward(const Mat& x, SeqShape in_shape, Cache* cache) const;
  Mat backward(const Mat& dy, const Cache& cache, Conv1d& grad) const;
  void collect(std::vector<Mat*>& out);
};

// Transposed convolution: input position i, tap k writes output position
// i*stride - pad + k. Weight row k*out + c produces output channel c at tap k.
struct ConvTranspose1d {
  Mat weight;  // (kernel * out) x in
  Mat bias;    // out x 1
  int in = 0;
  int out = 0;
  int kernel = 1;
  int stride = 1;
  int pad = 0;
  int out_pad = 0;

  struct Cache {
    Mat x;
    SeqShape in_shape;
  };

  static ConvTranspose1d make(int in, int out, int kernel, int stride, int pad, int out_pad);
  int out_length(int in_length) const {
    return (in_length - 1) * stride - 2 * pad + kernel + out_pad;
  }
  Mat forward(const Mat& x, SeqShape in_shape, Cache* cache) const;
  Mat backward(const Mat& dy, const Cache& cache, ConvTranspose1d& grad) const;
  void collect(std::vector<Mat*>& out);
};

// Normalizes each (group of channels x time) block of every batch item.
struct GroupNorm {
  Mat gamma;
  Mat beta;
  int groups = 1;

  struct Cache {
    Mat xhat;
    std::vector<double> inv_std;
    SeqShape shape;
  };

  static GroupNorm make(int channels, int groups);
  Mat forward(const Mat& x, SeqShape shape, Cache* cache) const;
  Mat backward(const Mat& dy, const Cache& cache, GroupNorm& grad) const;
  void collect(std::vector<Mat*>& out);
};

// Normalizes each column over channels.
struct LayerNorm {
  Mat gamma;
  Mat beta;

  struct Cache {
    Mat xhat;
    Eigen::RowVectorXd inv_std;
  };

  static LayerNorm make(int channels);
  Mat forward(const Mat& x, Cache* cache) const;
  Mat backward(const Mat& dy, const Cache& cache, LayerNorm& grad) const;
  void collect(std::vector<Mat*>& out);
};

Mat activate(Activation act, const Mat& x);
// Gradient through the activation given its input x.
Mat activate_backward(Activation act, const Mat& x, const Mat& dy);

// Pre-norm residual block:
//   a = x + conv(act(groupnorm(x)))
//   y = a + fc2(act(fc1(layernorm(a))))
// With normalization disabled the norm layers are identities.
struct ResBlock {
  GroupNorm gn;
  Conv1d conv;
  LayerNorm ln;
  Conv1d fc1;
  Conv1d fc2;
  bool use_norm = true;
  Activation act = Activation::kGelu;

  struct Cache {
    GroupNorm::Cache gn;
    Mat act1_in;
    Conv1d::Cache conv;
    LayerNorm::Cache ln;
    Conv1d::Cache fc1;
    Mat act2_in;
    Conv1d::Cache fc2;
  };

  static ResBlock make(int channels, int kernel, int expansion, int groups, bool use_norm,
                       Activation act);
  Mat forward(const Mat& x, SeqShape shape, Cache* cache) const;
  Mat backward(const Mat& dy, const Cache& cache, ResBlock& grad) const;
  void collect(std::vector<Mat*>& out);
};

// Fills a weight matrix with N(0, gain^2 / fan_in) draws.
void init_weight(Mat& w, int fan_in, double gain, Rng& rng);

// Copy of `layer` with every parameter tensor zeroed.
template <class Layer>
Layer zeros_like(const Layer& layer) {
  Layer copy = layer;
  std::vector<Mat*> tensors;
  copy.collect(tensors);
  for (Mat* t : tensors) t->setZero();
  return copy;
}

}  // namespace ua::nn
