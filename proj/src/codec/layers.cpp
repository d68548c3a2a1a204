#include "ua/codec/layers.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace ua::nn {

namespace {

constexpr double kNormEps = 1e-5;

bool is_pointwise(const Conv1d& c) {
  return c.kernel == 1 && c.stride == 1 && c.pad_left == 0 && c.pad_right == 0;
}

}  // namespace

void init_weight(Mat& w, int fan_in, double gain, Rng& rng) {
  std::normal_distribution<double> normal(0.0, gain / std::sqrt(static_cast<double>(fan_in)));
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = normal(rng);
  }
}

// ---------------------------------------------------------------- Conv1d

Conv1d Conv1d::make(int in, int out, int kernel, int stride, int pad_left, int pad_right) {
  Conv1d c;
  c.in = in;
  c.out = out;
  c.kernel = kernel;
  c.stride = stride;
  c.pad_left = pad_left;
  c.pad_right = pad_right;
  c.weight = Mat::Zero(out, kernel * in);
  c.bias = Mat::Zero(out, 1);
  return c;
}

Mat Conv1d::forward(const Mat& x, SeqShape in_shape, Cache* cache) const {
  const int t_out = out_length(in_shape.length);
  if (is_pointwise(*this)) {
    if (cache != nullptr) {
      cache->cols = x;
      cache->in_shape = in_shape;
    }
    Mat y = weight * x;
    y.colwise() += bias.col(0);
    return y;
  }
  Mat cols = Mat::Zero(static_cast<Eigen::Index>(kernel) * in,
                       static_cast<Eigen::Index>(in_shape.batch) * t_out);
  for (int b = 0; b < in_shape.batch; ++b) {
    for (int o = 0; o < t_out; ++o) {
      const Eigen::Index col = static_cast<Eigen::Index>(b) * t_out + o;
      for (int k = 0; k < kernel; ++k) {
        const int i = o * stride - pad_left + k;
        if (i < 0 || i >= in_shape.length) continue;
        cols.col(col).segment(static_cast<Eigen::Index>(k) * in, in) =
            x.col(static_cast<Eigen::Index>(b) * in_shape.length + i);
      }
    }
  }
  Mat y = weight * cols;
  y.colwise() += bias.col(0);
  if (cache != nullptr) {
    cache->cols = std::move(cols);
    cache->in_shape = in_shape;
  }
  return y;
}

Mat Conv1d::backward(const Mat& dy, const Cache& cache, Conv1d& grad) const {
  grad.weight.noalias() += dy * cache.cols.transpose();
  grad.bias.col(0) += dy.rowwise().sum();
  Mat dcols = weight.transpose() * dy;
  if (is_pointwise(*this)) return dcols;
  const SeqShape in_shape = cache.in_shape;
  const int t_out = out_length(in_shape.length);
  Mat dx = Mat::Zero(in, in_shape.columns());
  for (int b = 0; b < in_shape.batch; ++b) {
    for (int o = 0; o < t_out; ++o) {
      const Eigen::Index col = static_cast<Eigen::Index>(b) * t_out + o;
      for (int k = 0; k < kernel; ++k) {
        const int i = o * stride - pad_left + k;
        if (i < 0 || i >= in_shape.length) continue;
        dx.col(static_cast<Eigen::Index>(b) * in_shape.length + i) +=
            dcols.col(col).segment(static_cast<Eigen::Index>(k) * in, in);
      }
    }
  }
  return dx;
}

void Conv1d::collect(std::vector<Mat*>& out_tensors) {
  out_tensors.push_back(&weight);
  out_tensors.push_back(&bias);
}

// ------------------------------------------------------- ConvTranspose1d

ConvTranspose1d ConvTranspose1d::make(int in, int out, int kernel, int stride, int pad,
                                      int out_pad) {
  ConvTranspose1d c;
  c.in = in;
  c.out = out;
  c.kernel = kernel;
  c.stride = stride;
  c.pad = pad;
  c.out_pad = out_pad;
  c.weight = Mat::Zero(static_cast<Eigen::Index>(kernel) * out, in);
  c.bias = Mat::Zero(out, 1);
  return c;
}

Mat ConvTranspose1d::forward(const Mat& x, SeqShape in_shape, Cache* cache) const {
  const int t_out = out_length(in_shape.length);
  const Mat cols = weight * x;
  Mat y = Mat::Zero(out, static_cast<Eigen::Index>(in_shape.batch) * t_out);
  for (int b = 0; b < in_shape.batch; ++b) {
    for (int i = 0; i < in_shape.length; ++i) {
      const Eigen::Index col = static_cast<Eigen::Index>(b) * in_shape.length + i;
      for (int k = 0; k < kernel; ++k) {
        const int o = i * stride - pad + k;
        if (o < 0 || o >= t_out) continue;
        y.col(static_cast<Eigen::Index>(b) * t_out + o) +=
            cols.col(col).segment(static_cast<Eigen::Index>(k) * out, out);
      }
    }
  }
  y.colwise() += bias.col(0);
  if (cache != nullptr) {
    cache->x = x;
    cache->in_shape = in_shape;
  }
  return y;
}

Mat ConvTranspose1d::backward(const Mat& dy, const Cache& cache, ConvTranspose1d& grad) const {
  const SeqShape in_shape = cache.in_shape;
  const int t_out = out_length(in_shape.length);
  Mat dcols = Mat::Zero(weight.rows(), in_shape.columns());
  for (int b = 0; b < in_shape.batch; ++b) {
    for (int i = 0; i < in_shape.length; ++i) {
      const Eigen::Index col = static_cast<Eigen::Index>(b) * in_shape.length + i;
      for (int k = 0; k < kernel; ++k) {
        const int o = i * stride - pad + k;
        if (o < 0 || o >= t_out) continue;
        dcols.col(col).segment(static_cast<Eigen::Index>(k) * out, out) =
            dy.col(static_cast<Eigen::Index>(b) * t_out + o);
      }
    }
  }
  grad.weight.noalias() += dcols * cache.x.transpose();
  grad.bias.col(0) += dy.rowwise().sum();
  return weight.transpose() * dcols;
}

void ConvTranspose1d::collect(std::vector<Mat*>& out_tensors) {
  out_tensors.push_back(&weight);
  out_tensors.push_back(&bias);
}

// -------------------------------------------------------------- GroupNorm

GroupNorm GroupNorm::make(int channels, int groups) {
  GroupNorm g;
  g.gamma = Mat::Ones(channels, 1);
  g.beta = Mat::Zero(channels, 1);
  g.groups = groups;
  return g;
}

Mat GroupNorm::forward(const Mat& x, SeqShape shape, Cache* cache) const {
  const Eigen::Index channels = x.rows();
  const Eigen::Index per_group = channels / groups;
  Mat xhat(x.rows(), x.cols());
  std::vector<double> inv_std(static_cast<std::size_t>(shape.batch * groups));
  for (int b = 0; b < shape.batch; ++b) {
    for (int g = 0; g < groups; ++g) {
      auto block = x.block(g * per_group, static_cast<Eigen::Index>(b) * shape.length, per_group,
                           shape.length);
      const double n = static_cast<double>(block.size());
      const double mean = block.sum() / n;
      const double var = (block.array() - mean).square().sum() / n;
      const double is = 1.0 / std::sqrt(var + kNormEps);
      inv_std[static_cast<std::size_t>(b * groups + g)] = is;
      xhat.block(g * per_group, static_cast<Eigen::Index>(b) * shape.length, per_group,
                 shape.length) = (block.array() - mean) * is;
    }
  }
  Mat y = (xhat.array().colwise() * gamma.col(0).array()).colwise() + beta.col(0).array();
  if (cache != nullptr) {
    cache->xhat = std::move(xhat);
    cache->inv_std = std::move(inv_std);
    cache->shape = shape;
  }
  return y;
}

Mat GroupNorm::backward(const Mat& dy, const Cache& cache, GroupNorm& grad) const {
  const SeqShape shape = cache.shape;
  grad.gamma.col(0) += (dy.array() * cache.xhat.array()).rowwise().sum().matrix();
  grad.beta.col(0) += dy.rowwise().sum();
  const Mat dxhat = dy.array().colwise() * gamma.col(0).array();
  const Eigen::Index per_group = dy.rows() / groups;
  Mat dx(dy.rows(), dy.cols());
  for (int b = 0; b < shape.batch; ++b) {
    for (int g = 0; g < groups; ++g) {
      const Eigen::Index r0 = g * per_group;
      const Eigen::Index c0 = static_cast<Eigen::Index>(b) * shape.length;
      auto d = dxhat.block(r0, c0, per_group, shape.length);
      auto xh = cache.xhat.block(r0, c0, per_group, shape.length);
      const double n = static_cast<double>(d.size());
      const double mean_d = d.sum() / n;
      const double mean_dx = (d.array() * xh.array()).sum() / n;
      const double is = cache.inv_std[static_cast<std::size_t>(b * groups + g)];
      dx.block(r0, c0, per_group, shape.length) =
          is * (d.array() - mean_d - xh.array() * mean_dx);
    }
  }
  return dx;
}

void GroupNorm::collect(std::vector<Mat*>& out) {
  out.push_back(&gamma);
  out.push_back(&beta);
}

// -------------------------------------------------------------- LayerNorm

LayerNorm LayerNorm::make(int channels) {
  LayerNorm l;
  l.gamma = Mat::Ones(channels, 1);
  l.beta = Mat::Zero(channels, 1);
  return l;
}

Mat LayerNorm::forward(const Mat& x, Cache* cache) const {
  const double n = static_cast<double>(x.rows());
  const Eigen::RowVectorXd mean = x.colwise().sum() / n;
  Mat centered = x.rowwise() - mean;
  const Eigen::RowVectorXd var = centered.array().square().colwise().sum() / n;
  const Eigen::RowVectorXd inv_std = (var.array() + kNormEps).rsqrt();
  Mat xhat = centered.array().rowwise() * inv_std.array();
  Mat y = (xhat.array().colwise() * gamma.col(0).array()).colwise() + beta.col(0).array();
  if (cache != nullptr) {
    cache->xhat = std::move(xhat);
    cache->inv_std = inv_std;
  }
  return y;
}

Mat LayerNorm::backward(const Mat& dy, const Cache& cache, LayerNorm& grad) const {
  grad.gamma.col(0) += (dy.array() * cache.xhat.array()).rowwise().sum().matrix();
  grad.beta.col(0) += dy.rowwise().sum();
  const Mat d = dy.array().colwise() * gamma.col(0).array();
  const double n = static_cast<double>(dy.rows());
  const Eigen::RowVectorXd mean_d = d.colwise().sum() / n;
  const Eigen::RowVectorXd mean_dx = (d.array() * cache.xhat.array()).colwise().sum() / n;
  Mat dx = (d.rowwise() - mean_d) - Mat(cache.xhat.array().rowwise() * mean_dx.array());
  return dx.array().rowwise() * cache.inv_std.array();
}

void LayerNorm::collect(std::vector<Mat*>& out) {
  out.push_back(&gamma);
  out.push_back(&beta);
}

// ------------------------------------------------------------- activation

Mat activate(Activation act, const Mat& x) {
  if (act == Activation::kIdentity) return x;
  return x.unaryExpr([](double v) { return 0.5 * v * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0)); });
}

Mat activate_backward(Activation act, const Mat& x, const Mat& dy) {
  if (act == Activation::kIdentity) return dy;
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  return x.binaryExpr(dy, [inv_sqrt_2pi](double v, double g) {
    const double cdf = 0.5 * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0));
    const double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
    return g * (cdf + v * pdf);
  });
}

// --------------------------------------------------------------- ResBlock

ResBlock ResBlock::make(int channels, int kernel, int expansion, int groups, bool use_norm,
                        Activation act) {
  ResBlock r;
  r.gn = GroupNorm::make(channels, groups);
  r.conv = Conv1d::make(channels, channels, kernel, 1, (kernel - 1) / 2, (kernel - 1) / 2);
  r.ln = LayerNorm::make(channels);
  r.fc1 = Conv1d::make(channels, channels * expansion, 1, 1, 0, 0);
  r.fc2 = Conv1d::make(channels * expansion, channels, 1, 1, 0, 0);
  r.use_norm = use_norm;
  r.act = act;
  return r;
}

Mat ResBlock::forward(const Mat& x, SeqShape shape, Cache* cache) const {
  Cache local;
  Cache& c = cache != nullptr ? *cache : local;
  const bool keep = cache != nullptr;
  Mat h = use_norm ? gn.forward(x, shape, keep ? &c.gn : nullptr) : x;
  if (keep) c.act1_in = h;
  h = activate(act, h);
  Mat a = x + conv.forward(h, shape, keep ? &c.conv : nullptr);
  Mat m = use_norm ? ln.forward(a, keep ? &c.ln : nullptr) : a;
  m = fc1.forward(m, shape, keep ? &c.fc1 : nullptr);
  if (keep) c.act2_in = m;
  m = activate(act, m);
  return a + fc2.forward(m, shape, keep ? &c.fc2 : nullptr);
}

Mat ResBlock::backward(const Mat& dy, const Cache& c, ResBlock& grad) const {
  // y = a + fc2(act(fc1(ln(a))))
  Mat dm = fc2.backward(dy, c.fc2, grad.fc2);
  dm = activate_backward(act, c.act2_in, dm);
  dm = fc1.backward(dm, c.fc1, grad.fc1);
  if (use_norm) dm = ln.backward(dm, c.ln, grad.ln);
  Mat da = dy + dm;
  // a = x + conv(act(gn(x)))
  Mat dh = conv.backward(da, c.conv, grad.conv);
  dh = activate_backward(act, c.act1_in, dh);
  if (use_norm) dh = gn.backward(dh, c.gn, grad.gn);
  return da + dh;
}

void ResBlock::collect(std::vector<Mat*>& out) {
  if (use_norm) gn.collect(out);
  conv.collect(out);
  if (use_norm) ln.collect(out);
  fc1.collect(out);
  fc2.collect(out);
}

}  // namespace ua::nn
