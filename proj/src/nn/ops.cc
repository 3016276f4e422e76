#include "roadnav/nn/ops.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

#include "roadnav/common/error.h"

namespace roadnav::nn {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

int out_extent(int in, int k, int stride, int pad) {
  if (stride < 1) throw InvalidShape("stride must be >= 1");
  const int span = in + 2 * pad - k;
  if (span < 0) throw InvalidShape("window larger than padded input");
  return span / stride + 1;
}

struct ConvGeom {
  int ci, h, w, kh, kw, stride, pad, ho, wo;
  int k() const { return ci * kh * kw; }
  int p() const { return ho * wo; }
  bool direct() const { return kh == 1 && kw == 1 && stride == 1 && pad == 0; }
};

ConvGeom conv_geom(const Tensor& in, const Tensor& weights, int stride, int padding) {
  if (weights.c() != in.c()) throw InvalidShape("conv2d: input channels do not match weights");
  ConvGeom g{in.c(), in.h(), in.w(), weights.h(), weights.w(), stride, padding, 0, 0};
  g.ho = out_extent(in.h(), g.kh, stride, padding);
  g.wo = out_extent(in.w(), g.kw, stride, padding);
  return g;
}

// cols is (ci*kh*kw) x (ho*wo).
void im2col(const double* x, const ConvGeom& g, double* cols) {
  for (int c = 0; c < g.ci; ++c) {
    for (int ky = 0; ky < g.kh; ++ky) {
      for (int kx = 0; kx < g.kw; ++kx) {
        double* row = cols + ((c * g.kh + ky) * g.kw + kx) * static_cast<std::size_t>(g.p());
        for (int oy = 0; oy < g.ho; ++oy) {
          const int iy = oy * g.stride - g.pad + ky;
          for (int ox = 0; ox < g.wo; ++ox) {
            const int ix = ox * g.stride - g.pad + kx;
            const bool inside = iy >= 0 && iy < g.h && ix >= 0 && ix < g.w;
            row[oy * g.wo + ox] = inside ? x[(c * g.h + iy) * g.w + ix] : 0.0;
          }
        }
      }
    }
  }
}

void col2im_add(const double* cols, const ConvGeom& g, double* dx) {
  for (int c = 0; c < g.ci; ++c) {
    for (int ky = 0; ky < g.kh; ++ky) {
      for (int kx = 0; kx < g.kw; ++kx) {
        const double* row = cols + ((c * g.kh + ky) * g.kw + kx) * static_cast<std::size_t>(g.p());
        for (int oy = 0; oy < g.ho; ++oy) {
          const int iy = oy * g.stride - g.pad + ky;
          if (iy < 0 || iy >= g.h) continue;
          for (int ox = 0; ox < g.wo; ++ox) {
            const int ix = ox * g.stride - g.pad + kx;
            if (ix >= 0 && ix < g.w) dx[(c * g.h + iy) * g.w + ix] += row[oy * g.wo + ox];
          }
        }
      }
    }
  }
}

void check_bias(const Tensor& bias, int co, const char* what) {
  if (bias.size() != static_cast<std::size_t>(co)) {
    throw InvalidShape(std::string(what) + ": bias length does not match output channels");
  }
}

template <bool kMax>
Tensor pool_forward(const Tensor& in, int kh, int kw, int stride, int pad) {
  if (kh < 1 || kw < 1) throw InvalidShape("pool: window must be positive");
  if (pad < 0 || pad >= kh || pad >= kw) throw InvalidShape("pool: padding must be below the window");
  const int ho = out_extent(in.h(), kh, stride, pad);
  const int wo = out_extent(in.w(), kw, stride, pad);
  Tensor out(in.n(), in.c(), ho, wo);
  for (int n = 0; n < in.n(); ++n) {
    for (int c = 0; c < in.c(); ++c) {
      for (int oy = 0; oy < ho; ++oy) {
        for (int ox = 0; ox < wo; ++ox) {
          double acc = kMax ? -std::numeric_limits<double>::infinity() : 0.0;
          int count = 0;
          for (int ky = 0; ky < kh; ++ky) {
            const int iy = oy * stride - pad + ky;
            if (iy < 0 || iy >= in.h()) continue;
            for (int kx = 0; kx < kw; ++kx) {
              const int ix = ox * stride - pad + kx;
              if (ix < 0 || ix >= in.w()) continue;
              const double v = in.at(n, c, iy, ix);
              if constexpr (kMax) {
                acc = std::max(acc, v);
              } else {
                acc += v;
              }
              ++count;
            }
          }
          out.at(n, c, oy, ox) = kMax ? acc : acc / count;
        }
      }
    }
  }
  return out;
}

template <bool kMax>
Tensor pool_backward(const Tensor& in, const Tensor& dy, int kh, int kw, int stride, int pad) {
  const int ho = out_extent(in.h(), kh, stride, pad);
  const int wo = out_extent(in.w(), kw, stride, pad);
  if (dy.n() != in.n() || dy.c() != in.c() || dy.h() != ho || dy.w() != wo) {
    throw InvalidShape("pool backward: gradient shape mismatch");
  }
  Tensor dx(in.shape);
  for (int n = 0; n < in.n(); ++n) {
    for (int c = 0; c < in.c(); ++c) {
      for (int oy = 0; oy < ho; ++oy) {
        for (int ox = 0; ox < wo; ++ox) {
          const int y0 = std::max(oy * stride - pad, 0);
          const int y1 = std::min(oy * stride - pad + kh, in.h());
          const int x0 = std::max(ox * stride - pad, 0);
          const int x1 = std::min(ox * stride - pad + kw, in.w());
          const double g = dy.at(n, c, oy, ox);
          if constexpr (kMax) {
            int by = y0, bx = x0;
            double best = in.at(n, c, y0, x0);
            for (int iy = y0; iy < y1; ++iy) {
              for (int ix = x0; ix < x1; ++ix) {
                if (in.at(n, c, iy, ix) > best) {
                  best = in.at(n, c, iy, ix);
                  by = iy;
                  bx = ix;
                }
              }
            }
            dx.at(n, c, by, bx) += g;
          } else {
            const double share = g / ((y1 - y0) * (x1 - x0));
            for (int iy = y0; iy < y1; ++iy) {
              for (int ix = x0; ix < x1; ++ix) dx.at(n, c, iy, ix) += share;
            }
          }
        }
      }
    }
  }
  return dx;
}

}  // namespace

Tensor conv2d(const Tensor& in, const Tensor& weights, const Tensor& bias, int stride,
              int padding) {
  const ConvGeom g = conv_geom(in, weights, stride, padding);
  const int co = weights.n();
  check_bias(bias, co, "conv2d");
  Tensor out(in.n(), co, g.ho, g.wo);
  CMapMat wm(weights.data.data(), co, g.k());
  Eigen::Map<const Eigen::VectorXd> bv(bias.data.data(), co);
  std::vector<double> cols(g.direct() ? 0 : static_cast<std::size_t>(g.k()) * g.p());
  for (int n = 0; n < in.n(); ++n) {
    const double* src = in.sample(n);
    if (!g.direct()) {
      im2col(src, g, cols.data());
      src = cols.data();
    }
    MapMat om(out.sample(n), co, g.p());
    om.noalias() = wm * CMapMat(src, g.k(), g.p());
    om.colwise() += bv;
  }
  return out;
}

void conv2d_backward(const Tensor& in, const Tensor& weights, const Tensor& dy, int stride,
                     int padding, Tensor* dx, Tensor& dw, Tensor& db) {
  const ConvGeom g = conv_geom(in, weights, stride, padding);
  const int co = weights.n();
  if (dy.n() != in.n() || dy.c() != co || dy.h() != g.ho || dy.w() != g.wo) {
    throw InvalidShape("conv2d backward: gradient shape mismatch");
  }
  if (dx != nullptr) *dx = Tensor(in.shape);
  CMapMat wm(weights.data.data(), co, g.k());
  MapMat dwm(dw.data.data(), co, g.k());
  Eigen::Map<Eigen::VectorXd> dbv(db.data.data(), co);
  std::vector<double> cols(g.direct() ? 0 : static_cast<std::size_t>(g.k()) * g.p());
  std::vector<double> dcols(static_cast<std::size_t>(g.k()) * g.p());
  for (int n = 0; n < in.n(); ++n) {
    const double* src = in.sample(n);
    if (!g.direct()) {
      im2col(src, g, cols.data());
      src = cols.data();
    }
    CMapMat dym(dy.sample(n), co, g.p());
    dwm.noalias() += dym * CMapMat(src, g.k(), g.p()).transpose();
    dbv += dym.rowwise().sum();
    if (dx == nullptr) continue;
    if (g.direct()) {
      MapMat(dx->sample(n), g.k(), g.p()).noalias() = wm.transpose() * dym;
    } else {
      MapMat(dcols.data(), g.k(), g.p()).noalias() = wm.transpose() * dym;
      col2im_add(dcols.data(), g, dx->sample(n));
    }
  }
}

Tensor maxpool2d(const Tensor& in, int kh, int kw, int stride, int padding) {
  return pool_forward<true>(in, kh, kw, stride, padding);
}

Tensor avgpool2d(const Tensor& in, int kh, int kw, int stride, int padding) {
  return pool_forward<false>(in, kh, kw, stride, padding);
}

Tensor maxpool2d_backward(const Tensor& in, const Tensor& dy, int kh, int kw, int stride,
                          int padding) {
  return pool_backward<true>(in, dy, kh, kw, stride, padding);
}

Tensor avgpool2d_backward(const Tensor& in, const Tensor& dy, int kh, int kw, int stride,
                          int padding) {
  return pool_backward<false>(in, dy, kh, kw, stride, padding);
}

Tensor apply_activation(const Tensor& in, Activation kind) {
  Tensor out(in.shape);
  switch (kind) {
    case Activation::kRelu:
      for (std::size_t i = 0; i < in.size(); ++i) out.data[i] = std::max(in.data[i], 0.0);
      break;
    case Activation::kSigmoid:
      for (std::size_t i = 0; i < in.size(); ++i) {
        // Split by sign so exp never overflows.
        const double x = in.data[i];
        if (x >= 0) {
          out.data[i] = 1.0 / (1.0 + std::exp(-x));
        } else {
          const double e = std::exp(x);
          out.data[i] = e / (1.0 + e);
        }
      }
      break;
    case Activation::kSoftmax: {
      const std::size_t plane = static_cast<std::size_t>(in.h()) * in.w();
      for (int n = 0; n < in.n(); ++n) {
        for (std::size_t p = 0; p < plane; ++p) {
          const double* x = in.sample(n) + p;
          double* y = out.sample(n) + p;
          double mx = -std::numeric_limits<double>::infinity();
          for (int c = 0; c < in.c(); ++c) mx = std::max(mx, x[c * plane]);
          double sum = 0.0;
          for (int c = 0; c < in.c(); ++c) sum += (y[c * plane] = std::exp(x[c * plane] - mx));
          for (int c = 0; c < in.c(); ++c) y[c * plane] /= sum;
        }
      }
      break;
    }
  }
  return out;
}

Tensor activation_backward(const Tensor& y, const Tensor& dy, Activation kind) {
  if (y.shape != dy.shape) throw InvalidShape("activation backward: shape mismatch");
  Tensor dx(y.shape);
  switch (kind) {
    case Activation::kRelu:
      for (std::size_t i = 0; i < y.size(); ++i) dx.data[i] = y.data[i] > 0 ? dy.data[i] : 0.0;
      break;
    case Activation::kSigmoid:
      for (std::size_t i = 0; i < y.size(); ++i) {
        dx.data[i] = dy.data[i] * y.data[i] * (1.0 - y.data[i]);
      }
      break;
    case Activation::kSoftmax: {
      const std::size_t plane = static_cast<std::size_t>(y.h()) * y.w();
      for (int n = 0; n < y.n(); ++n) {
        for (std::size_t p = 0; p < plane; ++p) {
          const double* yy = y.sample(n) + p;
          const double* g = dy.sample(n) + p;
          double dot = 0.0;
          for (int c = 0; c < y.c(); ++c) dot += yy[c * plane] * g[c * plane];
          double* d = dx.sample(n) + p;
          for (int c = 0; c < y.c(); ++c) d[c * plane] = yy[c * plane] * (g[c * plane] - dot);
        }
      }
      break;
    }
  }
  return dx;
}

Tensor concat_channels(const std::vector<Tensor>& inputs) {
  if (inputs.empty()) throw InvalidShape("concat: no inputs");
  const Tensor& first = inputs.front();
  int channels = 0;
  for (const Tensor& t : inputs) {
    if (t.n() != first.n() || t.h() != first.h() || t.w() != first.w()) {
      throw InvalidShape("concat: N/H/W mismatch");
    }
    channels += t.c();
  }
  Tensor out(first.n(), channels, first.h(), first.w());
  for (int n = 0; n < first.n(); ++n) {
    double* dst = out.sample(n);
    for (const Tensor& t : inputs) dst = std::copy(t.sample(n), t.sample(n) + t.sample_size(), dst);
  }
  return out;
}

std::vector<Tensor> split_channels(const Tensor& t, const std::vector<int>& channels) {
  int total = 0;
  for (int c : channels) total += c;
  if (total != t.c()) throw InvalidShape("split: channel counts do not add up");
  std::vector<Tensor> parts;
  for (int c : channels) parts.emplace_back(t.n(), c, t.h(), t.w());
  for (int n = 0; n < t.n(); ++n) {
    const double* src = t.sample(n);
    for (Tensor& p : parts) {
      std::copy(src, src + p.sample_size(), p.sample(n));
      src += p.sample_size();
    }
  }
  return parts;
}

Tensor dense(const Tensor& in, const Tensor& weights, const Tensor& bias) {
  const int features = static_cast<int>(in.sample_size());
  if (static_cast<int>(weights.sample_size()) != features) {
    throw InvalidShape("dense: input features do not match weights");
  }
  const int out_f = weights.n();
  check_bias(bias, out_f, "dense");
  Tensor out(in.n(), out_f, 1, 1);
  CMapMat x(in.data.data(), in.n(), features);
  CMapMat w(weights.data.data(), out_f, features);
  MapMat y(out.data.data(), in.n(), out_f);
  y.noalias() = x * w.transpose();
  y.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias.data.data(), out_f);
  return out;
}

void dense_backward(const Tensor& in, const Tensor& weights, const Tensor& dy, Tensor* dx,
                    Tensor& dw, Tensor& db) {
  const int features = static_cast<int>(in.sample_size());
  const int out_f = weights.n();
  if (dy.n() != in.n() || static_cast<int>(dy.sample_size()) != out_f) {
    throw InvalidShape("dense backward: gradient shape mismatch");
  }
  CMapMat x(in.data.data(), in.n(), features);
  CMapMat w(weights.data.data(), out_f, features);
  CMapMat g(dy.data.data(), in.n(), out_f);
  MapMat(dw.data.data(), out_f, features).noalias() += g.transpose() * x;
  Eigen::Map<Eigen::RowVectorXd>(db.data.data(), out_f) += g.colwise().sum();
  if (dx != nullptr) {
    *dx = Tensor(in.shape);
    MapMat(dx->data.data(), in.n(), features).noalias() = g * w;
  }
}

namespace {

void check_bn(const Tensor& in, const BatchNormParams& p) {
  if (p.gamma.size() != static_cast<std::size_t>(in.c()) ||
      p.beta.size() != static_cast<std::size_t>(in.c())) {
    throw InvalidShape("batchnorm: parameter length does not match channels");
  }
}

Tensor bn_apply(const Tensor& in, const BatchNormParams& p, const Tensor& mean, const Tensor& var) {
  Tensor out(in.shape);
  const std::size_t plane = static_cast<std::size_t>(in.h()) * in.w();
  for (int n = 0; n < in.n(); ++n) {
    for (int c = 0; c < in.c(); ++c) {
      const double scale = p.gamma.data[c] / std::sqrt(var.data[c] + p.eps);
      const double shift = p.beta.data[c] - mean.data[c] * scale;
      const double* x = in.sample(n) + c * plane;
      double* y = out.sample(n) + c * plane;
      for (std::size_t i = 0; i < plane; ++i) y[i] = x[i] * scale + shift;
    }
  }
  return out;
}

}  // namespace

Tensor batchnorm_infer(const Tensor& in, const BatchNormParams& p, const Tensor& running_mean,
                       const Tensor& running_var) {
  check_bn(in, p);
  return bn_apply(in, p, running_mean, running_var);
}

Tensor batchnorm_train(const Tensor& in, const BatchNormParams& p, Tensor& batch_mean,
                       Tensor& batch_var) {
  check_bn(in, p);
  const std::size_t plane = static_cast<std::size_t>(in.h()) * in.w();
  const double count = static_cast<double>(in.n()) * plane;
  batch_mean = Tensor(1, in.c(), 1, 1);
  batch_var = Tensor(1, in.c(), 1, 1);
  for (int c = 0; c < in.c(); ++c) {
    double s = 0.0;
    for (int n = 0; n < in.n(); ++n) {
      const double* x = in.sample(n) + c * plane;
      for (std::size_t i = 0; i < plane; ++i) s += x[i];
    }
    const double mean = s / count;
    double ss = 0.0;
    for (int n = 0; n < in.n(); ++n) {
      const double* x = in.sample(n) + c * plane;
      for (std::size_t i = 0; i < plane; ++i) ss += (x[i] - mean) * (x[i] - mean);
    }
    batch_mean.data[c] = mean;
    batch_var.data[c] = ss / count;
  }
  return bn_apply(in, p, batch_mean, batch_var);
}

void batchnorm_backward(const Tensor& in, const BatchNormParams& p, const Tensor& batch_mean,
                        const Tensor& batch_var, const Tensor& dy, Tensor& dx, Tensor& dgamma,
                        Tensor& dbeta) {
  const std::size_t plane = static_cast<std::size_t>(in.h()) * in.w();
  const double count = static_cast<double>(in.n()) * plane;
  dx = Tensor(in.shape);
  for (int c = 0; c < in.c(); ++c) {
    const double inv_std = 1.0 / std::sqrt(batch_var.data[c] + p.eps);
    double sum_g = 0.0, sum_gx = 0.0;
    for (int n = 0; n < in.n(); ++n) {
      const double* x = in.sample(n) + c * plane;
      const double* g = dy.sample(n) + c * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        sum_g += g[i];
        sum_gx += g[i] * (x[i] - batch_mean.data[c]) * inv_std;
      }
    }
    dgamma.data[c] += sum_gx;
    dbeta.data[c] += sum_g;
    const double k = p.gamma.data[c] * inv_std / count;
    for (int n = 0; n < in.n(); ++n) {
      const double* x = in.sample(n) + c * plane;
      const double* g = dy.sample(n) + c * plane;
      double* d = dx.sample(n) + c * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        const double xhat = (x[i] - batch_mean.data[c]) * inv_std;
        d[i] = k * (count * g[i] - sum_g - xhat * sum_gx);
      }
    }
  }
}

double bce_loss(const Tensor& pred, const Tensor& target) {
  if (pred.shape != target.shape) throw InvalidShape("loss: prediction/target shape mismatch");
  if (pred.size() == 0) throw InvalidShape("loss: empty batch");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = std::clamp(pred.data[i], kProbClamp, 1.0 - kProbClamp);
    const double t = target.data[i];
    acc -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
  }
  return acc / static_cast<double>(pred.size());
}

Tensor bce_sigmoid_grad(const Tensor& pred, const Tensor& target, std::size_t total) {
  if (pred.shape != target.shape) throw InvalidShape("loss: prediction/target shape mismatch");
  const double denom = static_cast<double>(total == 0 ? pred.size() : total);
  Tensor g(pred.shape);
  for (std::size_t i = 0; i < pred.size(); ++i) g.data[i] = (pred.data[i] - target.data[i]) / denom;
  return g;
}

}  // namespace roadnav::nn
