#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ftsweep/errors.hpp"
#include "ftsweep/rng.hpp"

namespace ftsweep::nn {

/// Dense NHWC tensor.
template <class T>
struct Tensor4 {
  std::size_t n = 0, h = 0, w = 0, c = 0;
  std::vector<T> data;

  Tensor4() = default;
  Tensor4(std::size_t n_, std::size_t h_, std::size_t w_, std::size_t c_)
      : n(n_), h(h_), w(w_), c(c_), data(n_ * h_ * w_ * c_, T(0)) {}

  std::size_t size() const { return data.size(); }

  T& at(std::size_t b, std::size_t y, std::size_t x, std::size_t ch) {
    return data[((b * h + y) * w + x) * c + ch];
  }
  T at(std::size_t b, std::size_t y, std::size_t x, std::size_t ch) const {
    return data[((b * h + y) * w + x) * c + ch];
  }
};

/// One layer of the sequential engine. A layer owns its parameter tensors;
/// the first `optimizable_tensors()` of them are weights the optimizer may
/// update, the rest are buffers (e.g. batch-norm moving statistics).
template <class T>
class Layer {
 public:
  explicit Layer(std::string name) : name_(std::move(name)) {}
  virtual ~Layer() = default;

  virtual std::string_view kind() const = 0;
  const std::string& name() const { return name_; }

  bool trainable() const { return trainable_; }
  virtual void set_trainable(bool t) { trainable_ = t; }

  std::size_t tensor_count() const { return params_.size(); }
  virtual std::size_t optimizable_tensors() const { return params_.size(); }
  std::vector<T>& weight(std::size_t i) { return params_[i]; }
  const std::vector<T>& weight(std::size_t i) const { return params_[i]; }
  std::vector<T>& grad(std::size_t i) { return grads_[i]; }

  std::size_t param_count() const {
    std::size_t total = 0;
    for (const auto& p : params_) total += p.size();
    return total;
  }
  std::size_t trainable_param_count() const {
    std::size_t total = 0;
    for (std::size_t i = 0; i < optimizable_tensors(); ++i) total += params_[i].size();
    return total;
  }

  void zero_grads() {
    for (auto& g : grads_) std::fill(g.begin(), g.end(), T(0));
  }

  virtual Tensor4<T> forward(const Tensor4<T>& x, bool training) = 0;
  virtual Tensor4<T> backward(const Tensor4<T>& dy) = 0;

 protected:
  void add_tensor(std::size_t size) {
    params_.emplace_back(size, T(0));
    grads_.emplace_back(size, T(0));
  }

  std::string name_;
  bool trainable_ = true;
  std::vector<std::vector<T>> params_;
  std::vector<std::vector<T>> grads_;
};

enum class Padding { kSame, kValid };

namespace detail {
inline std::size_t conv_out_dim(std::size_t in, std::size_t k, std::size_t stride, Padding pad) {
  if (pad == Padding::kSame) return (in + stride - 1) / stride;
  return (in - k) / stride + 1;
}
inline std::size_t pad_begin(std::size_t in, std::size_t out, std::size_t k, std::size_t stride) {
  const std::ptrdiff_t total = static_cast<std::ptrdiff_t>((out - 1) * stride + k) -
                               static_cast<std::ptrdiff_t>(in);
  return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, total) / 2);
}
}  // namespace detail

/// 2-D convolution, HWIO weight layout, optional bias.
template <class T>
class Conv2D : public Layer<T> {
 public:
  Conv2D(std::string name, std::size_t in_c, std::size_t out_c, std::size_t k,
         std::size_t stride = 1, Padding pad = Padding::kSame, bool bias = true)
      : Layer<T>(std::move(name)), in_c_(in_c), out_c_(out_c), k_(k), stride_(stride), pad_(pad),
        bias_(bias) {
    this->add_tensor(k * k * in_c * out_c);
    if (bias) this->add_tensor(out_c);
  }

  std::string_view kind() const override { return "conv2d"; }

  void init(Rng& rng) {
    const double fan_in = static_cast<double>(k_ * k_ * in_c_);
    const double stddev = std::sqrt(2.0 / fan_in);  // He init
    for (auto& v : this->weight(0)) v = static_cast<T>(stddev * rng.normal());
    if (bias_) std::fill(this->weight(1).begin(), this->weight(1).end(), T(0));
  }

  Tensor4<T> forward(const Tensor4<T>& x, bool) override {
    x_ = x;
    const std::size_t oh = detail::conv_out_dim(x.h, k_, stride_, pad_);
    const std::size_t ow = detail::conv_out_dim(x.w, k_, stride_, pad_);
    pb_y_ = pad_ == Padding::kSame ? detail::pad_begin(x.h, oh, k_, stride_) : 0;
    pb_x_ = pad_ == Padding::kSame ? detail::pad_begin(x.w, ow, k_, stride_) : 0;

    Tensor4<T> y(x.n, oh, ow, out_c_);
    const auto& w = this->weight(0);
    for (std::size_t b = 0; b < x.n; ++b) {
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
          for (std::size_t ky = 0; ky < k_; ++ky) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride_ + ky) -
                                      static_cast<std::ptrdiff_t>(pb_y_);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(x.h)) continue;
            for (std::size_t kx = 0; kx < k_; ++kx) {
              const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride_ + kx) -
                                        static_cast<std::ptrdiff_t>(pb_x_);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(x.w)) continue;
              const T* xp = &x.data[((b * x.h + static_cast<std::size_t>(iy)) * x.w +
                                     static_cast<std::size_t>(ix)) * x.c];
              const T* wp = &w[(ky * k_ + kx) * in_c_ * out_c_];
              T* yp = &y.data[((b * oh + oy) * ow + ox) * out_c_];
              for (std::size_t ic = 0; ic < in_c_; ++ic) {
                const T xv = xp[ic];
                const T* wrow = wp + ic * out_c_;
                for (std::size_t oc = 0; oc < out_c_; ++oc) yp[oc] += xv * wrow[oc];
              }
            }
          }
          if (bias_) {
            T* yp = &y.data[((b * oh + oy) * ow + ox) * out_c_];
            const auto& bv = this->weight(1);
            for (std::size_t oc = 0; oc < out_c_; ++oc) yp[oc] += bv[oc];
          }
        }
      }
    }
    return y;
  }

  Tensor4<T> backward(const Tensor4<T>& dy) override {
    Tensor4<T> dx(x_.n, x_.h, x_.w, x_.c);
    auto& dw = this->grad(0);
    const auto& w = this->weight(0);
    for (std::size_t b = 0; b < x_.n; ++b) {
      for (std::size_t oy = 0; oy < dy.h; ++oy) {
        for (std::size_t ox = 0; ox < dy.w; ++ox) {
          const T* dyp = &dy.data[((b * dy.h + oy) * dy.w + ox) * out_c_];
          if (bias_) {
            auto& db = this->grad(1);
            for (std::size_t oc = 0; oc < out_c_; ++oc) db[oc] += dyp[oc];
          }
          for (std::size_t ky = 0; ky < k_; ++ky) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride_ + ky) -
                                      static_cast<std::ptrdiff_t>(pb_y_);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(x_.h)) continue;
            for (std::size_t kx = 0; kx < k_; ++kx) {
              const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride_ + kx) -
                                        static_cast<std::ptrdiff_t>(pb_x_);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(x_.w)) continue;
              const std::size_t xoff = ((b * x_.h + static_cast<std::size_t>(iy)) * x_.w +
                                        static_cast<std::size_t>(ix)) * x_.c;
              const std::size_t woff = (ky * k_ + kx) * in_c_ * out_c_;
              for (std::size_t ic = 0; ic < in_c_; ++ic) {
                const T xv = x_.data[xoff + ic];
                T acc = T(0);
                const T* wrow = &w[woff + ic * out_c_];
                T* dwrow = &dw[woff + ic * out_c_];
                for (std::size_t oc = 0; oc < out_c_; ++oc) {
                  dwrow[oc] += xv * dyp[oc];
                  acc += wrow[oc] * dyp[oc];
                }
                dx.data[xoff + ic] += acc;
              }
            }
          }
        }
      }
    }
    return dx;
  }

 private:
  std::size_t in_c_, out_c_, k_, stride_;
  Padding pad_;
  bool bias_;
  std::size_t pb_y_ = 0, pb_x_ = 0;
  Tensor4<T> x_;
};

template <class T>
class ReLU : public Layer<T> {
 public:
  explicit ReLU(std::string name) : Layer<T>(std::move(name)) {}
  std::string_view kind() const override { return "relu"; }

  Tensor4<T> forward(const Tensor4<T>& x, bool) override {
    x_ = x;
    Tensor4<T> y = x;
    for (auto& v : y.data) v = std::max(v, T(0));
    return y;
  }
  Tensor4<T> backward(const Tensor4<T>& dy) override {
    Tensor4<T> dx = dy;
    for (std::size_t i = 0; i < dx.data.size(); ++i) {
      if (x_.data[i] <= T(0)) dx.data[i] = T(0);
    }
    return dx;
  }

 private:
  Tensor4<T> x_;
};

template <class T>
class MaxPool2D : public Layer<T> {
 public:
  explicit MaxPool2D(std::string name, std::size_t k = 2, std::size_t stride = 2)
      : Layer<T>(std::move(name)), k_(k), stride_(stride) {}
  std::string_view kind() const override { return "max_pool"; }

  Tensor4<T> forward(const Tensor4<T>& x, bool) override {
    in_n_ = x.n; in_h_ = x.h; in_w_ = x.w; in_c_ = x.c;
    const std::size_t oh = (x.h - k_) / stride_ + 1;
    const std::size_t ow = (x.w - k_) / stride_ + 1;
    Tensor4<T> y(x.n, oh, ow, x.c);
    argmax_.assign(y.size(), 0);
    for (std::size_t b = 0; b < x.n; ++b) {
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
          for (std::size_t ch = 0; ch < x.c; ++ch) {
            T best = -std::numeric_limits<T>::infinity();
            std::size_t best_idx = 0;
            for (std::size_t ky = 0; ky < k_; ++ky) {
              for (std::size_t kx = 0; kx < k_; ++kx) {
                const std::size_t iy = oy * stride_ + ky;
                const std::size_t ix = ox * stride_ + kx;
                const std::size_t idx = ((b * x.h + iy) * x.w + ix) * x.c + ch;
                if (x.data[idx] > best) {
                  best = x.data[idx];
                  best_idx = idx;
                }
              }
            }
            const std::size_t oidx = ((b * oh + oy) * ow + ox) * x.c + ch;
            y.data[oidx] = best;
            argmax_[oidx] = best_idx;
          }
        }
      }
    }
    return y;
  }

  Tensor4<T> backward(const Tensor4<T>& dy) override {
    Tensor4<T> dx(in_n_, in_h_, in_w_, in_c_);
    for (std::size_t i = 0; i < dy.data.size(); ++i) dx.data[argmax_[i]] += dy.data[i];
    return dx;
  }

 private:
  std::size_t k_, stride_;
  std::size_t in_n_ = 0, in_h_ = 0, in_w_ = 0, in_c_ = 0;
  std::vector<std::size_t> argmax_;
};

/// Batch normalization with Keras-style accounting: tensors are
/// [gamma, beta, moving_mean, moving_var]; only gamma/beta are optimizable.
/// A frozen instance runs in inference mode: moving statistics are neither
/// used for batch estimation nor updated.
template <class T>
class BatchNorm : public Layer<T> {
 public:
  BatchNorm(std::string name, std::size_t channels, double momentum = 0.99,
            double epsilon = 1e-3)
      : Layer<T>(std::move(name)), c_(channels), momentum_(momentum), eps_(epsilon) {
    this->add_tensor(channels);  // gamma
    this->add_tensor(channels);  // beta
    this->add_tensor(channels);  // moving mean
    this->add_tensor(channels);  // moving variance
    std::fill(this->weight(0).begin(), this->weight(0).end(), T(1));
    std::fill(this->weight(3).begin(), this->weight(3).end(), T(1));
  }

  std::string_view kind() const override { return "batch_norm"; }
  std::size_t optimizable_tensors() const override { return 2; }

  Tensor4<T> forward(const Tensor4<T>& x, bool training) override {
    x_ = x;
    const std::size_t m = x.n * x.h * x.w;
    Tensor4<T> y(x.n, x.h, x.w, x.c);
    batch_mode_ = training && this->trainable();

    const auto& gamma = this->weight(0);
    const auto& beta = this->weight(1);
    auto& mm = this->weight(2);
    auto& mv = this->weight(3);

    mu_.assign(c_, T(0));
    var_.assign(c_, T(0));
    inv_std_.assign(c_, T(0));

    if (batch_mode_) {
      for (std::size_t i = 0; i < x.data.size(); ++i) mu_[i % c_] += x.data[i];
      for (auto& v : mu_) v /= static_cast<T>(m);
      for (std::size_t i = 0; i < x.data.size(); ++i) {
        const T d = x.data[i] - mu_[i % c_];
        var_[i % c_] += d * d;
      }
      for (auto& v : var_) v /= static_cast<T>(m);
      for (std::size_t ch = 0; ch < c_; ++ch) {
        inv_std_[ch] = T(1) / std::sqrt(var_[ch] + static_cast<T>(eps_));
        mm[ch] = static_cast<T>(momentum_) * mm[ch] + static_cast<T>(1.0 - momentum_) * mu_[ch];
        mv[ch] = static_cast<T>(momentum_) * mv[ch] + static_cast<T>(1.0 - momentum_) * var_[ch];
      }
    } else {
      for (std::size_t ch = 0; ch < c_; ++ch) {
        mu_[ch] = mm[ch];
        var_[ch] = mv[ch];
        inv_std_[ch] = T(1) / std::sqrt(var_[ch] + static_cast<T>(eps_));
      }
    }

    xhat_.assign(x.data.size(), T(0));
    for (std::size_t i = 0; i < x.data.size(); ++i) {
      const std::size_t ch = i % c_;
      xhat_[i] = (x.data[i] - mu_[ch]) * inv_std_[ch];
      y.data[i] = gamma[ch] * xhat_[i] + beta[ch];
    }
    return y;
  }

  Tensor4<T> backward(const Tensor4<T>& dy) override {
    const std::size_t m = x_.n * x_.h * x_.w;
    const auto& gamma = this->weight(0);
    auto& dgamma = this->grad(0);
    auto& dbeta = this->grad(1);
    Tensor4<T> dx(x_.n, x_.h, x_.w, x_.c);

    for (std::size_t i = 0; i < dy.data.size(); ++i) {
      const std::size_t ch = i % c_;
      dgamma[ch] += dy.data[i] * xhat_[i];
      dbeta[ch] += dy.data[i];
    }

    if (!batch_mode_) {
      for (std::size_t i = 0; i < dy.data.size(); ++i) {
        const std::size_t ch = i % c_;
        dx.data[i] = dy.data[i] * gamma[ch] * inv_std_[ch];
      }
      return dx;
    }

    // batch statistics participate in the gradient
    std::vector<T> sum_dy(c_, T(0)), sum_dy_xhat(c_, T(0));
    for (std::size_t i = 0; i < dy.data.size(); ++i) {
      const std::size_t ch = i % c_;
      sum_dy[ch] += dy.data[i];
      sum_dy_xhat[ch] += dy.data[i] * xhat_[i];
    }
    const T mf = static_cast<T>(m);
    for (std::size_t i = 0; i < dy.data.size(); ++i) {
      const std::size_t ch = i % c_;
      dx.data[i] = gamma[ch] * inv_std_[ch] / mf *
                   (mf * dy.data[i] - sum_dy[ch] - xhat_[i] * sum_dy_xhat[ch]);
    }
    return dx;
  }

 private:
  std::size_t c_;
  double momentum_, eps_;
  bool batch_mode_ = false;
  Tensor4<T> x_;
  std::vector<T> mu_, var_, inv_std_, xhat_;
};

template <class T>
class GlobalAvgPool : public Layer<T> {
 public:
  explicit GlobalAvgPool(std::string name) : Layer<T>(std::move(name)) {}
  std::string_view kind() const override { return "global_avg_pool"; }

  Tensor4<T> forward(const Tensor4<T>& x, bool) override {
    in_h_ = x.h; in_w_ = x.w;
    Tensor4<T> y(x.n, 1, 1, x.c);
    const T scale = T(1) / static_cast<T>(x.h * x.w);
    for (std::size_t b = 0; b < x.n; ++b) {
      for (std::size_t yy = 0; yy < x.h; ++yy) {
        for (std::size_t xx = 0; xx < x.w; ++xx) {
          for (std::size_t ch = 0; ch < x.c; ++ch) {
            y.data[b * x.c + ch] += x.at(b, yy, xx, ch) * scale;
          }
        }
      }
    }
    return y;
  }

  Tensor4<T> backward(const Tensor4<T>& dy) override {
    Tensor4<T> dx(dy.n, in_h_, in_w_, dy.c);
    const T scale = T(1) / static_cast<T>(in_h_ * in_w_);
    for (std::size_t b = 0; b < dy.n; ++b) {
      for (std::size_t yy = 0; yy < in_h_; ++yy) {
        for (std::size_t xx = 0; xx < in_w_; ++xx) {
          for (std::size_t ch = 0; ch < dy.c; ++ch) {
            dx.at(b, yy, xx, ch) = dy.data[b * dy.c + ch] * scale;
          }
        }
      }
    }
    return dx;
  }

 private:
  std::size_t in_h_ = 0, in_w_ = 0;
};

/// Fully connected layer on (n,1,1,in) activations.
template <class T>
class Dense : public Layer<T> {
 public:
  Dense(std::string name, std::size_t in_dim, std::size_t out_dim)
      : Layer<T>(std::move(name)), in_(in_dim), out_(out_dim) {
    this->add_tensor(in_dim * out_dim);
    this->add_tensor(out_dim);
  }

  std::string_view kind() const override { return "dense"; }
  std::size_t in_dim() const { return in_; }
  std::size_t out_dim() const { return out_; }

  void init(Rng& rng) {
    const double stddev = std::sqrt(2.0 / static_cast<double>(in_));
    for (auto& v : this->weight(0)) v = static_cast<T>(stddev * rng.normal());
    std::fill(this->weight(1).begin(), this->weight(1).end(), T(0));
  }

  Tensor4<T> forward(const Tensor4<T>& x, bool) override {
    if (x.h != 1 || x.w != 1 || x.c != in_) {
      throw ShapeMismatchError("dense layer " + this->name() + " expects (n,1,1," +
                               std::to_string(in_) + ") input");
    }
    x_ = x;
    Tensor4<T> y(x.n, 1, 1, out_);
    const auto& w = this->weight(0);
    const auto& b = this->weight(1);
    for (std::size_t i = 0; i < x.n; ++i) {
      for (std::size_t o = 0; o < out_; ++o) {
        T acc = b[o];
        for (std::size_t j = 0; j < in_; ++j) acc += x.data[i * in_ + j] * w[j * out_ + o];
        y.data[i * out_ + o] = acc;
      }
    }
    return y;
  }

  Tensor4<T> backward(const Tensor4<T>& dy) override {
    Tensor4<T> dx(x_.n, 1, 1, in_);
    auto& dw = this->grad(0);
    auto& db = this->grad(1);
    const auto& w = this->weight(0);
    for (std::size_t i = 0; i < x_.n; ++i) {
      for (std::size_t o = 0; o < out_; ++o) {
        const T g = dy.data[i * out_ + o];
        db[o] += g;
        for (std::size_t j = 0; j < in_; ++j) {
          dw[j * out_ + o] += x_.data[i * in_ + j] * g;
          dx.data[i * in_ + j] += w[j * out_ + o] * g;
        }
      }
    }
    return dx;
  }

 private:
  std::size_t in_, out_;
  Tensor4<T> x_;
};

/// A plain layer stack.
template <class T>
class Network {
 public:
  void add(std::unique_ptr<Layer<T>> layer) { layers_.push_back(std::move(layer)); }

  std::size_t size() const { return layers_.size(); }
  Layer<T>& layer(std::size_t i) { return *layers_[i]; }
  const Layer<T>& layer(std::size_t i) const { return *layers_[i]; }

  Tensor4<T> forward(const Tensor4<T>& x, bool training) {
    Tensor4<T> cur = x;
    for (auto& l : layers_) cur = l->forward(cur, training);
    return cur;
  }

  /// Backpropagate from the gradient at the network output.
  void backward(const Tensor4<T>& d_out) {
    Tensor4<T> cur = d_out;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) cur = (*it)->backward(cur);
  }

  void zero_grads() {
    for (auto& l : layers_) l->zero_grads();
  }

 private:
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

/// Adam with Keras defaults. State is kept per (layer, tensor) slot and
/// allocated on first use, so freezing or unfreezing layers mid-run is safe.
template <class T>
class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-7)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(Network<T>& net) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t li = 0; li < net.size(); ++li) {
      auto& layer = net.layer(li);
      if (!layer.trainable()) continue;
      for (std::size_t ti = 0; ti < layer.optimizable_tensors(); ++ti) {
        auto& w = layer.weight(ti);
        auto& g = layer.grad(ti);
        auto& m = slot(moment1_, li, ti, w.size());
        auto& v = slot(moment2_, li, ti, w.size());
        for (std::size_t i = 0; i < w.size(); ++i) {
          const double gi = static_cast<double>(g[i]);
          m[i] = beta1_ * m[i] + (1.0 - beta1_) * gi;
          v[i] = beta2_ * v[i] + (1.0 - beta2_) * gi * gi;
          const double mhat = m[i] / bc1;
          const double vhat = v[i] / bc2;
          w[i] -= static_cast<T>(lr_ * mhat / (std::sqrt(vhat) + eps_));
        }
      }
    }
  }

 private:
  std::vector<double>& slot(std::vector<std::vector<std::vector<double>>>& bank, std::size_t li,
                            std::size_t ti, std::size_t size) {
    if (bank.size() <= li) bank.resize(li + 1);
    if (bank[li].size() <= ti) bank[li].resize(ti + 1);
    if (bank[li][ti].size() != size) bank[li][ti].assign(size, 0.0);
    return bank[li][ti];
  }

  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<std::vector<std::vector<double>>> moment1_, moment2_;
};

/// Plain SGD, optional momentum.
template <class T>
class Sgd {
 public:
  explicit Sgd(double lr, double momentum = 0.0) : lr_(lr), momentum_(momentum) {}

  void step(Network<T>& net) {
    for (std::size_t li = 0; li < net.size(); ++li) {
      auto& layer = net.layer(li);
      if (!layer.trainable()) continue;
      for (std::size_t ti = 0; ti < layer.optimizable_tensors(); ++ti) {
        auto& w = layer.weight(ti);
        auto& g = layer.grad(ti);
        if (momentum_ == 0.0) {
          for (std::size_t i = 0; i < w.size(); ++i) w[i] -= static_cast<T>(lr_ * g[i]);
        } else {
          auto& v = slot(velocity_, li, ti, w.size());
          for (std::size_t i = 0; i < w.size(); ++i) {
            v[i] = momentum_ * v[i] + static_cast<double>(g[i]);
            w[i] -= static_cast<T>(lr_ * v[i]);
          }
        }
      }
    }
  }

 private:
  std::vector<double>& slot(std::vector<std::vector<std::vector<double>>>& bank, std::size_t li,
                            std::size_t ti, std::size_t size) {
    if (bank.size() <= li) bank.resize(li + 1);
    if (bank[li].size() <= ti) bank[li].resize(ti + 1);
    if (bank[li][ti].size() != size) bank[li][ti].assign(size, 0.0);
    return bank[li][ti];
  }

  double lr_, momentum_;
  std::vector<std::vector<std::vector<double>>> velocity_;
};

/// Row-wise softmax of (n,1,1,c) logits.
template <class T>
inline Tensor4<T> softmax(const Tensor4<T>& logits) {
  Tensor4<T> probs(logits.n, 1, 1, logits.c);
  for (std::size_t i = 0; i < logits.n; ++i) {
    const T* row = &logits.data[i * logits.c];
    T maxv = row[0];
    for (std::size_t j = 1; j < logits.c; ++j) maxv = std::max(maxv, row[j]);
    T denom = T(0);
    for (std::size_t j = 0; j < logits.c; ++j) {
      const T e = std::exp(row[j] - maxv);
      probs.data[i * logits.c + j] = e;
      denom += e;
    }
    for (std::size_t j = 0; j < logits.c; ++j) probs.data[i * logits.c + j] /= denom;
  }
  return probs;
}

}  // namespace ftsweep::nn
