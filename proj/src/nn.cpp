// Copyright 2026 The AID Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "aid/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "aid/errors.hpp"
#include "aid/simd/kernels.hpp"

namespace aid::nn {

namespace {

template <typename T>
T sigmoid(T x) {
  if (x >= 0) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

template <typename T>
void transpose(const T* src, int rows, int cols, std::vector<T>& dst) {
  dst.resize(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) dst[static_cast<std::size_t>(c) * rows + r] = src[static_cast<std::size_t>(r) * cols + c];
}

template <typename T>
std::vector<T>& scratch(int slot) {
  thread_local std::vector<T> buffers[3];
  return buffers[slot];
}

}  // namespace

template <typename T>
Param<T>::Param(std::string n, std::vector<int> s) : name(std::move(n)), shape(std::move(s)) {
  const std::size_t count =
      std::accumulate(shape.begin(), shape.end(), std::size_t{1}, [](std::size_t a, int b) { return a * b; });
  value.assign(count, T(0));
  grad.assign(count, T(0));
}

template <typename T>
Conv2d<T>::Conv2d(const std::string& name, int in_channels, int out_channels, int kernel, int stride)
    : in_(in_channels),
      out_(out_channels),
      k_(kernel),
      stride_(stride),
      weight_(name + ".weight", {out_channels, in_channels, kernel, kernel}),
      bias_(name + ".bias", {out_channels}) {
  if (in_channels <= 0 || out_channels <= 0 || kernel <= 0 || kernel % 2 == 0 || stride <= 0)
    throw ValidationError("invalid convolution geometry for " + name);
}

template <typename T>
void Conv2d<T>::init_he(Rng& rng) {
  const double stddev = std::sqrt(2.0 / (static_cast<double>(in_) * k_ * k_));
  for (T& w : weight_.value) w = static_cast<T>(rng.normal(0.0, stddev));
  std::fill(bias_.value.begin(), bias_.value.end(), T(0));
}

template <typename T>
void Conv2d<T>::init_normal(Rng& rng, double stddev, double bias_value) {
  for (T& w : weight_.value) w = static_cast<T>(rng.normal(0.0, stddev));
  std::fill(bias_.value.begin(), bias_.value.end(), static_cast<T>(bias_value));
}

template <typename T>
void Conv2d<T>::im2col(const Tensor<T>& input, int out_h, int out_w, std::vector<T>& col) const {
  const int pad = padding();
  const int in_h = input.height();
  const int in_w = input.width();
  const std::size_t plane = static_cast<std::size_t>(out_h) * out_w;
  col.assign(static_cast<std::size_t>(in_) * k_ * k_ * plane, T(0));
  T* dst = col.data();
  for (int c = 0; c < in_; ++c) {
    const T* src = input.plane(c);
    for (int ky = 0; ky < k_; ++ky) {
      for (int kx = 0; kx < k_; ++kx, dst += plane) {
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride_ - pad + ky;
          if (iy < 0 || iy >= in_h) continue;
          const T* srow = src + static_cast<std::size_t>(iy) * in_w;
          T* drow = dst + static_cast<std::size_t>(oy) * out_w;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * stride_ - pad + kx;
            if (ix >= 0 && ix < in_w) drow[ox] = srow[ix];
          }
        }
      }
    }
  }
}

template <typename T>
void Conv2d<T>::col2im(const std::vector<T>& col, int out_h, int out_w, Tensor<T>& grad_input) const {
  const int pad = padding();
  const int in_h = grad_input.height();
  const int in_w = grad_input.width();
  const std::size_t plane = static_cast<std::size_t>(out_h) * out_w;
  const T* src = col.data();
  for (int c = 0; c < in_; ++c) {
    T* dst = grad_input.plane(c);
    for (int ky = 0; ky < k_; ++ky) {
      for (int kx = 0; kx < k_; ++kx, src += plane) {
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride_ - pad + ky;
          if (iy < 0 || iy >= in_h) continue;
          T* drow = dst + static_cast<std::size_t>(iy) * in_w;
          const T* srow = src + static_cast<std::size_t>(oy) * out_w;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * stride_ - pad + kx;
            if (ix >= 0 && ix < in_w) drow[ix] += srow[ox];
          }
        }
      }
    }
  }
}

template <typename T>
Tensor<T> Conv2d<T>::forward(const Tensor<T>& input) const {
  if (input.channels() != in_)
    throw ShapeError(weight_.name + ": expected " + std::to_string(in_) + " input channels, got " +
                     std::to_string(input.channels()));
  const int oh = output_extent(input.height());
  const int ow = output_extent(input.width());
  const int plane = oh * ow;
  Tensor<T> out(out_, oh, ow);
  for (int o = 0; o < out_; ++o) std::fill(out.plane(o), out.plane(o) + plane, bias_.value[o]);
  const int depth = in_ * k_ * k_;
  if (is_pointwise()) {
    simd::gemm<T>(out_, plane, depth, weight_.value.data(), depth, input.data(), plane, out.data(), plane);
  } else {
    auto& col = scratch<T>(0);
    im2col(input, oh, ow, col);
    simd::gemm<T>(out_, plane, depth, weight_.value.data(), depth, col.data(), plane, out.data(), plane);
  }
  return out;
}

template <typename T>
Tensor<T> Conv2d<T>::backward(const Tensor<T>& input, const Tensor<T>& grad_output, bool need_input_grad) {
  const int oh = grad_output.height();
  const int ow = grad_output.width();
  const int plane = oh * ow;
  if (grad_output.channels() != out_ || oh != output_extent(input.height()) || ow != output_extent(input.width()))
    throw ShapeError(weight_.name + ": gradient shape does not match forward output");
  const int depth = in_ * k_ * k_;

  for (int o = 0; o < out_; ++o) {
    const T* g = grad_output.plane(o);
    T s = 0;
    for (int p = 0; p < plane; ++p) s += g[p];
    bias_.grad[o] += s;
  }

  const T* col_ptr = input.data();
  auto& col = scratch<T>(0);
  if (!is_pointwise()) {
    im2col(input, oh, ow, col);
    col_ptr = col.data();
  }
  auto& col_t = scratch<T>(1);
  transpose(col_ptr, depth, plane, col_t);
  simd::gemm<T>(out_, depth, plane, grad_output.data(), plane, col_t.data(), depth, weight_.grad.data(), depth);

  if (!need_input_grad) return {};
  return backward_input(input, grad_output);
}

template <typename T>
Tensor<T> Conv2d<T>::backward_input(const Tensor<T>& input_shape_ref, const Tensor<T>& grad_output) const {
  const int oh = grad_output.height();
  const int ow = grad_output.width();
  const int plane = oh * ow;
  const int depth = in_ * k_ * k_;
  auto& w_t = scratch<T>(1);
  transpose(weight_.value.data(), out_, depth, w_t);
  Tensor<T> grad_input(in_, input_shape_ref.height(), input_shape_ref.width());
  if (is_pointwise()) {
    simd::gemm<T>(depth, plane, out_, w_t.data(), out_, grad_output.data(), plane, grad_input.data(), plane);
    return grad_input;
  }
  auto& dcol = scratch<T>(2);
  dcol.assign(static_cast<std::size_t>(depth) * plane, T(0));
  simd::gemm<T>(depth, plane, out_, w_t.data(), out_, grad_output.data(), plane, dcol.data(), plane);
  col2im(dcol, oh, ow, grad_input);
  return grad_input;
}

template <typename T>
Tensor<T> silu(const Tensor<T>& pre) {
  Tensor<T> out(pre.channels(), pre.height(), pre.width());
  const T* x = pre.data();
  T* y = out.data();
  for (std::size_t i = 0; i < pre.size(); ++i) y[i] = x[i] * sigmoid(x[i]);
  return out;
}

template <typename T>
void silu_backward_inplace(const Tensor<T>& pre, Tensor<T>& grad) {
  const T* x = pre.data();
  T* g = grad.data();
  for (std::size_t i = 0; i < pre.size(); ++i) {
    const T s = sigmoid(x[i]);
    g[i] *= s * (T(1) + x[i] * (T(1) - s));
  }
}

template <typename T>
Tensor<T> upsample_nearest(const Tensor<T>& in, int factor, int h, int w) {
  Tensor<T> out(in.channels(), h, w);
  for (int c = 0; c < in.channels(); ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out(c, y, x) = in(c, std::min(y / factor, in.height() - 1), std::min(x / factor, in.width() - 1));
  return out;
}

template <typename T>
Tensor<T> upsample_nearest_backward(const Tensor<T>& grad, int factor, int in_h, int in_w) {
  Tensor<T> out(grad.channels(), in_h, in_w);
  for (int c = 0; c < grad.channels(); ++c)
    for (int y = 0; y < grad.height(); ++y)
      for (int x = 0; x < grad.width(); ++x)
        out(c, std::min(y / factor, in_h - 1), std::min(x / factor, in_w - 1)) += grad(c, y, x);
  return out;
}

template <typename T>
void add_inplace(Tensor<T>& acc, const Tensor<T>& x) {
  if (!acc.same_shape(x)) throw ShapeError("add_inplace: shape mismatch");
  simd::axpy<T>(acc.size(), T(1), x.data(), acc.data());
}

#define AID_INSTANTIATE_NN(T)                                                                \
  template struct Param<T>;                                                                  \
  template class Conv2d<T>;                                                                  \
  template Tensor<T> silu<T>(const Tensor<T>&);                                              \
  template void silu_backward_inplace<T>(const Tensor<T>&, Tensor<T>&);                      \
  template Tensor<T> upsample_nearest<T>(const Tensor<T>&, int, int, int);                   \
  template Tensor<T> upsample_nearest_backward<T>(const Tensor<T>&, int, int, int);          \
  template void add_inplace<T>(Tensor<T>&, const Tensor<T>&);

AID_INSTANTIATE_NN(float)
AID_INSTANTIATE_NN(double)

#undef AID_INSTANTIATE_NN

}  // namespace aid::nn
