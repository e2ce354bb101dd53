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

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aid/rng.hpp"

namespace aid::nn {

// Dense channel-major (C x H x W) activation for a single image.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  Tensor(int channels, int height, int width, T fill = T(0))
      : c_(channels), h_(height), w_(width), data_(static_cast<std::size_t>(channels) * height * width, fill) {}

  int channels() const { return c_; }
  int height() const { return h_; }
  int width() const { return w_; }
  int plane_size() const { return h_ * w_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  T* plane(int c) { return data_.data() + static_cast<std::size_t>(c) * h_ * w_; }
  const T* plane(int c) const { return data_.data() + static_cast<std::size_t>(c) * h_ * w_; }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  T& operator()(int c, int y, int x) { return data_[(static_cast<std::size_t>(c) * h_ + y) * w_ + x]; }
  T operator()(int c, int y, int x) const { return data_[(static_cast<std::size_t>(c) * h_ + y) * w_ + x]; }

  bool same_shape(const Tensor& o) const { return c_ == o.c_ && h_ == o.h_ && w_ == o.w_; }
  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(c_, h_, w_);
    for (std::size_t i = 0; i < data_.size(); ++i) out.data()[i] = static_cast<U>(data_[i]);
    return out;
  }

  bool operator==(const Tensor&) const = default;

 private:
  int c_ = 0;
  int h_ = 0;
  int w_ = 0;
  std::vector<T> data_;
};

// Trainable array with its gradient accumulator.
template <typename T>
struct Param {
  std::string name;
  std::vector<int> shape;
  std::vector<T> value;
  std::vector<T> grad;

  Param() = default;
  Param(std::string n, std::vector<int> s);
  std::size_t size() const { return value.size(); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }
};

// Square-kernel convolution with zero padding kernel/2.
template <typename T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(const std::string& name, int in_channels, int out_channels, int kernel, int stride);

  int in_channels() const { return in_; }
  int out_channels() const { return out_; }
  int kernel() const { return k_; }
  int stride() const { return stride_; }
  int padding() const { return k_ / 2; }
  int output_extent(int in_extent) const { return (in_extent + 2 * padding() - k_) / stride_ + 1; }

  Tensor<T> forward(const Tensor<T>& input) const;

  // Accumulates weight/bias gradients. Returns the input gradient when
  // requested, otherwise an empty tensor.
  Tensor<T> backward(const Tensor<T>& input, const Tensor<T>& grad_output, bool need_input_grad);

  // Input gradient only; parameters untouched.
  Tensor<T> backward_input(const Tensor<T>& input_shape_ref, const Tensor<T>& grad_output) const;

  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }
  const Param<T>& weight() const { return weight_; }
  const Param<T>& bias() const { return bias_; }

  // Multiply-accumulates of one forward pass at the given output extent.
  std::uint64_t macs(int out_h, int out_w) const {
    return static_cast<std::uint64_t>(in_) * out_ * k_ * k_ * out_h * out_w;
  }

  void init_he(Rng& rng);
  void init_normal(Rng& rng, double stddev, double bias_value);

 private:
  // Unfolds the input into a (in*k*k) x (out_h*out_w) matrix.
  void im2col(const Tensor<T>& input, int out_h, int out_w, std::vector<T>& col) const;
  void col2im(const std::vector<T>& col, int out_h, int out_w, Tensor<T>& grad_input) const;
  bool is_pointwise() const { return k_ == 1 && stride_ == 1; }

  int in_ = 0;
  int out_ = 0;
  int k_ = 1;
  int stride_ = 1;
  Param<T> weight_;
  Param<T> bias_;
};

// x * sigmoid(x)
template <typename T>
Tensor<T> silu(const Tensor<T>& pre);

template <typename T>
void silu_backward_inplace(const Tensor<T>& pre, Tensor<T>& grad);

// Nearest-neighbour upsampling by an integer factor, cropped to (h, w).
template <typename T>
Tensor<T> upsample_nearest(const Tensor<T>& in, int factor, int h, int w);

// Adjoint of upsample_nearest.
template <typename T>
Tensor<T> upsample_nearest_backward(const Tensor<T>& grad, int factor, int in_h, int in_w);

template <typename T>
void add_inplace(Tensor<T>& acc, const Tensor<T>& x);

}  // namespace aid::nn
