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

#include <gtest/gtest.h>

#include "aid/nn.hpp"
#include "aid/rng.hpp"
#include "test_util.hpp"

using namespace aid;
using nn::Tensor;

namespace {

// Direct 7-loop convolution, zero padding k/2.
Tensor<double> naive_conv(const nn::Conv2d<double>& conv, const Tensor<double>& x) {
  const int k = conv.kernel(), s = conv.stride(), p = conv.padding();
  const int oh = conv.output_extent(x.height()), ow = conv.output_extent(x.width());
  Tensor<double> y(conv.out_channels(), oh, ow);
  const auto& w = conv.weight().value;
  for (int o = 0; o < conv.out_channels(); ++o)
    for (int yy = 0; yy < oh; ++yy)
      for (int xx = 0; xx < ow; ++xx) {
        double acc = conv.bias().value[o];
        for (int i = 0; i < conv.in_channels(); ++i)
          for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx) {
              const int iy = yy * s + ky - p, ix = xx * s + kx - p;
              if (iy < 0 || ix < 0 || iy >= x.height() || ix >= x.width()) continue;
              acc += w[((static_cast<std::size_t>(o) * conv.in_channels() + i) * k + ky) * k + kx] * x(i, iy, ix);
            }
        y(o, yy, xx) = acc;
      }
  return y;
}

double weighted_sum(const Tensor<double>& y, const Tensor<double>& g) {
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y.data()[i] * g.data()[i];
  return s;
}

}  // namespace

TEST(Conv2d, ForwardMatchesNaive) {
  for (auto [k, stride] : {std::pair{3, 1}, {3, 2}, {1, 1}, {1, 2}}) {
    nn::Conv2d<double> conv("c", 3, 4, k, stride);
    Rng rng(1);
    conv.init_he(rng);
    for (auto& b : conv.bias().value) b = rng.normal();
    const auto x = test::random_tensor<double>(3, 9, 10, 2);
    const auto y = conv.forward(x);
    const auto ref = naive_conv(conv, x);
    ASSERT_TRUE(y.same_shape(ref));
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y.data()[i], ref.data()[i], 1e-12);
  }
}

TEST(Conv2d, BackwardMatchesFiniteDifferences) {
  for (auto [k, stride] : {std::pair{3, 1}, {3, 2}, {1, 1}}) {
    nn::Conv2d<double> conv("c", 2, 3, k, stride);
    Rng rng(4);
    conv.init_he(rng);
    auto x = test::random_tensor<double>(2, 7, 6, 5);
    const auto y = conv.forward(x);
    const auto g = test::random_tensor<double>(3, y.height(), y.width(), 6);
    conv.weight().zero_grad();
    conv.bias().zero_grad();
    const auto gx = conv.backward(x, g, true);
    auto f = [&] { return weighted_sum(conv.forward(x), g); };
    for (std::size_t i = 0; i < conv.weight().size(); ++i) {
      const double num = test::central_difference(conv.weight().value[i], 1e-5, f);
      EXPECT_NEAR(conv.weight().grad[i], num, 1e-7);
    }
    for (std::size_t i = 0; i < conv.bias().size(); ++i) {
      const double num = test::central_difference(conv.bias().value[i], 1e-5, f);
      EXPECT_NEAR(conv.bias().grad[i], num, 1e-7);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double num = test::central_difference(x.data()[i], 1e-5, f);
      EXPECT_NEAR(gx.data()[i], num, 1e-7);
    }
    const auto gx_only = conv.backward_input(x, g);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(gx.data()[i], gx_only.data()[i], 1e-12);
  }
}

TEST(Conv2d, BackwardAccumulates) {
  nn::Conv2d<double> conv("c", 2, 2, 3, 1);
  Rng rng(9);
  conv.init_he(rng);
  const auto x = test::random_tensor<double>(2, 5, 5, 1);
  const auto g = test::random_tensor<double>(2, 5, 5, 2);
  conv.weight().zero_grad();
  conv.backward(x, g, false);
  const auto once = conv.weight().grad;
  conv.backward(x, g, false);
  for (std::size_t i = 0; i < once.size(); ++i) EXPECT_NEAR(conv.weight().grad[i], 2 * once[i], 1e-12);
}

TEST(Silu, ValuesAndGradient) {
  auto pre = test::random_tensor<double>(2, 3, 4, 3, 3.0);
  const auto y = nn::silu(pre);
  for (std::size_t i = 0; i < pre.size(); ++i) {
    const double x = pre.data()[i];
    EXPECT_NEAR(y.data()[i], x / (1 + std::exp(-x)), 1e-14);
  }
  const auto g = test::random_tensor<double>(2, 3, 4, 4);
  auto grad = g;
  nn::silu_backward_inplace(pre, grad);
  for (std::size_t i = 0; i < pre.size(); ++i) {
    auto f = [&] { return weighted_sum(nn::silu(pre), g); };
    EXPECT_NEAR(grad.data()[i], test::central_difference(pre.data()[i], 1e-6, f), 1e-7);
  }
}

TEST(Upsample, BackwardIsAdjoint) {
  // <up(x), g> == <x, up^T(g)> including the cropped border.
  const auto x = test::random_tensor<double>(3, 3, 4, 1);
  const auto up = nn::upsample_nearest(x, 2, 5, 7);
  ASSERT_EQ(up.height(), 5);
  ASSERT_EQ(up.width(), 7);
  EXPECT_EQ(up(1, 4, 6), x(1, 2, 3));
  const auto g = test::random_tensor<double>(3, 5, 7, 2);
  const auto back = nn::upsample_nearest_backward(g, 2, 3, 4);
  EXPECT_NEAR(weighted_sum(up, g), weighted_sum(x, back), 1e-12);
}
