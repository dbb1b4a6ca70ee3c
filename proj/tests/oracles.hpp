// Copyright 2026 The deepsent Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DEEPSENT_TESTS_ORACLES_HPP_
#define DEEPSENT_TESTS_ORACLES_HPP_

// Reference implementations used only by tests. They share no code with the
// library: plain loops in double precision, written for clarity over speed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "deepsent/tensor.hpp"

namespace deepsent::oracle {

// Dense NCHW buffer in double.
struct Grid {
  Index n = 0, c = 0, h = 0, w = 0;
  std::vector<double> v;

  Grid() = default;
  Grid(Index n_, Index c_, Index h_, Index w_)
      : n(n_), c(c_), h(h_), w(w_), v(static_cast<std::size_t>(n_ * c_ * h_ * w_), 0.0) {}
  double& at(Index a, Index b, Index y, Index x) {
    return v[static_cast<std::size_t>(((a * c + b) * h + y) * w + x)];
  }
  double at(Index a, Index b, Index y, Index x) const {
    return v[static_cast<std::size_t>(((a * c + b) * h + y) * w + x)];
  }
};

inline Grid from_tensor(const Tensor& t) {
  Grid g(t.dim(0), t.dim(1), t.dim(2), t.dim(3));
  for (Index i = 0; i < t.size(); ++i) g.v[i] = t[i];
  return g;
}

// Direct summation over batch, output channel, output row, output column,
// input channel, kernel row, kernel column.
inline Grid conv_naive(const Grid& in, const Tensor& weight, Index stride,
                       Index pad, const std::vector<double>& bias = {}) {
  const Index k = weight.dim(0), kh = weight.dim(2), kw = weight.dim(3);
  const Index oh = (in.h + 2 * pad - kh) / stride + 1;
  const Index ow = (in.w + 2 * pad - kw) / stride + 1;
  Grid out(in.n, k, oh, ow);
  for (Index b = 0; b < in.n; ++b)
    for (Index o = 0; o < k; ++o)
      for (Index y = 0; y < oh; ++y)
        for (Index x = 0; x < ow; ++x) {
          double s = bias.empty() ? 0.0 : bias[o];
          for (Index c = 0; c < in.c; ++c)
            for (Index i = 0; i < kh; ++i)
              for (Index j = 0; j < kw; ++j) {
                const Index iy = y * stride - pad + i, ix = x * stride - pad + j;
                if (iy < 0 || iy >= in.h || ix < 0 || ix >= in.w) continue;
                s += weight(o, c, i, j) * in.at(b, c, iy, ix);
              }
          out.at(b, o, y, x) = s;
        }
  return out;
}

// Same arithmetic as conv_naive with loops reordered so the innermost loop
// walks contiguous memory; used where full-size feature maps make the
// textbook order too slow.
inline Grid conv_naive_fast(const Grid& in, const Tensor& weight, Index stride,
                            Index pad) {
  const Index k = weight.dim(0), kh = weight.dim(2), kw = weight.dim(3);
  const Index oh = (in.h + 2 * pad - kh) / stride + 1;
  const Index ow = (in.w + 2 * pad - kw) / stride + 1;
  Grid out(in.n, k, oh, ow);
  for (Index b = 0; b < in.n; ++b)
    for (Index o = 0; o < k; ++o)
      for (Index c = 0; c < in.c; ++c)
        for (Index i = 0; i < kh; ++i)
          for (Index j = 0; j < kw; ++j) {
            const double wv = weight(o, c, i, j);
            for (Index y = 0; y < oh; ++y) {
              const Index iy = y * stride - pad + i;
              if (iy < 0 || iy >= in.h) continue;
              for (Index x = 0; x < ow; ++x) {
                const Index ix = x * stride - pad + j;
                if (ix < 0 || ix >= in.w) continue;
                out.at(b, o, y, x) += wv * in.at(b, c, iy, ix);
              }
            }
          }
  return out;
}

inline Grid maxpool_naive(const Grid& in, Index kernel, Index stride, Index pad) {
  const Index oh = (in.h + 2 * pad - kernel) / stride + 1;
  const Index ow = (in.w + 2 * pad - kernel) / stride + 1;
  Grid out(in.n, in.c, oh, ow);
  for (Index b = 0; b < in.n; ++b)
    for (Index c = 0; c < in.c; ++c)
      for (Index y = 0; y < oh; ++y)
        for (Index x = 0; x < ow; ++x) {
          double best = -std::numeric_limits<double>::infinity();
          for (Index i = 0; i < kernel; ++i)
            for (Index j = 0; j < kernel; ++j) {
              const Index iy = y * stride - pad + i, ix = x * stride - pad + j;
              if (iy < 0 || iy >= in.h || ix < 0 || ix >= in.w) continue;
              best = std::max(best, in.at(b, c, iy, ix));
            }
          out.at(b, c, y, x) = best;
        }
  return out;
}

// Softmax multiclass log loss of a single row.
inline double row_log_loss(const std::vector<double>& margins, int label) {
  double m = margins[0];
  for (double v : margins) m = std::max(m, v);
  double s = 0.0;
  for (double v : margins) s += std::exp(v - m);
  return m + std::log(s) - margins[label];
}

// Pairwise Mann-Whitney count over every (positive, negative) pair.
inline double auc_pairwise(const std::vector<double>& scores,
                           const std::vector<int>& labels, int positive) {
  std::int64_t concordant = 0, tied = 0, pos = 0, neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    (labels[i] == positive ? pos : neg) += 1;
    if (labels[i] != positive) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] == positive) continue;
      if (scores[i] > scores[j]) ++concordant;
      else if (scores[i] == scores[j]) ++tied;
    }
  }
  return (static_cast<double>(concordant) + 0.5 * static_cast<double>(tied)) /
         (static_cast<double>(pos) * static_cast<double>(neg));
}

// Exhaustive depth-1 split search: every feature, every midpoint between
// consecutive distinct values, gain from the closed forms with plain double
// sums. Returns feature -1 when no split has positive gain.
struct StumpResult {
  int feature = -1;
  float threshold = 0.0f;
  double left_weight = 0.0;
  double right_weight = 0.0;
  double root_weight = 0.0;
  double gain = 0.0;
};

inline double soft(double g, double a) {
  return g > a ? g - a : (g < -a ? g + a : 0.0);
}

inline StumpResult best_stump(const RowMatrixXf& x, const std::vector<double>& g,
                              const std::vector<double>& h, double lambda,
                              double alpha, double gamma, double min_child) {
  auto score = [&](double G, double H) {
    const double t = soft(G, alpha);
    return H + lambda > 0 ? t * t / (H + lambda) : 0.0;
  };
  auto weight = [&](double G, double H) {
    const double t = soft(G, alpha);
    return (t == 0.0 || H + lambda <= 0) ? 0.0 : -t / (H + lambda);
  };
  double G = 0, H = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    G += g[i];
    H += h[i];
  }
  StumpResult best;
  best.root_weight = weight(G, H);
  for (Index f = 0; f < x.cols(); ++f) {
    std::vector<float> values;
    for (Index i = 0; i < x.rows(); ++i) values.push_back(x(i, f));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t t = 0; t + 1 < values.size(); ++t) {
      float thr = static_cast<float>(0.5 * (double(values[t]) + double(values[t + 1])));
      if (!(thr > values[t])) thr = values[t + 1];
      double gl = 0, hl = 0;
      for (Index i = 0; i < x.rows(); ++i) {
        if (x(i, f) < thr) {
          gl += g[i];
          hl += h[i];
        }
      }
      const double gr = G - gl, hr = H - hl;
      if (hl < min_child || hr < min_child) continue;
      const double gain = 0.5 * (score(gl, hl) + score(gr, hr) - score(G, H)) - gamma;
      // Gains equal up to summation rounding are ties; the earlier candidate wins.
      if (gain > best.gain + 1e-10 * (1.0 + std::fabs(best.gain))) {
        best.feature = static_cast<int>(f);
        best.threshold = thr;
        best.gain = gain;
        best.left_weight = weight(gl, hl);
        best.right_weight = weight(gr, hr);
      }
    }
  }
  return best;
}

}  // namespace deepsent::oracle

#endif  // DEEPSENT_TESTS_ORACLES_HPP_
