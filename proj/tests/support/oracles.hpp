// SPDX-License-Identifier: Apache-2.0
// Brute-force reference implementations. Plain loops over std::vector, no
// Eigen, no library code.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

namespace oracle {

using Vector = std::vector<double>;
using Matrix = std::vector<Vector>;  // row-major, rows of equal length

inline Vector matvec(const Matrix& a, const Vector& x) {
  Vector y(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    long double acc = 0.0L;
    for (std::size_t j = 0; j < x.size(); ++j) acc += static_cast<long double>(a[i][j]) * x[j];
    y[i] = static_cast<double>(acc);
  }
  return y;
}

inline double dot(const Vector& a, const Vector& b) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<long double>(a[i]) * b[i];
  return static_cast<double>(acc);
}

/// exp(s_i) / sum_j exp(s_j), shifted by the max to stay finite.
inline Vector softmax(const Vector& s) {
  const double m = *std::max_element(s.begin(), s.end());
  Vector e(s.size());
  long double z = 0.0L;
  for (std::size_t i = 0; i < s.size(); ++i) {
    e[i] = std::exp(s[i] - m);
    z += e[i];
  }
  for (auto& v : e) v = static_cast<double>(v / z);
  return e;
}

struct Pooled {
  Vector output;
  Vector weights;
  Matrix values;  // one projected value per token
};

/// sum_m softmax_m(<W_q v_m, W_k t> / sqrt(d)) W_v v_m
inline Pooled pooled_attention(const Matrix& tokens, const Vector& text, const Matrix& wq,
                               const Matrix& wk, const Matrix& wv) {
  const Vector k = matvec(wk, text);
  const double scale = std::sqrt(static_cast<double>(wq.size()));
  Vector scores;
  Pooled r;
  for (const auto& v : tokens) {
    scores.push_back(dot(matvec(wq, v), k) / scale);
    r.values.push_back(matvec(wv, v));
  }
  r.weights = softmax(scores);
  r.output.assign(wq.size(), 0.0);
  for (std::size_t m = 0; m < tokens.size(); ++m) {
    for (std::size_t i = 0; i < r.output.size(); ++i) r.output[i] += r.weights[m] * r.values[m][i];
  }
  return r;
}

/// (p_o - p_e) / (1 - p_e) from proportions, in the textbook form.
inline double kappa(const std::vector<std::vector<std::size_t>>& t) {
  const std::size_t k = t.size();
  double n = 0.0;
  for (const auto& row : t) for (auto c : row) n += static_cast<double>(c);
  double po = 0.0;
  for (std::size_t i = 0; i < k; ++i) po += static_cast<double>(t[i][i]) / n;
  double pe = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double r = 0.0, c = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      r += static_cast<double>(t[i][j]);
      c += static_cast<double>(t[j][i]);
    }
    pe += (r / n) * (c / n);
  }
  if (pe == 1.0) return po == 1.0 ? 1.0 : 0.0;
  return (po - pe) / (1.0 - pe);
}

inline double cosine(const Vector& a, const Vector& b) {
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

inline double mean(const Vector& v) {
  long double s = 0.0L;
  for (double x : v) s += x;
  return static_cast<double>(s / static_cast<long double>(v.size()));
}

}  // namespace oracle

namespace oracle {

/// One toy encoder layer in plain loops:
///   H = X + softmax_rows(X A_q^T (X A_k^T)^T / sqrt(D)) X A_v^T,  Y = H + tanh(H B^T)
inline Matrix toy_layer(const Matrix& x, const Matrix& aq, const Matrix& ak, const Matrix& av,
                        const Matrix& b) {
  const std::size_t n = x.size();
  const std::size_t d = x[0].size();
  Matrix q, k, v;
  for (const auto& row : x) {
    q.push_back(matvec(aq, row));
    k.push_back(matvec(ak, row));
    v.push_back(matvec(av, row));
  }
  Matrix h = x;
  for (std::size_t i = 0; i < n; ++i) {
    Vector s(n);
    for (std::size_t j = 0; j < n; ++j) s[j] = dot(q[i], k[j]) / std::sqrt(static_cast<double>(d));
    const Vector w = softmax(s);
    for (std::size_t c = 0; c < d; ++c) {
      long double acc = 0.0L;
      for (std::size_t j = 0; j < n; ++j) acc += static_cast<long double>(w[j]) * v[j][c];
      h[i][c] += static_cast<double>(acc);
    }
  }
  Matrix y = h;
  for (std::size_t i = 0; i < n; ++i) {
    const Vector hb = matvec(b, h[i]);
    for (std::size_t c = 0; c < d; ++c) y[i][c] += std::tanh(hb[c]);
  }
  return y;
}

}  // namespace oracle
