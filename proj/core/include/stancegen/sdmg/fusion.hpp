// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "stancegen/error.hpp"
#include "stancegen/sdmg/tensor.hpp"

namespace stancegen::sdmg {

enum class FuseMode { concat, add };

std::string to_string(FuseMode m);
FuseMode parse_fuse_mode(const std::string& s);  // "concat" | "add"

/// W_q: d x d_v, W_k: d x d_t, W_v: d x d_v.
template <class S>
struct ProjectionParams {
  Mat<S> W_q;
  Mat<S> W_k;
  Mat<S> W_v;

  Index d() const { return W_q.rows(); }
  Index d_v() const { return W_q.cols(); }
  Index d_t() const { return W_k.cols(); }

  void validate() const {
    if (W_q.rows() == 0 || W_k.rows() != W_q.rows() || W_v.rows() != W_q.rows() ||
        W_v.cols() != W_q.cols()) {
      fail(ErrorCode::dimension_mismatch, "projection shapes disagree");
    }
    if (!W_q.allFinite() || !W_k.allFinite() || !W_v.allFinite()) {
      fail(ErrorCode::invalid_argument, "projection parameters must be finite");
    }
  }

  template <class U>
  ProjectionParams<U> cast() const {
    return {W_q.template cast<U>(), W_k.template cast<U>(), W_v.template cast<U>()};
  }
};

/// Trainable fusion state: projections, text projection W_t (d x d_t), prompt P_V.
template <class S>
struct SdmgParams {
  ProjectionParams<S> proj;
  Mat<S> W_t;
  Vec<S> prompt;

  void validate() const {
    proj.validate();
    if (W_t.rows() != proj.d() || W_t.cols() != proj.d_t() || prompt.size() != proj.d_v()) {
      fail(ErrorCode::dimension_mismatch, "W_t or P_V shape disagrees with the projections");
    }
  }
};

struct SdmgDims {
  Index d_v = 64;
  Index d_t = 64;
  Index d = 64;
};

/// W_* ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), P_V ~ N(0, 0.02).
SdmgParams<double> init_params(const SdmgDims& dims, std::uint64_t seed);

NamedTensors to_tensors(const SdmgParams<double>& p);
SdmgParams<double> params_from_tensors(const NamedTensors& t);

template <class S>
struct Projected {
  Vec<S> q;
  Vec<S> k;
  Vec<S> v;
};

template <class S>
Projected<S> project_qkv(const Vec<S>& visual, const Vec<S>& text, const ProjectionParams<S>& p) {
  if (visual.size() != p.d_v() || text.size() != p.d_t()) {
    fail(ErrorCode::dimension_mismatch, "project_qkv: input dims do not match params");
  }
  return {p.W_q * visual, p.W_k * text, p.W_v * visual};
}

/// Max-shifted softmax.
template <class S>
Vec<S> softmax(const Vec<S>& scores) {
  const S m = scores.maxCoeff();
  Vec<S> e = (scores.array() - m).exp().matrix();
  return e / e.sum();
}

/// Softmax(q k^T / sqrt(d)) v_f with single-token q and k: one score, weight 1.
template <class S>
Vec<S> tsa_attend_literal(const Vec<S>& q, const Vec<S>& k, const Vec<S>& v_f) {
  if (q.size() != k.size() || q.size() != v_f.size() || q.size() == 0) {
    fail(ErrorCode::dimension_mismatch, "tsa_attend_literal: q, k, v_f must share dim d");
  }
  Vec<S> score(1);
  score(0) = q.dot(k) / std::sqrt(static_cast<S>(q.size()));
  const Vec<S> w = softmax(score);
  return w(0) * v_f;
}

template <class S>
struct PooledAttention {
  Vec<S> output;   // d
  Vec<S> weights;  // M
  Vec<S> scores;   // M
  Mat<S> values;   // d x M, column m = W_v v_m
  Mat<S> queries;  // d x M
  Vec<S> key;      // d
};

/// Rows of `tokens` are visual tokens (M x d_v). Scores each W_q v_m against
/// k = W_k T and returns sum_m a_m W_v v_m.
template <class S>
PooledAttention<S> tsa_attend_pooled_detail(const Mat<S>& tokens, const Vec<S>& text,
                                            const ProjectionParams<S>& p) {
  if (tokens.rows() < 1) fail(ErrorCode::dimension_mismatch, "tsa_attend_pooled: M must be >= 1");
  if (tokens.cols() != p.d_v() || text.size() != p.d_t()) {
    fail(ErrorCode::dimension_mismatch, "tsa_attend_pooled: input dims do not match params");
  }
  PooledAttention<S> r;
  r.queries = p.W_q * tokens.transpose();
  r.values = p.W_v * tokens.transpose();
  r.key = p.W_k * text;
  const S scale = std::sqrt(static_cast<S>(p.d()));
  r.scores = (r.queries.transpose() * r.key) / scale;
  r.weights = softmax(r.scores);
  r.output = r.weights(0) * r.values.col(0);
  for (Index m = 1; m < tokens.rows(); ++m) r.output += r.weights(m) * r.values.col(m);
  return r;
}

template <class S>
Vec<S> tsa_attend_pooled(const Mat<S>& tokens, const Vec<S>& text, const ProjectionParams<S>& p) {
  return tsa_attend_pooled_detail(tokens, text, p).output;
}

template <class S>
struct FusedFeature {
  Vec<S> values;
  FuseMode mode = FuseMode::concat;
};

template <class S>
FusedFeature<S> fuse(const Vec<S>& visual, const Vec<S>& text, FuseMode mode) {
  FusedFeature<S> f{{}, mode};
  if (mode == FuseMode::add) {
    if (visual.size() != text.size()) {
      fail(ErrorCode::dimension_mismatch, "fuse ADD needs equal dims; project the text side to d");
    }
    f.values = visual + text;
  } else {
    f.values.resize(visual.size() + text.size());
    f.values << visual, text;
  }
  return f;
}

}  // namespace stancegen::sdmg
