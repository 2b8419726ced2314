// SPDX-License-Identifier: Apache-2.0
#include "stancegen/sdmg/encoder.hpp"

#include <cctype>
#include <cmath>

#include "stancegen/error.hpp"
#include "stancegen/sdmg/fusion.hpp"
#include "stancegen/util/hash.hpp"
#include "stancegen/util/rng.hpp"

namespace stancegen::sdmg {

MatD VisualTokenSequence::stacked() const {
  MatD x(length(), d_v());
  x.row(0) = cls.transpose();
  x.row(1) = prompt.transpose();
  x.bottomRows(patches.rows()) = patches;
  return x;
}

VisualTokenSequence build_visual_input(const MatD& patches, const VecD& prompt,
                                       std::optional<int> grid) {
  if (prompt.size() == 0 || patches.cols() != prompt.size()) {
    fail(ErrorCode::dimension_mismatch, "patch rows and prompt must share d_v");
  }
  if (grid && static_cast<Index>(*grid) * *grid != patches.rows()) {
    fail(ErrorCode::dimension_mismatch, "patch count is not N^2 for the declared grid");
  }
  return {VecD::Zero(prompt.size()), prompt, patches, 0};
}

MatD SequenceEncoder::forward(const MatD& x) const {
  auto layers = forward_layers(x);
  return layers.empty() ? x : layers.back();
}

namespace {

MatD row_softmax(const MatD& s) {
  MatD p(s.rows(), s.cols());
  for (Index r = 0; r < s.rows(); ++r) {
    p.row(r) = softmax<double>(s.row(r).transpose()).transpose();
  }
  return p;
}

struct LayerCache {
  MatD q, k, v, p, h, t;  // t = tanh(H B^T)
  MatD y;
};

LayerCache layer_forward(const ToyTransformerEncoder::Layer& l, const MatD& x) {
  LayerCache c;
  const double scale = std::sqrt(static_cast<double>(x.cols()));
  c.q = x * l.A_q.transpose();
  c.k = x * l.A_k.transpose();
  c.v = x * l.A_v.transpose();
  c.p = row_softmax(c.q * c.k.transpose() / scale);
  c.h = x + c.p * c.v;
  c.t = (c.h * l.B.transpose()).array().tanh().matrix();
  c.y = c.h + c.t;
  return c;
}

MatD layer_backward(const ToyTransformerEncoder::Layer& l, const LayerCache& c, const MatD& dy) {
  const double scale = std::sqrt(static_cast<double>(dy.cols()));
  const MatD g = (dy.array() * (1.0 - c.t.array().square())).matrix();
  const MatD dh = dy + g * l.B;
  const MatD dp = dh * c.v.transpose();
  const MatD dv = c.p.transpose() * dh;
  const VecD row_dot = (dp.array() * c.p.array()).rowwise().sum().matrix();
  const MatD ds = (c.p.array() * (dp.colwise() - row_dot).array()).matrix();
  const MatD dq = ds * c.k / scale;
  const MatD dk = ds.transpose() * c.q / scale;
  return dh + dq * l.A_q + dk * l.A_k + dv * l.A_v;
}

MatD uniform_matrix(util::Rng& rng, Index n) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(n));
  MatD m(n, n);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c) m(r, c) = rng.uniform(-bound, bound);
  return m;
}

}  // namespace

ToyTransformerEncoder::ToyTransformerEncoder(Index dim, int layers, std::uint64_t seed) : dim_(dim) {
  if (dim <= 0 || layers < 0) fail(ErrorCode::invalid_argument, "encoder dim and layers must be positive");
  util::Rng rng(seed);
  for (int i = 0; i < layers; ++i) {
    Layer l;
    l.A_q = uniform_matrix(rng, dim);
    l.A_k = uniform_matrix(rng, dim);
    l.A_v = uniform_matrix(rng, dim);
    l.B = uniform_matrix(rng, dim);
    layers_.push_back(std::move(l));
  }
}

std::vector<MatD> ToyTransformerEncoder::forward_layers(const MatD& x) const {
  if (x.cols() != dim_) fail(ErrorCode::dimension_mismatch, "encoder input has the wrong width");
  std::vector<MatD> out;
  MatD cur = x;
  for (const auto& l : layers_) {
    cur = layer_forward(l, cur).y;
    out.push_back(cur);
  }
  return out;
}

MatD ToyTransformerEncoder::backward(const MatD& x, const MatD& grad_out) const {
  std::vector<LayerCache> caches;
  MatD cur = x;
  for (const auto& l : layers_) {
    caches.push_back(layer_forward(l, cur));
    cur = caches.back().y;
  }
  MatD g = grad_out;
  for (std::size_t i = layers_.size(); i-- > 0;) g = layer_backward(layers_[i], caches[i], g);
  return g;
}

VisualEncoding encode_visual(const VisualTokenSequence& seq, const SequenceEncoder* encoder) {
  if (!encoder) fail(ErrorCode::encoder_unavailable, "no visual encoder configured");
  const MatD x = seq.stacked();
  VisualEncoding enc;
  auto split = [&](const MatD& y) {
    EncoderLayerOutput o;
    o.cls = y.row(0).transpose();
    o.intermediate = y.middleRows(1, 1);
    o.patches = y.bottomRows(seq.patches.rows());
    return o;
  };
  for (const MatD& y : encoder->forward_layers(x)) enc.layers.push_back(split(y));
  enc.tokens = encoder->forward(x);
  enc.cls = enc.tokens.row(0).transpose();
  return enc;
}

std::vector<std::uint32_t> HashingTokenizer::encode(std::string_view text, bool prepend_cls) const {
  if (vocab_ < 2) fail(ErrorCode::invalid_argument, "vocab must hold CLS plus one word id");
  std::vector<std::uint32_t> ids;
  if (prepend_cls) ids.push_back(0);
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    ids.push_back(1 + static_cast<std::uint32_t>(util::fnv1a64(word) % (vocab_ - 1)));
    word.clear();
  };
  for (const char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      flush();
    } else {
      word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  flush();
  return ids;
}

TokenEmbedding::TokenEmbedding(std::uint32_t vocab, Index d_t, std::uint64_t seed)
    : table_(vocab, d_t) {
  util::Rng rng(seed);
  const double sd = 1.0 / std::sqrt(static_cast<double>(d_t));
  for (Index r = 0; r < table_.rows(); ++r)
    for (Index c = 0; c < table_.cols(); ++c) table_(r, c) = rng.normal(0.0, sd);
}

MatD TokenEmbedding::lookup(const std::vector<std::uint32_t>& ids) const {
  MatD x(static_cast<Index>(ids.size()), table_.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= table_.rows()) fail(ErrorCode::invalid_argument, "token id outside the vocabulary");
    x.row(static_cast<Index>(i)) = table_.row(ids[i]);
  }
  return x;
}

TextEmbedding encode_text(const std::vector<std::uint32_t>& ids, const TokenEmbedding& embedding,
                          const SequenceEncoder* encoder, bool return_tokens) {
  if (!encoder) fail(ErrorCode::encoder_unavailable, "no text encoder configured");
  if (ids.empty()) fail(ErrorCode::empty_text, "cannot encode an empty token sequence");
  const MatD y = encoder->forward(embedding.lookup(ids));
  TextEmbedding out;
  out.cls = y.row(0).transpose();
  if (!out.cls.allFinite()) fail(ErrorCode::invalid_argument, "text encoder produced non-finite CLS");
  if (return_tokens) out.tokens = y;
  return out;
}

MatD image_patches(const std::string& bytes, int grid, Index d_v, std::uint64_t seed) {
  if (grid <= 0 || d_v <= 0) fail(ErrorCode::invalid_argument, "grid and d_v must be positive");
  constexpr Index bins = 16;
  util::Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  MatD proj(d_v, bins);
  for (Index r = 0; r < d_v; ++r)
    for (Index c = 0; c < bins; ++c) proj(r, c) = rng.normal(0.0, 1.0 / 4.0);
  const Index n = static_cast<Index>(grid) * grid;
  MatD out(n, d_v);
  const std::size_t size = bytes.size();
  for (Index k = 0; k < n; ++k) {
    const std::size_t lo = size * static_cast<std::size_t>(k) / static_cast<std::size_t>(n);
    const std::size_t hi = size * static_cast<std::size_t>(k + 1) / static_cast<std::size_t>(n);
    VecD hist = VecD::Zero(bins);
    for (std::size_t i = lo; i < hi; ++i) hist(static_cast<unsigned char>(bytes[i]) >> 4) += 1.0;
    if (hi > lo) hist /= static_cast<double>(hi - lo);
    out.row(k) = (proj * hist).transpose();
  }
  return out;
}

}  // namespace stancegen::sdmg
