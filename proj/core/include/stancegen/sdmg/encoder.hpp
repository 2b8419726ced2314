// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stancegen/sdmg/tensor.hpp"

namespace stancegen::sdmg {

/// [CLS, P_V, patches...] with rows of dimension d_v.
struct VisualTokenSequence {
  VecD cls;
  VecD prompt;
  MatD patches;  // N^2 x d_v
  int layer_index = 0;

  Index d_v() const { return cls.size(); }
  Index length() const { return patches.rows() + 2; }
  /// (N^2 + 2) x d_v, rows in sequence order.
  MatD stacked() const;
};

/// CLS starts at zero. `grid`, when given, must satisfy grid^2 == patch rows.
VisualTokenSequence build_visual_input(const MatD& patches, const VecD& prompt,
                                       std::optional<int> grid = std::nullopt);

/// One layer's output split as [CLS | Z | patches].
struct EncoderLayerOutput {
  VecD cls;
  MatD intermediate;  // prompt-slot rows
  MatD patches;
};

/// Maps a token matrix (rows = positions) to per-layer outputs of the same shape.
class SequenceEncoder {
 public:
  virtual ~SequenceEncoder() = default;
  virtual std::string id() const = 0;
  virtual Index dim() const = 0;
  /// Output of every layer, last entry is the final state. Empty for identity.
  virtual std::vector<MatD> forward_layers(const MatD& x) const = 0;
  /// Gradient of a scalar w.r.t. x given its gradient w.r.t. the final state.
  virtual MatD backward(const MatD& x, const MatD& grad_out) const = 0;

  MatD forward(const MatD& x) const;
};

class IdentityEncoder final : public SequenceEncoder {
 public:
  explicit IdentityEncoder(Index dim) : dim_(dim) {}
  std::string id() const override { return "identity"; }
  Index dim() const override { return dim_; }
  std::vector<MatD> forward_layers(const MatD&) const override { return {}; }
  MatD backward(const MatD&, const MatD& grad_out) const override { return grad_out; }

 private:
  Index dim_;
};

/// Small fixed-seed transformer. Each layer:
///   H = X + softmax(Q K^T / sqrt(D)) V   with Q = X A_q^T, K = X A_k^T, V = X A_v^T
///   Y = H + tanh(H B^T)
class ToyTransformerEncoder final : public SequenceEncoder {
 public:
  struct Layer {
    MatD A_q, A_k, A_v, B;
  };

  ToyTransformerEncoder(Index dim, int layers, std::uint64_t seed);

  std::string id() const override { return "toy-transformer"; }
  Index dim() const override { return dim_; }
  std::vector<MatD> forward_layers(const MatD& x) const override;
  MatD backward(const MatD& x, const MatD& grad_out) const override;
  const std::vector<Layer>& layers() const { return layers_; }

 private:
  Index dim_;
  std::vector<Layer> layers_;
};

struct VisualEncoding {
  std::vector<EncoderLayerOutput> layers;  // k = 1..L
  VecD cls;                                // final CLS
  MatD tokens;                             // final state, all rows
};

/// Throws EncoderUnavailable when `encoder` is null.
VisualEncoding encode_visual(const VisualTokenSequence& seq, const SequenceEncoder* encoder);

/// Whitespace tokenizer hashing lowercased words into [1, vocab); id 0 is CLS.
class HashingTokenizer {
 public:
  explicit HashingTokenizer(std::uint32_t vocab = 4096) : vocab_(vocab) {}
  std::vector<std::uint32_t> encode(std::string_view text, bool prepend_cls = true) const;
  std::uint32_t vocab() const { return vocab_; }

 private:
  std::uint32_t vocab_;
};

/// Seeded N(0, 1/d_t) lookup table, vocab x d_t.
class TokenEmbedding {
 public:
  TokenEmbedding(std::uint32_t vocab, Index d_t, std::uint64_t seed);
  MatD lookup(const std::vector<std::uint32_t>& ids) const;
  Index dim() const { return table_.cols(); }

 private:
  MatD table_;
};

struct TextEmbedding {
  VecD cls;
  std::optional<MatD> tokens;
};

/// cls is the first-position output state.
TextEmbedding encode_text(const std::vector<std::uint32_t>& ids, const TokenEmbedding& embedding,
                          const SequenceEncoder* encoder, bool return_tokens = false);

/// Deterministic N^2 x d_v patch features from raw image bytes: the byte
/// stream is cut into N^2 contiguous chunks, each summarized by a 16-bin
/// histogram and projected with a seeded gaussian matrix.
MatD image_patches(const std::string& bytes, int grid, Index d_v, std::uint64_t seed = 0);

}  // namespace stancegen::sdmg
