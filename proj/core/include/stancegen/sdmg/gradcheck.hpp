// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stancegen/sdmg/encoder.hpp"
#include "stancegen/sdmg/fusion.hpp"

namespace stancegen::sdmg {

/// Named double-precision blocks; vectors are stored as n x 1.
using Blocks = std::map<std::string, MatD>;

struct PooledGradients {
  MatD W_q, W_k, W_v;
  MatD tokens;  // M x d_v
  VecD text;
};

/// Backward pass of tsa_attend_pooled given dL/d(output).
PooledGradients tsa_attend_pooled_backward(const MatD& tokens, const VecD& text,
                                           const ProjectionParams<double>& p, const VecD& grad_out);

/// Full fusion path: [CLS, P_V, patches] -> encoder -> pooled attention
/// against `text`, fused with W_t text.
VecD sdmg_forward(const SdmgParams<double>& params, const MatD& patches, const VecD& text,
                  const SequenceEncoder& encoder, FuseMode mode);

struct SdmgGradients {
  SdmgParams<double> params;  // same layout, holding gradients
  MatD patches;
  VecD text;
};

SdmgGradients sdmg_backward(const SdmgParams<double>& params, const MatD& patches, const VecD& text,
                            const SequenceEncoder& encoder, FuseMode mode, const VecD& grad_out);

enum class GradOp { project_qkv, tsa_attend_pooled, fuse_add, fuse_concat, prompt_pipeline };

std::string to_string(GradOp op);
GradOp parse_grad_op(const std::string& s);
const std::vector<GradOp>& all_grad_ops();

struct GradCheckConfig {
  Index d_v = 8;
  Index d_t = 8;
  Index d = 8;
  Index tokens = 3;        // M for tsa_attend_pooled
  int grid = 2;            // N for prompt_pipeline
  int encoder_layers = 2;
  FuseMode pipeline_mode = FuseMode::concat;
  /// Makes one attention score dominate the others by about `saturation_gap`.
  bool saturate = false;
  double saturation_gap = 40.0;
};

/// Everything an op needs; the scalar checked is L = loss_weights . output.
struct GradCheckInputs {
  SdmgParams<double> params;
  VecD visual;    // d_v
  VecD text;      // d_t
  MatD tokens;    // M x d_v
  VecD attended;  // d
  MatD patches;   // N^2 x d_v
  std::shared_ptr<const SequenceEncoder> encoder;
  std::uint64_t seed = 0;
};

GradCheckInputs make_gradcheck_inputs(const GradCheckConfig& config, std::uint64_t seed);

struct BlockError {
  std::string name;
  double max_rel_error = 0.0;  // ||a - n||_inf / max(||a||_inf, ||n||_inf, 1e-8)
  double max_abs_error = 0.0;
  double analytic_norm = 0.0;
};

struct GradCheckReport {
  GradOp op = GradOp::project_qkv;
  double eps = 0.0;
  std::vector<BlockError> blocks;
  double max_rel_error = 0.0;
  /// Largest attention weight and gap between the top two scores.
  double max_attention_weight = 0.0;
  double score_gap = 0.0;
  bool saturated = false;  // max weight above 1 - 1e-6
};

/// Central differences with step `eps` in [1e-7, 1e-3] against the analytic
/// gradient of every input and parameter block of `op`.
/// Throws NonFiniteGradient when either gradient has a non-finite entry.
GradCheckReport grad_check(GradOp op, const GradCheckInputs& inputs, double eps,
                           const GradCheckConfig& config = {});

nlohmann::json to_json(const GradCheckReport& r);

}  // namespace stancegen::sdmg
