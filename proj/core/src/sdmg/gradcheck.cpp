// SPDX-License-Identifier: Apache-2.0
#include "stancegen/sdmg/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "stancegen/error.hpp"
#include "stancegen/util/rng.hpp"

namespace stancegen::sdmg {

PooledGradients tsa_attend_pooled_backward(const MatD& tokens, const VecD& text,
                                           const ProjectionParams<double>& p, const VecD& grad_out) {
  const auto fw = tsa_attend_pooled_detail<double>(tokens, text, p);
  const double scale = std::sqrt(static_cast<double>(p.d()));
  const VecD ga = fw.values.transpose() * grad_out;                // M
  const VecD gs = fw.weights.cwiseProduct((ga.array() - fw.weights.dot(ga)).matrix());
  const MatD gq = fw.key * gs.transpose() / scale;                 // d x M
  const VecD gk = fw.queries * gs / scale;                         // d
  const MatD gu = grad_out * fw.weights.transpose();               // d x M
  PooledGradients g;
  g.W_q = gq * tokens;
  g.W_v = gu * tokens;
  g.W_k = gk * text.transpose();
  g.text = p.W_k.transpose() * gk;
  g.tokens = (p.W_q.transpose() * gq + p.W_v.transpose() * gu).transpose();
  return g;
}

VecD sdmg_forward(const SdmgParams<double>& params, const MatD& patches, const VecD& text,
                  const SequenceEncoder& encoder, FuseMode mode) {
  const MatD y = encoder.forward(build_visual_input(patches, params.prompt).stacked());
  const VecD attended = tsa_attend_pooled<double>(y, text, params.proj);
  return fuse<double>(attended, params.W_t * text, mode).values;
}

SdmgGradients sdmg_backward(const SdmgParams<double>& params, const MatD& patches, const VecD& text,
                            const SequenceEncoder& encoder, FuseMode mode, const VecD& grad_out) {
  const Index d = params.proj.d();
  const MatD x = build_visual_input(patches, params.prompt).stacked();
  const MatD y = encoder.forward(x);
  const VecD g_att = mode == FuseMode::concat ? VecD(grad_out.head(d)) : grad_out;
  const VecD g_tp = mode == FuseMode::concat ? VecD(grad_out.tail(d)) : grad_out;
  const PooledGradients pg = tsa_attend_pooled_backward(y, text, params.proj, g_att);
  const MatD gx = encoder.backward(x, pg.tokens);
  SdmgGradients g;
  g.params.proj = {pg.W_q, pg.W_k, pg.W_v};
  g.params.W_t = g_tp * text.transpose();
  g.params.prompt = gx.row(1).transpose();
  g.patches = gx.bottomRows(patches.rows());
  g.text = pg.text + params.W_t.transpose() * g_tp;
  return g;
}

std::string to_string(GradOp op) {
  switch (op) {
    case GradOp::project_qkv: return "project_qkv";
    case GradOp::tsa_attend_pooled: return "tsa_attend_pooled";
    case GradOp::fuse_add: return "fuse_add";
    case GradOp::fuse_concat: return "fuse_concat";
    case GradOp::prompt_pipeline: return "prompt_pipeline";
  }
  return "?";
}

const std::vector<GradOp>& all_grad_ops() {
  static const std::vector<GradOp> ops{GradOp::project_qkv, GradOp::tsa_attend_pooled,
                                       GradOp::fuse_add, GradOp::fuse_concat,
                                       GradOp::prompt_pipeline};
  return ops;
}

GradOp parse_grad_op(const std::string& s) {
  for (const GradOp op : all_grad_ops())
    if (to_string(op) == s) return op;
  fail(ErrorCode::invalid_argument, "unknown gradcheck op '" + s + "'");
}

namespace {

MatD gaussian(util::Rng& rng, Index rows, Index cols) {
  MatD m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = rng.normal();
  return m;
}

struct OpDef {
  Blocks blocks;
  std::function<VecD(const Blocks&)> forward;
  std::function<Blocks(const Blocks&, const VecD&)> backward;
};

ProjectionParams<double> proj_of(const Blocks& b) {
  return {b.at("W_q"), b.at("W_k"), b.at("W_v")};
}

OpDef define(GradOp op, const GradCheckInputs& in, FuseMode pipeline_mode) {
  const auto& p = in.params;
  OpDef def;
  switch (op) {
    case GradOp::project_qkv:
      def.blocks = {{"W_q", p.proj.W_q}, {"W_k", p.proj.W_k}, {"W_v", p.proj.W_v},
                    {"V", in.visual}, {"T", in.text}};
      def.forward = [](const Blocks& b) {
        const auto r = project_qkv<double>(b.at("V").col(0), b.at("T").col(0), proj_of(b));
        VecD out(r.q.size() * 3);
        out << r.q, r.k, r.v;
        return out;
      };
      def.backward = [](const Blocks& b, const VecD& g) {
        const Index d = b.at("W_q").rows();
        const VecD gq = g.segment(0, d), gk = g.segment(d, d), gv = g.segment(2 * d, d);
        const VecD v = b.at("V").col(0), t = b.at("T").col(0);
        return Blocks{{"W_q", gq * v.transpose()},
                      {"W_k", gk * t.transpose()},
                      {"W_v", gv * v.transpose()},
                      {"V", b.at("W_q").transpose() * gq + b.at("W_v").transpose() * gv},
                      {"T", b.at("W_k").transpose() * gk}};
      };
      break;
    case GradOp::tsa_attend_pooled:
      def.blocks = {{"W_q", p.proj.W_q}, {"W_k", p.proj.W_k}, {"W_v", p.proj.W_v},
                    {"tokens", in.tokens}, {"T", in.text}};
      def.forward = [](const Blocks& b) {
        return tsa_attend_pooled<double>(b.at("tokens"), b.at("T").col(0), proj_of(b));
      };
      def.backward = [](const Blocks& b, const VecD& g) {
        const auto r = tsa_attend_pooled_backward(b.at("tokens"), b.at("T").col(0), proj_of(b), g);
        return Blocks{{"W_q", r.W_q}, {"W_k", r.W_k}, {"W_v", r.W_v},
                      {"tokens", r.tokens}, {"T", r.text}};
      };
      break;
    case GradOp::fuse_add:
    case GradOp::fuse_concat: {
      const FuseMode mode = op == GradOp::fuse_add ? FuseMode::add : FuseMode::concat;
      def.blocks = {{"V_attn", in.attended}, {"W_t", p.W_t}, {"T", in.text}};
      def.forward = [mode](const Blocks& b) {
        return fuse<double>(b.at("V_attn").col(0), b.at("W_t") * b.at("T").col(0), mode).values;
      };
      def.backward = [mode](const Blocks& b, const VecD& g) {
        const Index d = b.at("V_attn").rows();
        const VecD ga = mode == FuseMode::add ? g : VecD(g.head(d));
        const VecD gt = mode == FuseMode::add ? g : VecD(g.tail(d));
        return Blocks{{"V_attn", ga},
                      {"W_t", gt * b.at("T").col(0).transpose()},
                      {"T", b.at("W_t").transpose() * gt}};
      };
      break;
    }
    case GradOp::prompt_pipeline: {
      if (!in.encoder) fail(ErrorCode::encoder_unavailable, "prompt_pipeline needs an encoder");
      const auto enc = in.encoder;
      def.blocks = {{"W_q", p.proj.W_q}, {"W_k", p.proj.W_k}, {"W_v", p.proj.W_v},
                    {"W_t", p.W_t},      {"P_V", p.prompt},    {"patches", in.patches},
                    {"T", in.text}};
      auto unpack = [](const Blocks& b) {
        SdmgParams<double> s;
        s.proj = proj_of(b);
        s.W_t = b.at("W_t");
        s.prompt = b.at("P_V").col(0);
        return s;
      };
      def.forward = [enc, unpack, pipeline_mode](const Blocks& b) {
        return sdmg_forward(unpack(b), b.at("patches"), b.at("T").col(0), *enc, pipeline_mode);
      };
      def.backward = [enc, unpack, pipeline_mode](const Blocks& b, const VecD& g) {
        const auto r =
            sdmg_backward(unpack(b), b.at("patches"), b.at("T").col(0), *enc, pipeline_mode, g);
        return Blocks{{"W_q", r.params.proj.W_q}, {"W_k", r.params.proj.W_k},
                      {"W_v", r.params.proj.W_v}, {"W_t", r.params.W_t},
                      {"P_V", r.params.prompt},   {"patches", r.patches},
                      {"T", r.text}};
      };
      break;
    }
  }
  return def;
}

double inf_norm(const MatD& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

GradCheckInputs make_gradcheck_inputs(const GradCheckConfig& config, std::uint64_t seed) {
  if (config.tokens < 1 || config.grid < 1) fail(ErrorCode::invalid_argument, "need M >= 1 and N >= 1");
  GradCheckInputs in;
  in.seed = seed;
  in.params = init_params({config.d_v, config.d_t, config.d}, seed);
  util::Rng rng(seed ^ 0xa5a5a5a5a5a5a5a5ULL);
  // The init P_V scale (0.02) is tiny; widen it so the check exercises the path.
  in.params.prompt = gaussian(rng, config.d_v, 1).col(0);
  in.visual = gaussian(rng, config.d_v, 1).col(0);
  in.text = gaussian(rng, config.d_t, 1).col(0);
  in.tokens = gaussian(rng, config.tokens, config.d_v);
  in.attended = gaussian(rng, config.d, 1).col(0);
  in.patches = gaussian(rng, static_cast<Index>(config.grid) * config.grid, config.d_v);
  in.encoder = std::make_shared<ToyTransformerEncoder>(config.d_v, config.encoder_layers,
                                                       seed ^ 0x5bd1e995ULL);
  if (config.saturate) {
    // Point token 0 along W_q^T k so its score exceeds the rest by the gap.
    const auto& pp = in.params.proj;
    const VecD dir = pp.W_q.transpose() * (pp.W_k * in.text);
    const double scale = std::sqrt(static_cast<double>(config.d));
    double others = -std::numeric_limits<double>::infinity();
    for (Index m = 1; m < in.tokens.rows(); ++m) {
      others = std::max(others, in.tokens.row(m).dot(dir) / scale);
    }
    if (in.tokens.rows() == 1) others = 0.0;
    const double target = others + config.saturation_gap;
    in.tokens.row(0) = (dir * (target * scale / dir.squaredNorm())).transpose();
  }
  return in;
}

GradCheckReport grad_check(GradOp op, const GradCheckInputs& inputs, double eps,
                           const GradCheckConfig& config) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) {
    fail(ErrorCode::invalid_argument, "eps must lie in [1e-7, 1e-3]");
  }
  OpDef def = define(op, inputs, config.pipeline_mode);
  const VecD out0 = def.forward(def.blocks);
  util::Rng rng(inputs.seed ^ 0x2545f4914f6cdd1dULL);
  VecD w(out0.size());
  for (Index i = 0; i < w.size(); ++i) w(i) = rng.normal();

  GradCheckReport report;
  report.op = op;
  report.eps = eps;
  const Blocks analytic = def.backward(def.blocks, w);
  Blocks work = def.blocks;
  for (auto& [name, block] : work) {
    const MatD& a = analytic.at(name);
    MatD numeric(block.rows(), block.cols());
    for (Index i = 0; i < block.size(); ++i) {
      double& x = block.data()[i];
      const double saved = x;
      x = saved + eps;
      const double lp = w.dot(def.forward(work));
      x = saved - eps;
      const double lm = w.dot(def.forward(work));
      x = saved;
      numeric.data()[i] = (lp - lm) / (2.0 * eps);
    }
    if (!a.allFinite() || !numeric.allFinite()) {
      fail(ErrorCode::non_finite_gradient, to_string(op) + ": non-finite gradient in " + name);
    }
    BlockError be;
    be.name = name;
    be.max_abs_error = inf_norm(a - numeric);
    be.analytic_norm = inf_norm(a);
    be.max_rel_error = be.max_abs_error / std::max({be.analytic_norm, inf_norm(numeric), 1e-8});
    report.max_rel_error = std::max(report.max_rel_error, be.max_rel_error);
    report.blocks.push_back(std::move(be));
  }

  if (op == GradOp::tsa_attend_pooled || op == GradOp::prompt_pipeline) {
    MatD tokens = inputs.tokens;
    if (op == GradOp::prompt_pipeline) {
      tokens = inputs.encoder->forward(
          build_visual_input(inputs.patches, inputs.params.prompt).stacked());
    }
    const auto att = tsa_attend_pooled_detail<double>(tokens, inputs.text, inputs.params.proj);
    report.max_attention_weight = att.weights.maxCoeff();
    if (att.scores.size() > 1) {
      std::vector<double> s(att.scores.data(), att.scores.data() + att.scores.size());
      std::partial_sort(s.begin(), s.begin() + 2, s.end(), std::greater<>());
      report.score_gap = s[0] - s[1];
    }
    report.saturated = report.max_attention_weight > 1.0 - 1e-6;
  }
  return report;
}

nlohmann::json to_json(const GradCheckReport& r) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : r.blocks) {
    blocks.push_back({{"name", b.name},
                      {"max_rel_error", b.max_rel_error},
                      {"max_abs_error", b.max_abs_error},
                      {"analytic_norm", b.analytic_norm}});
  }
  return {{"op", to_string(r.op)},
          {"eps", r.eps},
          {"max_rel_error", r.max_rel_error},
          {"max_attention_weight", r.max_attention_weight},
          {"score_gap", r.score_gap},
          {"saturated", r.saturated},
          {"blocks", blocks}};
}

}  // namespace stancegen::sdmg
