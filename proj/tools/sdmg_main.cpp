// SPDX-License-Identifier: Apache-2.0
// sdmg: parameter init, fusion of stored tensors, gradient checks.
#include <chrono>
#include <iostream>

#include "cli_common.hpp"
#include "stancegen/sdmg/fusion.hpp"
#include "stancegen/sdmg/gradcheck.hpp"
#include "stancegen/sdmg/tensor.hpp"

using namespace stancegen;
using namespace stancegen::sdmg;

namespace {

const Tensor& pick(const NamedTensors& t, const std::string& name, const std::string& file) {
  if (const auto it = t.find(name); it != t.end()) return it->second;
  if (t.size() == 1) return t.begin()->second;
  fail(ErrorCode::schema_error, file + " has no tensor named '" + name + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Task-sensitive attention fusion"};
  app.require_subcommand(1);

  std::string out;
  long d_v = 64, d_t = 64, d = 64;
  std::uint64_t seed = 7;
  auto* init = app.add_subcommand("init", "Write freshly initialized W_q, W_k, W_v, W_t, P_V");
  init->add_option("--out", out, "Checkpoint path")->required();
  init->add_option("--d-v", d_v, "Visual dim");
  init->add_option("--d-t", d_t, "Text dim");
  init->add_option("--d", d, "Projection dim");
  init->add_option("--seed", seed, "Seed");

  std::string params, visual, text, mode = "concat";
  bool literal = false;
  auto* fuse_cmd = app.add_subcommand("fuse", "Pooled attention over visual tokens, then fusion with W_t T");
  fuse_cmd->add_option("--params", params, "Checkpoint")->required()->check(CLI::ExistingFile);
  fuse_cmd->add_option("--visual", visual, "Tensor file with 'visual' (M x d_v)")->required()->check(CLI::ExistingFile);
  fuse_cmd->add_option("--text", text, "Tensor file with 'text' (d_t)")->required()->check(CLI::ExistingFile);
  fuse_cmd->add_option("--mode", mode, "concat | add")->check(CLI::IsMember({"concat", "add"}));
  fuse_cmd->add_flag("--literal", literal, "Single-token form on the first visual row");
  fuse_cmd->add_option("--out", out, "Write the fused vector as a tensor file");

  double eps = 1e-5;
  std::string op = "all";
  int seeds = 1;
  bool saturate = false;
  GradCheckConfig gc;
  auto* grad = app.add_subcommand("gradcheck", "Analytic vs central-difference gradients");
  grad->add_option("--eps", eps, "Finite-difference step")->check(CLI::Range(1e-7, 1e-3));
  grad->add_option("--op", op, "project_qkv | tsa_attend_pooled | fuse_add | fuse_concat | prompt_pipeline | all");
  grad->add_option("--seeds", seeds, "Number of seeds")->check(CLI::PositiveNumber);
  grad->add_option("--tokens", gc.tokens, "M for tsa_attend_pooled");
  grad->add_option("--dim", gc.d, "d = d_v = d_t")->each([&](const std::string&) { gc.d_v = gc.d_t = gc.d; });
  grad->add_option("--grid", gc.grid, "N for prompt_pipeline");
  grad->add_flag("--saturate", saturate, "Make one attention score dominate");

  return tools::run_app(app, argc, argv, [&]() -> int {
    if (*init) {
      save_tensors(out, to_tensors(init_params({d_v, d_t, d}, seed)));
    } else if (*fuse_cmd) {
      const auto p = params_from_tensors(load_tensors(params));
      const MatD tokens = pick(load_tensors(visual), "visual", visual).matrix();
      const MatD tm = pick(load_tensors(text), "text", text).matrix();
      const VecD t = tm.col(0);
      VecD attended;
      if (literal) {
        const auto qkv = project_qkv<double>(tokens.row(0).transpose(), t, p.proj);
        attended = tsa_attend_literal<double>(qkv.q, qkv.k, qkv.v);
      } else {
        attended = tsa_attend_pooled<double>(tokens, t, p.proj);
      }
      const auto fused = fuse<double>(attended, p.W_t * t, parse_fuse_mode(mode));
      if (!out.empty()) {
        save_tensors(out, {{"fused", Tensor::from(fused.values)}});
      } else {
        std::cout << nlohmann::json{{"mode", to_string(fused.mode)},
                                    {"fused", Tensor::from(fused.values).data}}.dump() << "\n";
      }
    } else if (*grad) {
      gc.saturate = saturate;
      std::vector<GradOp> ops = op == "all" ? all_grad_ops() : std::vector<GradOp>{parse_grad_op(op)};
      double worst = 0.0;
      const auto t0 = std::chrono::steady_clock::now();
      for (const GradOp o : ops) {
        double op_worst = 0.0;
        bool any_saturated = false;
        for (int s = 0; s < seeds; ++s) {
          const auto in = make_gradcheck_inputs(gc, static_cast<std::uint64_t>(s));
          const auto r = grad_check(o, in, eps, gc);
          op_worst = std::max(op_worst, r.max_rel_error);
          any_saturated = any_saturated || r.saturated;
          spdlog::debug("{}", to_json(r).dump());
        }
        worst = std::max(worst, op_worst);
        std::cout << to_string(o) << " max_rel_error=" << op_worst << (any_saturated ? " saturated" : "") << "\n";
      }
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::cout << "worst " << worst << " (" << secs << " s)\n";
      return worst < 1e-4 ? 0 : 1;
    }
    return 0;
  });
}
