// SPDX-License-Identifier: Apache-2.0
#include "stancegen/sdmg/fusion.hpp"

#include "stancegen/util/rng.hpp"

namespace stancegen::sdmg {

std::string to_string(FuseMode m) { return m == FuseMode::add ? "add" : "concat"; }

FuseMode parse_fuse_mode(const std::string& s) {
  if (s == "concat" || s == "CONCAT") return FuseMode::concat;
  if (s == "add" || s == "ADD") return FuseMode::add;
  fail(ErrorCode::invalid_argument, "fuse mode must be concat or add, got '" + s + "'");
}

namespace {
MatD uniform_fan_in(util::Rng& rng, Index rows, Index cols) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  MatD m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(-bound, bound);
  return m;
}
}  // namespace

SdmgParams<double> init_params(const SdmgDims& dims, std::uint64_t seed) {
  if (dims.d_v <= 0 || dims.d_t <= 0 || dims.d <= 0) {
    fail(ErrorCode::invalid_argument, "dims must be positive");
  }
  util::Rng rng(seed);
  SdmgParams<double> p;
  p.proj.W_q = uniform_fan_in(rng, dims.d, dims.d_v);
  p.proj.W_k = uniform_fan_in(rng, dims.d, dims.d_t);
  p.proj.W_v = uniform_fan_in(rng, dims.d, dims.d_v);
  p.W_t = uniform_fan_in(rng, dims.d, dims.d_t);
  p.prompt.resize(dims.d_v);
  for (Index i = 0; i < dims.d_v; ++i) p.prompt(i) = rng.normal(0.0, 0.02);
  return p;
}

NamedTensors to_tensors(const SdmgParams<double>& p) {
  return {{"W_q", Tensor::from(p.proj.W_q)},
          {"W_k", Tensor::from(p.proj.W_k)},
          {"W_v", Tensor::from(p.proj.W_v)},
          {"W_t", Tensor::from(p.W_t)},
          {"P_V", Tensor::from(p.prompt)}};
}

SdmgParams<double> params_from_tensors(const NamedTensors& t) {
  auto get = [&](const char* name) -> const Tensor& {
    const auto it = t.find(name);
    if (it == t.end()) fail(ErrorCode::schema_error, std::string("checkpoint lacks ") + name);
    return it->second;
  };
  SdmgParams<double> p;
  p.proj.W_q = get("W_q").matrix();
  p.proj.W_k = get("W_k").matrix();
  p.proj.W_v = get("W_v").matrix();
  p.W_t = get("W_t").matrix();
  p.prompt = get("P_V").vector();
  p.validate();
  return p;
}

}  // namespace stancegen::sdmg
