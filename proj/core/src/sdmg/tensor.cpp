// SPDX-License-Identifier: Apache-2.0
#include "stancegen/sdmg/tensor.hpp"

#include <numeric>

#include <nlohmann/json.hpp>

#include "stancegen/error.hpp"
#include "stancegen/util/jsonl.hpp"

namespace stancegen::sdmg {

namespace {
constexpr const char* tensor_format = "stancegen-tensors";

std::size_t element_count(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}
}  // namespace

Tensor Tensor::from(const MatD& m) {
  Tensor t;
  t.shape = {static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())};
  t.data.reserve(m.size());
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) t.data.push_back(m(r, c));
  return t;
}

Tensor Tensor::from(const VecD& v) {
  Tensor t;
  t.shape = {static_cast<std::size_t>(v.size())};
  t.data.assign(v.data(), v.data() + v.size());
  return t;
}

MatD Tensor::matrix() const {
  if (shape.empty() || shape.size() > 2) fail(ErrorCode::dimension_mismatch, "tensor rank must be 1 or 2");
  const Index rows = static_cast<Index>(shape[0]);
  const Index cols = shape.size() == 2 ? static_cast<Index>(shape[1]) : 1;
  MatD m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(r * cols + c)];
  return m;
}

VecD Tensor::vector() const {
  if (shape.size() == 2 && shape[1] != 1) {
    fail(ErrorCode::dimension_mismatch, "expected a vector, got a matrix");
  }
  MatD m = matrix();
  return m.col(0);
}

void save_tensors(const std::filesystem::path& path, const NamedTensors& tensors) {
  nlohmann::json manifest = nlohmann::json::object();
  nlohmann::json values = nlohmann::json::object();
  for (const auto& [name, t] : tensors) {
    if (element_count(t.shape) != t.data.size()) {
      fail(ErrorCode::dimension_mismatch, "tensor " + name + " data does not match its shape");
    }
    manifest[name] = t.shape;
    values[name] = t.data;
  }
  util::write_json(path, {{"format", tensor_format},
                          {"version", 1},
                          {"manifest", manifest},
                          {"tensors", values}});
}

NamedTensors load_tensors(const std::filesystem::path& path) {
  const nlohmann::json j = util::read_json(path);
  if (j.value("format", "") != tensor_format || j.value("version", 0) != 1) {
    fail(ErrorCode::schema_error, path.string() + ": not a stancegen-tensors v1 file");
  }
  NamedTensors out;
  try {
    for (const auto& [name, shape] : j.at("manifest").items()) {
      Tensor t;
      t.shape = shape.get<std::vector<std::size_t>>();
      t.data = j.at("tensors").at(name).get<std::vector<double>>();
      if (t.shape.empty() || t.shape.size() > 2 || element_count(t.shape) != t.data.size()) {
        fail(ErrorCode::schema_error, path.string() + ": tensor " + name + " has a bad shape");
      }
      out.emplace(name, std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::schema_error, path.string() + ": " + e.what());
  }
  return out;
}

}  // namespace stancegen::sdmg
