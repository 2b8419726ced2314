// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace stancegen::sdmg {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

using MatD = Mat<double>;
using VecD = Vec<double>;
using Index = Eigen::Index;

/// Shape plus flat row-major values. Rank 1 or 2.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  static Tensor from(const MatD& m);
  static Tensor from(const VecD& v);
  MatD matrix() const;  // rank-1 tensors become a single column
  VecD vector() const;  // rank-2 tensors must have one column
};

using NamedTensors = std::map<std::string, Tensor>;

/// Text container:
///   {"format": "stancegen-tensors", "version": 1,
///    "manifest": {name: shape}, "tensors": {name: [row-major values]}}
void save_tensors(const std::filesystem::path& path, const NamedTensors& tensors);
NamedTensors load_tensors(const std::filesystem::path& path);

}  // namespace stancegen::sdmg
