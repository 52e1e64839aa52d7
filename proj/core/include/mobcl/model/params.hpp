#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "mobcl/model/config.hpp"

namespace mobcl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Tensor {
  Matrix value;
  Matrix grad;

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

/// Named parameter tensors with gradients, in a stable registration order.
class ParamStore {
 public:
  Tensor& add(const std::string& name, Eigen::Index rows, Eigen::Index cols);
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const;

  const std::vector<std::string>& names() const { return order_; }
  std::size_t num_scalars() const;

  void zero_grads();
  /// Gaussian init (stddev 0.02) for weights, zeros for bias-like tensors,
  /// ones for layer-norm gains.
  void init(std::uint64_t seed);

 private:
  std::map<std::string, Tensor> tensors_;
  std::vector<std::string> order_;
};

}  // namespace mobcl
