#include "mobcl/model/params.hpp"

#include <random>
#include <stdexcept>

namespace mobcl {

Tensor& ParamStore::add(const std::string& name, Eigen::Index rows,
                        Eigen::Index cols) {
  auto [it, inserted] = tensors_.try_emplace(name);
  if (!inserted) throw std::logic_error("duplicate parameter " + name);
  order_.push_back(name);
  it->second.value.setZero(rows, cols);
  it->second.grad.setZero(rows, cols);
  return it->second;
}

Tensor& ParamStore::at(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end())
    throw std::out_of_range("unknown parameter " + name);
  return it->second;
}

const Tensor& ParamStore::at(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end())
    throw std::out_of_range("unknown parameter " + name);
  return it->second;
}

bool ParamStore::contains(const std::string& name) const {
  return tensors_.contains(name);
}

std::size_t ParamStore::num_scalars() const {
  std::size_t n = 0;
  for (const auto& name : order_) n += at(name).value.size();
  return n;
}

void ParamStore::zero_grads() {
  for (const auto& name : order_) at(name).zero_grad();
}

void ParamStore::init(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 0.02);
  for (const auto& name : order_) {
    Tensor& t = at(name);
    bool is_bias = name.ends_with(".b") || name.ends_with(".b1") ||
                   name.ends_with(".b2") || name.ends_with(".bq") ||
                   name.ends_with(".bk") || name.ends_with(".bv") ||
                   name.ends_with(".bo");
    bool is_gain = name.ends_with(".g");
    if (is_gain) {
      t.value.setOnes();
    } else if (is_bias) {
      t.value.setZero();
    } else {
      for (Eigen::Index i = 0; i < t.value.rows(); ++i)
        for (Eigen::Index j = 0; j < t.value.cols(); ++j)
          t.value(i, j) = dist(rng);
    }
    t.zero_grad();
  }
}

}  // namespace mobcl
