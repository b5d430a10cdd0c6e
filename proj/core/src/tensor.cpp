#include "mixsei/tensor.hpp"

#include <stdexcept>
#include <string>

namespace mixsei::nn {

std::size_t shape_numel(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw std::invalid_argument("tensor shape: dimensions must be positive");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

Tensor::Tensor(std::vector<int> shape_, std::vector<double> values_)
    : shape(std::move(shape_)), values(std::move(values_)) {
  if (shape_numel(shape) != values.size()) {
    throw std::invalid_argument("tensor: value count does not match shape");
  }
}

Tensor Tensor::zeros(std::vector<int> shape_) {
  std::size_t n = shape_numel(shape_);
  Tensor t;
  t.shape = std::move(shape_);
  t.values.assign(n, 0.0);
  return t;
}

int Tensor::dim(int i) const {
  if (i < 0 || i >= rank()) throw std::out_of_range("tensor dim index " + std::to_string(i));
  return shape[static_cast<std::size_t>(i)];
}

}  // namespace mixsei::nn
