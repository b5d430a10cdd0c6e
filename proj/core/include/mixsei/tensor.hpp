#pragma once

#include <cstddef>
#include <vector>

namespace mixsei::nn {

// Minimal dense row-major tensor in double precision. Used by the
// tensor-level op wrappers and everywhere exactness matters; the training
// fast path works on flat typed arrays instead.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> values;

  Tensor() = default;
  Tensor(std::vector<int> shape_, std::vector<double> values_);

  static Tensor zeros(std::vector<int> shape_);

  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const;
  std::size_t size() const { return values.size(); }

  double* data() { return values.data(); }
  const double* data() const { return values.data(); }
};

std::size_t shape_numel(const std::vector<int>& shape);

}  // namespace mixsei::nn
