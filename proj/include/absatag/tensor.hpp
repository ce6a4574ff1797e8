#ifndef ABSATAG_TENSOR_HPP
#define ABSATAG_TENSOR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace absatag {

// Dense row-major tensor of 64-bit floats. Rank 1 or 2 is all the
// architectures need; rank-1 tensors act as column vectors in matmul.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape_)
      : shape(std::move(shape_)), data(count(shape), 0.0) {}

  Tensor(std::vector<std::size_t> shape_, std::vector<double> data_)
      : shape(std::move(shape_)), data(std::move(data_)) {
    if (count(shape) != data.size())
      throw std::invalid_argument("tensor: shape/data size mismatch");
  }

  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  static Tensor zeros(std::vector<std::size_t> shape_) {
    return Tensor(std::move(shape_));
  }

  static Tensor one_hot(std::size_t n, std::size_t index) {
    Tensor t({n});
    t.data.at(index) = 1.0;
    return t;
  }

  std::size_t size() const { return data.size(); }
  bool is_scalar() const { return data.size() == 1; }

  std::size_t rank() const { return shape.size(); }
  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return rank() < 2 ? 1 : shape[1]; }

  double& at(std::size_t i) { return data[i]; }
  double at(std::size_t i) const { return data[i]; }
  double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  void fill(double v) { std::fill(data.begin(), data.end(), v); }

  bool all_finite() const;

  std::string shape_str() const;

  static std::size_t count(const std::vector<std::size_t>& shape);

  std::vector<std::size_t> shape;
  std::vector<double> data;
};

// Named trainable tensor with its gradient accumulator.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string name_, Tensor value_)
      : name(std::move(name_)), value(std::move(value_)),
        grad(Tensor::zeros(value.shape)) {}

  void zero_grad() { grad.fill(0.0); }
};

}  // namespace absatag

#endif
