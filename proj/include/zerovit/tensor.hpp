#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace zerovit {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
// False if any value is inf or NaN.
bool all_finite(std::span<const double> values) noexcept;
std::string to_string(const Shape& shape);

/// Dense row-major array of doubles with an optional gradient slot of the
/// same length.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double value) { return Tensor({1}, value); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  bool has_grad() const noexcept { return !grad_.empty(); }
  // Allocates a zero gradient if none is present.
  std::span<double> grad();
  std::span<const double> grad() const noexcept { return grad_; }
  void clear_grad() { grad_.clear(); grad_.shrink_to_fit(); }

  // Reinterprets the shape; element count must match.
  void reshape(Shape shape);

  bool all_finite() const noexcept;

 private:
  Shape shape_;
  std::vector<double> data_;
  std::vector<double> grad_;
};

}  // namespace zerovit
