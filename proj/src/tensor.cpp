#include "zerovit/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "zerovit/error.hpp"

namespace zerovit {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(numel(shape_), fill) {
  if (std::any_of(shape_.begin(), shape_.end(), [](std::size_t d) { return d == 0; })) {
    throw Error(ErrorKind::kShape, "tensor shape " + to_string(shape_) + " has a zero extent");
  }
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (numel(shape_) != data_.size()) {
    throw Error(ErrorKind::kShape, "tensor shape " + to_string(shape_) + " does not match " +
                                       std::to_string(data_.size()) + " elements");
  }
}

std::span<double> Tensor::grad() {
  if (grad_.empty()) grad_.assign(data_.size(), 0.0);
  return grad_;
}

void Tensor::reshape(Shape shape) {
  if (numel(shape) != data_.size()) {
    throw Error(ErrorKind::kShape,
                "reshape " + to_string(shape_) + " -> " + to_string(shape) + " changes size");
  }
  shape_ = std::move(shape);
}

bool all_finite(std::span<const double> values) noexcept {
  // Exponent bits all set means inf or NaN. Branch-free so it vectorizes.
  constexpr std::uint64_t kExponent = 0x7ff0000000000000ULL;
  std::uint64_t bad = 0;
  for (double v : values) bad |= (std::bit_cast<std::uint64_t>(v) & kExponent) == kExponent;
  return bad == 0;
}

bool Tensor::all_finite() const noexcept { return zerovit::all_finite(data_); }

}  // namespace zerovit
