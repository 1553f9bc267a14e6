#include "lsmvos/tensor.hpp"

#include "lsmvos/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

namespace lsmvos {

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << "x";
        os << shape[i];
    }
    os << ']';
    return os.str();
}

std::size_t shape_volume(const Shape& shape) {
    std::size_t v = 1;
    for (auto e : shape) v *= e;
    return v;
}

namespace {

void validate_shape(const Shape& shape) {
    if (shape.empty() || shape.size() > 4)
        throw ShapeError("tensor rank must be 1..4, got shape " + shape_str(shape));
    for (auto e : shape)
        if (e == 0) throw ShapeError("tensor extents must be >= 1, got " + shape_str(shape));
}

} // namespace

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape)) {
    validate_shape(shape_);
    data_.assign(shape_volume(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
    validate_shape(shape_);
    if (data_.size() != shape_volume(shape_))
        throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " +
                         shape_str(shape_));
}

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= shape_.size())
        throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " + shape_str(shape_));
    return shape_[axis];
}

Tensor Tensor::reshaped(Shape shape) const {
    if (shape_volume(shape) != data_.size())
        throw ShapeError("cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
    return Tensor(std::move(shape), data_);
}

Tensor Tensor::channel_slice(std::size_t first, std::size_t count) const {
    require_chw(*this, "channel_slice");
    if (count == 0 || first + count > channels())
        throw ShapeError("channel slice [" + std::to_string(first) + ", " + std::to_string(first + count) +
                         ") out of range for " + shape_str(shape_));
    const std::size_t p = plane();
    std::vector<float> out(data_.begin() + static_cast<std::ptrdiff_t>(first * p),
                           data_.begin() + static_cast<std::ptrdiff_t>((first + count) * p));
    return Tensor({count, height(), width()}, std::move(out));
}

bool Tensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

void require_chw(const Tensor& t, const char* what) {
    if (t.rank() != 3)
        throw ShapeError(std::string(what) + ": expected a C×H×W tensor, got shape " + shape_str(t.shape()));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(what) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
}

} // namespace lsmvos
