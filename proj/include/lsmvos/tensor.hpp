#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace lsmvos {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& shape);
std::size_t shape_volume(const Shape& shape);

/// Dense float32 array of rank 1..4, row-major with the last axis fastest.
///
/// Feature maps use C×H×W, convolution kernels K×C×kh×kw. A default
/// constructed tensor is empty (rank 0) and only valid as a placeholder.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, float fill = 0.0f);
    Tensor(Shape shape, std::vector<float> data);

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape), 0.0f); }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    // C×H×W accessors; only meaningful for rank-3 tensors.
    std::size_t channels() const { return dim(0); }
    std::size_t height() const { return dim(1); }
    std::size_t width() const { return dim(2); }
    std::size_t plane() const { return dim(1) * dim(2); }

    std::span<float> data() noexcept { return data_; }
    std::span<const float> data() const noexcept { return data_; }
    float* ptr() noexcept { return data_.data(); }
    const float* ptr() const noexcept { return data_.data(); }

    float& operator[](std::size_t i) noexcept { return data_[i]; }
    float operator[](std::size_t i) const noexcept { return data_[i]; }

    float& at(std::size_t c, std::size_t h, std::size_t w) noexcept {
        return data_[(c * shape_[1] + h) * shape_[2] + w];
    }
    float at(std::size_t c, std::size_t h, std::size_t w) const noexcept {
        return data_[(c * shape_[1] + h) * shape_[2] + w];
    }

    /// Same data viewed under a new shape of equal volume.
    Tensor reshaped(Shape shape) const;

    /// Slice of channels [first, first + count) of a C×H×W tensor.
    Tensor channel_slice(std::size_t first, std::size_t count) const;

    bool all_finite() const noexcept;

    friend bool operator==(const Tensor& a, const Tensor& b) = default;

private:
    Shape shape_;
    std::vector<float> data_;
};

/// Throws ShapeError unless `t` has rank 3.
void require_chw(const Tensor& t, const char* what);

/// Throws ShapeError unless both tensors have identical shapes.
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

} // namespace lsmvos
