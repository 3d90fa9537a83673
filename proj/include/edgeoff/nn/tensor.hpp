/**
 * @file tensor.hpp
 * @brief Row-major double matrix and the handful of products the networks need.
 */
#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace edgeoff::nn {

class Tensor2 {
public:
    Tensor2() = default;
    Tensor2(std::size_t rows, std::size_t cols, double fill = 0.0);
    /// Throws ShapeError when `data.size() != rows * cols`.
    static Tensor2 from(std::size_t rows, std::size_t cols, std::vector<double> data);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }
    std::vector<double>& values() noexcept { return data_; }
    const std::vector<double>& values() const noexcept { return data_; }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    void fill(double v);
    bool same_shape(const Tensor2& other) const noexcept { return rows_ == other.rows_ && cols_ == other.cols_; }

    friend bool operator==(const Tensor2&, const Tensor2&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Throws ShapeError naming both operands unless the shapes agree.
void require_same_shape(const Tensor2& a, const Tensor2& b, std::string_view what);
/// Throws NumericalError if any entry is NaN or infinite.
void require_finite(const Tensor2& t, std::string_view what);
bool all_finite(const Tensor2& t) noexcept;

/// a (n x k) * b (k x m).
Tensor2 matmul(const Tensor2& a, const Tensor2& b);
/// a (n x k) * b^T, b is (m x k).
Tensor2 matmul_nt(const Tensor2& a, const Tensor2& b);
/// out += a^T * b, a is (n x k), b is (n x m), out is (k x m).
void matmul_tn_acc(const Tensor2& a, const Tensor2& b, Tensor2& out);

Tensor2 hconcat(const Tensor2& a, const Tensor2& b);
/// Columns [begin, begin + count).
Tensor2 slice_cols(const Tensor2& t, std::size_t begin, std::size_t count);
/// dst[:, begin:begin+src.cols] += src.
void add_into_cols(Tensor2& dst, const Tensor2& src, std::size_t begin);

Tensor2 hadamard(const Tensor2& a, const Tensor2& b);
void add_inplace(Tensor2& dst, const Tensor2& src);
void scale_inplace(Tensor2& t, double s);

}  // namespace edgeoff::nn
