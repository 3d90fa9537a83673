#include "edgeoff/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "edgeoff/common/error.hpp"

namespace edgeoff::nn {
namespace {

std::string shape_of(const Tensor2& t) { return std::to_string(t.rows()) + "x" + std::to_string(t.cols()); }

}  // namespace

Tensor2::Tensor2(std::size_t rows, std::size_t cols, double fill) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Tensor2 Tensor2::from(std::size_t rows, std::size_t cols, std::vector<double> data) {
    if (data.size() != rows * cols) {
        throw ShapeError("Tensor2::from: " + std::to_string(data.size()) + " values for a " + std::to_string(rows) +
                         "x" + std::to_string(cols) + " tensor");
    }
    Tensor2 t;
    t.rows_ = rows;
    t.cols_ = cols;
    t.data_ = std::move(data);
    return t;
}

void Tensor2::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void require_same_shape(const Tensor2& a, const Tensor2& b, std::string_view what) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(what) + ": shape " + shape_of(a) + " vs " + shape_of(b));
    }
}

bool all_finite(const Tensor2& t) noexcept {
    return std::all_of(t.values().begin(), t.values().end(), [](double v) { return std::isfinite(v); });
}

void require_finite(const Tensor2& t, std::string_view what) {
    if (!all_finite(t)) throw NumericalError(std::string(what) + ": non-finite value");
}

Tensor2 matmul(const Tensor2& a, const Tensor2& b) {
    if (a.cols() != b.rows()) throw ShapeError("matmul: lhs " + shape_of(a) + " rhs " + shape_of(b));
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    Tensor2 out(n, m);
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    for (std::size_t i = 0; i < n; ++i) {
        double* orow = po + i * m;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = pa[i * k + p];
            if (av == 0.0) continue;
            const double* brow = pb + p * m;
            for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
        }
    }
    return out;
}

Tensor2 matmul_nt(const Tensor2& a, const Tensor2& b) {
    if (a.cols() != b.cols()) throw ShapeError("matmul_nt: lhs " + shape_of(a) + " rhs " + shape_of(b));
    const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
    Tensor2 out(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        const double* arow = a.data() + i * k;
        for (std::size_t j = 0; j < m; ++j) {
            const double* brow = b.data() + j * k;
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
            out(i, j) = acc;
        }
    }
    return out;
}

void matmul_tn_acc(const Tensor2& a, const Tensor2& b, Tensor2& out) {
    if (a.rows() != b.rows() || out.rows() != a.cols() || out.cols() != b.cols()) {
        throw ShapeError("matmul_tn: lhs " + shape_of(a) + " rhs " + shape_of(b) + " out " + shape_of(out));
    }
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    double* po = out.data();
    for (std::size_t r = 0; r < n; ++r) {
        const double* arow = a.data() + r * k;
        const double* brow = b.data() + r * m;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            if (av == 0.0) continue;
            double* orow = po + p * m;
            for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
        }
    }
}

Tensor2 hconcat(const Tensor2& a, const Tensor2& b) {
    if (a.rows() != b.rows()) throw ShapeError("hconcat: lhs " + shape_of(a) + " rhs " + shape_of(b));
    Tensor2 out(a.rows(), a.cols() + b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        std::copy(a.row(r).begin(), a.row(r).end(), out.row(r).begin());
        std::copy(b.row(r).begin(), b.row(r).end(), out.row(r).begin() + static_cast<std::ptrdiff_t>(a.cols()));
    }
    return out;
}

Tensor2 slice_cols(const Tensor2& t, std::size_t begin, std::size_t count) {
    if (begin + count > t.cols()) throw ShapeError("slice_cols: range past " + shape_of(t));
    Tensor2 out(t.rows(), count);
    for (std::size_t r = 0; r < t.rows(); ++r) {
        for (std::size_t c = 0; c < count; ++c) out(r, c) = t(r, begin + c);
    }
    return out;
}

void add_into_cols(Tensor2& dst, const Tensor2& src, std::size_t begin) {
    if (dst.rows() != src.rows() || begin + src.cols() > dst.cols()) {
        throw ShapeError("add_into_cols: dst " + shape_of(dst) + " src " + shape_of(src));
    }
    for (std::size_t r = 0; r < src.rows(); ++r) {
        for (std::size_t c = 0; c < src.cols(); ++c) dst(r, begin + c) += src(r, c);
    }
}

Tensor2 hadamard(const Tensor2& a, const Tensor2& b) {
    require_same_shape(a, b, "hadamard");
    Tensor2 out = a;
    for (std::size_t k = 0; k < out.size(); ++k) out.data()[k] *= b.data()[k];
    return out;
}

void add_inplace(Tensor2& dst, const Tensor2& src) {
    require_same_shape(dst, src, "add_inplace");
    for (std::size_t k = 0; k < dst.size(); ++k) dst.data()[k] += src.data()[k];
}

void scale_inplace(Tensor2& t, double s) {
    for (auto& v : t.values()) v *= s;
}

}  // namespace edgeoff::nn
