#include "slint/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace slint {

Tensor2::Tensor2(int r, int c, std::vector<double> d) : rows(r), cols(c), data(std::move(d)) {
    if (data.size() != static_cast<size_t>(r) * c) {
        throw std::invalid_argument("Tensor2: data size does not match rows*cols");
    }
}

Tensor2 Tensor2::row(std::span<const double> v) {
    Tensor2 t(1, static_cast<int>(v.size()));
    std::copy(v.begin(), v.end(), t.data.begin());
    return t;
}

bool Tensor2::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

static void require_shape(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("tensor shape mismatch in ") + what);
}

Tensor2 matmul(const Tensor2& a, const Tensor2& b) {
    require_shape(a.cols == b.rows, "matmul");
    Tensor2 out(a.rows, b.cols);
    // ikj order keeps the b row contiguous in the inner loop
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = a.data.data() + static_cast<size_t>(i) * a.cols;
        double* orow = out.data.data() + static_cast<size_t>(i) * out.cols;
        for (int k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b.data.data() + static_cast<size_t>(k) * b.cols;
            for (int j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

Tensor2 matmul_nt(const Tensor2& a, const Tensor2& b) {
    require_shape(a.cols == b.cols, "matmul_nt");
    Tensor2 out(a.rows, b.rows);
    for (int i = 0; i < a.rows; ++i) {
        for (int j = 0; j < b.rows; ++j) {
            out.at(i, j) = dot(a.row_span(i), b.row_span(j));
        }
    }
    return out;
}

Tensor2 matmul_tn(const Tensor2& a, const Tensor2& b) {
    require_shape(a.rows == b.rows, "matmul_tn");
    Tensor2 out(a.cols, b.cols);
    for (int k = 0; k < a.rows; ++k) {
        const double* arow = a.data.data() + static_cast<size_t>(k) * a.cols;
        const double* brow = b.data.data() + static_cast<size_t>(k) * b.cols;
        for (int i = 0; i < a.cols; ++i) {
            const double aki = arow[i];
            if (aki == 0.0) continue;
            double* orow = out.data.data() + static_cast<size_t>(i) * out.cols;
            for (int j = 0; j < b.cols; ++j) orow[j] += aki * brow[j];
        }
    }
    return out;
}

Tensor2 transpose(const Tensor2& a) {
    Tensor2 out(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) out.at(j, i) = a.at(i, j);
    return out;
}

Tensor2 add(const Tensor2& a, const Tensor2& b) {
    require_shape(a.same_shape(b), "add");
    Tensor2 out = a;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
    return out;
}

Tensor2 sub(const Tensor2& a, const Tensor2& b) {
    require_shape(a.same_shape(b), "sub");
    Tensor2 out = a;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.data[i];
    return out;
}

Tensor2 hadamard(const Tensor2& a, const Tensor2& b) {
    require_shape(a.same_shape(b), "hadamard");
    Tensor2 out = a;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b.data[i];
    return out;
}

Tensor2 scale(const Tensor2& a, double c) {
    Tensor2 out = a;
    for (double& v : out.data) v *= c;
    return out;
}

void add_in_place(Tensor2& a, const Tensor2& b) {
    require_shape(a.same_shape(b), "add_in_place");
    for (size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

void axpy_in_place(Tensor2& a, double c, const Tensor2& b) {
    require_shape(a.same_shape(b), "axpy_in_place");
    for (size_t i = 0; i < a.data.size(); ++i) a.data[i] += c * b.data[i];
}

double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double l2_norm(std::span<const double> x) {
    return std::sqrt(dot(x, x));
}

}  // namespace slint
