#pragma once
// Dense row-major 2-D tensor of doubles. All training math is 64-bit.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace slint {

struct Tensor2 {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;  // row-major, rows*cols entries

    Tensor2() = default;
    Tensor2(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}
    Tensor2(int r, int c, std::vector<double> d);

    static Tensor2 zeros(int r, int c) { return Tensor2(r, c); }
    static Tensor2 row(std::span<const double> v);

    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    std::span<double> row_span(int r) { return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)}; }
    std::span<const double> row_span(int r) const { return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)}; }

    size_t size() const { return data.size(); }
    bool same_shape(const Tensor2& o) const { return rows == o.rows && cols == o.cols; }
    bool all_finite() const;
};

// Plain (non-autodiff) kernels shared by TransE training, autodiff backward
// passes and oracle tests.
Tensor2 matmul(const Tensor2& a, const Tensor2& b);
Tensor2 matmul_nt(const Tensor2& a, const Tensor2& b);  // a * b^T
Tensor2 matmul_tn(const Tensor2& a, const Tensor2& b);  // a^T * b
Tensor2 transpose(const Tensor2& a);
Tensor2 add(const Tensor2& a, const Tensor2& b);
Tensor2 sub(const Tensor2& a, const Tensor2& b);
Tensor2 hadamard(const Tensor2& a, const Tensor2& b);
Tensor2 scale(const Tensor2& a, double c);
void add_in_place(Tensor2& a, const Tensor2& b);
void axpy_in_place(Tensor2& a, double c, const Tensor2& b);  // a += c*b

double dot(std::span<const double> x, std::span<const double> y);
double l2_norm(std::span<const double> x);

}  // namespace slint
