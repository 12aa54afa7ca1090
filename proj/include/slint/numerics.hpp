#pragma once
// Shared differentiable kernels and the finite-difference gradient harness.

#include <functional>
#include <span>
#include <vector>

#include "slint/autodiff.hpp"
#include "slint/tensor.hpp"
#include "slint/util.hpp"

namespace slint {

double silu(double x);

// cos(x, y) in [-1, 1]; throws on a zero-norm input.
double cosine(std::span<const double> x, std::span<const double> y);

enum class TopkOrder { highest, lowest };

// Indices of the k extreme values, ties broken by ascending index.
// k > size returns all indices; empty input throws.
std::vector<int> topk(std::span<const double> scores, int k, TopkOrder order);

struct AttentionParams {
    int heads = 1;
    Tensor2 w_query, w_key, w_value, w_out;  // all width x width

    static AttentionParams random_init(int width, int heads, Rng& rng);
    int width() const { return w_query.rows; }
};

// Scaled dot-product self-attention over the whole sequence (no mask,
// no positional encoding). seq is L x width.
Tensor2 multi_head_attention(const Tensor2& seq, const AttentionParams& params);

// Max over coordinates of |central difference - analytic| / max(1, |analytic|).
// f must be deterministic; params are restored on exit.
double grad_check(const std::function<double(std::span<const double>)>& f,
                  std::span<double> params, std::span<const double> analytic_grad, double eps);

}  // namespace slint
