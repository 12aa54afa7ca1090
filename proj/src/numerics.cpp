#include "slint/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace slint {

double silu(double x) {
    double s;
    if (x >= 0) {
        s = 1.0 / (1.0 + std::exp(-x));
    } else {
        double e = std::exp(x);
        s = e / (1.0 + e);
    }
    return x * s;
}

double cosine(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw SlintError("cosine: dimension mismatch");
    double nx = l2_norm(x);
    double ny = l2_norm(y);
    if (nx == 0.0 || ny == 0.0) throw SlintError("cosine: zero-norm input");
    double c = dot(x, y) / (nx * ny);
    return std::clamp(c, -1.0, 1.0);
}

std::vector<int> topk(std::span<const double> scores, int k, TopkOrder order) {
    if (scores.empty()) throw SlintError("topk: empty input");
    if (k < 1) throw SlintError("topk: k must be >= 1");
    std::vector<int> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    auto better = [&](int a, int b) {
        double sa = scores[static_cast<size_t>(a)];
        double sb = scores[static_cast<size_t>(b)];
        if (sa != sb) return order == TopkOrder::highest ? sa > sb : sa < sb;
        return a < b;
    };
    size_t take = std::min(static_cast<size_t>(k), scores.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<long>(take), idx.end(), better);
    idx.resize(take);
    return idx;
}

AttentionParams AttentionParams::random_init(int width, int heads, Rng& rng) {
    if (heads < 1 || width % heads != 0) throw SlintError("AttentionParams: width not divisible by heads");
    AttentionParams p;
    p.heads = heads;
    double std_dev = 1.0 / std::sqrt(static_cast<double>(width));
    for (Tensor2* w : {&p.w_query, &p.w_key, &p.w_value, &p.w_out}) {
        *w = Tensor2(width, width);
        for (double& e : w->data) e = normal(rng, 0.0, std_dev);
    }
    return p;
}

Tensor2 multi_head_attention(const Tensor2& seq, const AttentionParams& params) {
    if (seq.cols != params.width()) throw SlintError("multi_head_attention: seq width mismatch");
    ad::Tape tape;
    ad::Var x = tape.constant(seq);
    ad::Var out = ad::attention_graph(tape, x, tape.constant(params.w_query), tape.constant(params.w_key),
                                      tape.constant(params.w_value), tape.constant(params.w_out),
                                      params.heads, /*causal=*/false);
    return tape.value(out);
}

double grad_check(const std::function<double(std::span<const double>)>& f,
                  std::span<double> params, std::span<const double> analytic_grad, double eps) {
    if (params.size() != analytic_grad.size()) throw SlintError("grad_check: size mismatch");
    double worst = 0.0;
    for (size_t i = 0; i < params.size(); ++i) {
        double saved = params[i];
        params[i] = saved + eps;
        double fp = f(params);
        params[i] = saved - eps;
        double fm = f(params);
        params[i] = saved;
        double numeric = (fp - fm) / (2.0 * eps);
        double denom = std::max(1.0, std::abs(analytic_grad[i]));
        worst = std::max(worst, std::abs(numeric - analytic_grad[i]) / denom);
    }
    return worst;
}

}  // namespace slint
