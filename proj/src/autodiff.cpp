#include "slint/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace slint::ad {

namespace {

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

// log(sigmoid(x)) = -softplus(-x), stable in both tails
double log_sigmoid_scalar(double x) {
    if (x >= 0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

void softmax_span(std::span<const double> in, std::span<double> out) {
    double mx = in[0];
    for (double v : in) mx = std::max(mx, v);
    double sum = 0.0;
    for (size_t i = 0; i < in.size(); ++i) {
        out[i] = std::exp(in[i] - mx);
        sum += out[i];
    }
    double inv = 1.0 / sum;
    for (size_t i = 0; i < in.size(); ++i) out[i] *= inv;
}

}  // namespace

Var Tape::push(Tensor2 value, bool needs_grad, std::function<void(Tape&)> backprop) {
    if (ran_backward_) throw SlintError("Tape: cannot extend a tape after backward()");
    Node n;
    n.value = std::move(value);
    n.needs_grad = needs_grad;
    n.backprop = std::move(backprop);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Tensor2& Tape::grad_buf(Var v) {
    Node& n = node(v);
    if (n.grad.rows == 0 && n.grad.cols == 0) n.grad = Tensor2(n.value.rows, n.value.cols);
    return n.grad;
}

const Tensor2& Tape::grad(Var v) const {
    const Node& n = nodes_[static_cast<size_t>(v.id)];
    if (n.grad.rows == 0 && n.grad.cols == 0) {
        throw SlintError("Tape::grad: gradient not populated (run backward, node must need grad)");
    }
    return n.grad;
}

Var Tape::leaf(Tensor2 value, bool requires_grad) {
    return push(std::move(value), requires_grad, {});
}

Var Tape::add(Var a, Var b) {
    Tensor2 out = slint::add(value(a), value(b));
    Var v = push(std::move(out), needs_grad(a) || needs_grad(b), {});
    node(v).backprop = [a, b, v](Tape& t) {
        const Tensor2& g = t.grad_buf(v);
        if (t.needs_grad(a)) add_in_place(t.grad_buf(a), g);
        if (t.needs_grad(b)) add_in_place(t.grad_buf(b), g);
    };
    return v;
}

Var Tape::sub(Var a, Var b) {
    Tensor2 out = slint::sub(value(a), value(b));
    Var v = push(std::move(out), needs_grad(a) || needs_grad(b), {});
    node(v).backprop = [a, b, v](Tape& t) {
        const Tensor2& g = t.grad_buf(v);
        if (t.needs_grad(a)) add_in_place(t.grad_buf(a), g);
        if (t.needs_grad(b)) axpy_in_place(t.grad_buf(b), -1.0, g);
    };
    return v;
}

Var Tape::hadamard(Var a, Var b) {
    Tensor2 out = slint::hadamard(value(a), value(b));
    Var v = push(std::move(out), needs_grad(a) || needs_grad(b), {});
    node(v).backprop = [a, b, v](Tape& t) {
        const Tensor2& g = t.grad_buf(v);
        if (t.needs_grad(a)) add_in_place(t.grad_buf(a), slint::hadamard(g, t.value(b)));
        if (t.needs_grad(b)) add_in_place(t.grad_buf(b), slint::hadamard(g, t.value(a)));
    };
    return v;
}

Var Tape::scale(Var a, double c) {
    Tensor2 out = slint::scale(value(a), c);
    Var v = push(std::move(out), needs_grad(a), {});
    node(v).backprop = [a, c, v](Tape& t) {
        if (t.needs_grad(a)) axpy_in_place(t.grad_buf(a), c, t.grad_buf(v));
    };
    return v;
}

Var Tape::silu(Var a) {
    const Tensor2& x = value(a);
    Tensor2 out = x;
    for (double& e : out.data) e = e * sigmoid(e);
    Var v = push(std::move(out), needs_grad(a), {});
    node(v).backprop = [a, v](Tape& t) {
        if (!t.needs_grad(a)) return;
        const Tensor2& x = t.value(a);
        const Tensor2& g = t.grad_buf(v);
        Tensor2& da = t.grad_buf(a);
        for (size_t i = 0; i < x.data.size(); ++i) {
            double s = sigmoid(x.data[i]);
            da.data[i] += g.data[i] * (s + x.data[i] * s * (1.0 - s));
        }
    };
    return v;
}

Var Tape::log_sigmoid(Var a) {
    const Tensor2& x = value(a);
    Tensor2 out = x;
    for (double& e : out.data) e = log_sigmoid_scalar(e);
    Var v = push(std::move(out), needs_grad(a), {});
    node(v).backprop = [a, v](Tape& t) {
        if (!t.needs_grad(a)) return;
        const Tensor2& x = t.value(a);
        const Tensor2& g = t.grad_buf(v);
        Tensor2& da = t.grad_buf(a);
        for (size_t i = 0; i < x.data.size(); ++i) {
            da.data[i] += g.data[i] * sigmoid(-x.data[i]);
        }
    };
    return v;
}

Var Tape::dropout(Var a, double p, Rng& rng) {
    if (p < 0.0 || p >= 1.0) throw SlintError("dropout: p must be in [0,1)");
    const Tensor2& x = value(a);
    auto mask = std::make_shared<std::vector<double>>(x.data.size());
    double keep_scale = 1.0 / (1.0 - p);
    for (double& m : *mask) m = (uniform_real(rng, 0.0, 1.0) < p) ? 0.0 : keep_scale;
    Tensor2 out = x;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= (*mask)[i];
    Var v = push(std::move(out), needs_grad(a), {});
    node(v).backprop = [a, v, mask](Tape& t) {
        if (!t.needs_grad(a)) return;
        const Tensor2& g = t.grad_buf(v);
        Tensor2& da = t.grad_buf(a);
        for (size_t i = 0; i < da.data.size(); ++i) da.data[i] += g.data[i] * (*mask)[i];
    };
    return v;
}

Var Tape::matmul(Var a, Var b) {
    Tensor2 out = slint::matmul(value(a), value(b));
    Var v = push(std::move(out), needs_grad(a) || needs_grad(b), {});
    node(v).backprop = [a, b, v](Tape& t) {
        const Tensor2& g = t.grad_buf(v);
        if (t.needs_grad(a)) add_in_place(t.grad_buf(a), slint::matmul_nt(g, t.value(b)));
        if (t.needs_grad(b)) add_in_place(t.grad_buf(b), slint::matmul_tn(t.value(a), g));
    };
    return v;
}

Var Tape::matmul_nt(Var a, Var b) {
    Tensor2 out = slint::matmul_nt(value(a), value(b));
    Var v = push(std::move(out), needs_grad(a) || needs_grad(b), {});
    node(v).backprop = [a, b, v](Tape& t) {
        const Tensor2& g = t.grad_buf(v);
        if (t.needs_grad(a)) add_in_place(t.grad_buf(a), slint::matmul(g, t.value(b)));
        if (t.needs_grad(b)) add_in_place(t.grad_buf(b), slint::matmul_tn(g, t.value(a)));
    };
    return v;
}

Var Tape::softmax_rows(Var a, bool causal) {
    const Tensor2& x = value(a);
    if (causal && x.rows > x.cols) throw SlintError("softmax_rows: causal mask needs cols >= rows");
    Tensor2 out(x.rows, x.cols);
    for (int r = 0; r < x.rows; ++r) {
        int visible = causal ? (r + 1) : x.cols;
        softmax_span(x.row_span(r).subspan(0, static_cast<size_t>(visible)),
                     out.row_span(r).subspan(0, static_cast<size_t>(visible)));
        // masked-out entries stay exactly zero
    }
    Var v = push(std::move(out), needs_grad(a), {});
    node(v).backprop = [a, v, causal](Tape& t) {
        if (!t.needs_grad(a)) return;
        const Tensor2& s = t.value(v);
        const Tensor2& g = t.grad_buf(v);
        Tensor2& da = t.grad_buf(a);
        for (int r = 0; r < s.rows; ++r) {
            int visible = causal ? (r + 1) : s.cols;
            double gs = 0.0;
            for (int c = 0; c < visible; ++c) gs += g.at(r, c) * s.at(r, c);
            for (int c = 0; c < visible; ++c) da.at(r, c) += s.at(r, c) * (g.at(r, c) - gs);
        }
    };
    return v;
}

Var Tape::rms_norm_rows(Var a, double eps) {
    const Tensor2& x = value(a);
    Tensor2 out(x.rows, x.cols);
    std::vector<double> inv_rms(static_cast<size_t>(x.rows));
    for (int r = 0; r < x.rows; ++r) {
        double m = 0.0;
        for (int c = 0; c < x.cols; ++c) m += x.at(r, c) * x.at(r, c);
        m /= x.cols;
        inv_rms[static_cast<size_t>(r)] = 1.0 / std::sqrt(m + eps);
        for (int c = 0; c < x.cols; ++c) out.at(r, c) = x.at(r, c) * inv_rms[static_cast<size_t>(r)];
    }
    Var v = push(std::move(out), needs_grad(a), {});
    auto cache = std::make_shared<std::vector<double>>(std::move(inv_rms));
    node(v).backprop = [a, v, cache](Tape& t) {
        if (!t.needs_grad(a)) return;
        const Tensor2& y = t.value(v);
        const Tensor2& g = t.grad_buf(v);
        Tensor2& da = t.grad_buf(a);
        for (int r = 0; r < y.rows; ++r) {
            double gy = 0.0;
            for (int c = 0; c < y.cols; ++c) gy += g.at(r, c) * y.at(r, c);
            gy /= y.cols;
            double inv = (*cache)[static_cast<size_t>(r)];
            for (int c = 0; c < y.cols; ++c) da.at(r, c) += inv * (g.at(r, c) - y.at(r, c) * gy);
        }
    };
    return v;
}

Var Tape::row_l2_norm(Var a) {
    const Tensor2& x = value(a);
    Tensor2 out(x.rows, 1);
    for (int r = 0; r < x.rows; ++r) out.at(r, 0) = l2_norm(x.row_span(r));
    Var v = push(std::move(out), needs_grad(a), {});
    node(v).backprop = [a, v](Tape& t) {
        if (!t.needs_grad(a)) return;
        const Tensor2& x = t.value(a);
        const Tensor2& n = t.value(v);
        const Tensor2& g = t.grad_buf(v);
        Tensor2& da = t.grad_buf(a);
        for (int r = 0; r < x.rows; ++r) {
            double nr = n.at(r, 0);
            if (nr == 0.0) continue;
            double c = g.at(r, 0) / nr;
            for (int j = 0; j < x.cols; ++j) da.at(r, j) += c * x.at(r, j);
        }
    };
    return v;
}

Var Tape::normalize_rows(Var a, double eps) {
    const Tensor2& x = value(a);
    Tensor2 out(x.rows, x.cols);
    std::vector<double> inv_norm(static_cast<size_t>(x.rows));
    for (int r = 0; r < x.rows; ++r) {
        double n = l2_norm(x.row_span(r)) + eps;
        if (n == 0.0) throw SlintError("normalize_rows: zero-norm row " + std::to_string(r));
        inv_norm[static_cast<size_t>(r)] = 1.0 / n;
        for (int c = 0; c < x.cols; ++c) out.at(r, c) = x.at(r, c) * inv_norm[static_cast<size_t>(r)];
    }
    Var v = push(std::move(out), needs_grad(a), {});
    auto cache = std::make_shared<std::vector<double>>(std::move(inv_norm));
    node(v).backprop = [a, v, cache](Tape& t) {
        if (!t.needs_grad(a)) return;
        const Tensor2& y = t.value(v);
        const Tensor2& g = t.grad_buf(v);
        Tensor2& da = t.grad_buf(a);
        for (int r = 0; r < y.rows; ++r) {
            double gy = 0.0;
            for (int c = 0; c < y.cols; ++c) gy += g.at(r, c) * y.at(r, c);
            double inv = (*cache)[static_cast<size_t>(r)];
            for (int c = 0; c < y.cols; ++c) da.at(r, c) += inv * (g.at(r, c) - y.at(r, c) * gy);
        }
    };
    return v;
}

Var Tape::concat_rows(Var a, Var b) {
    const Tensor2& ta = value(a);
    const Tensor2& tb = value(b);
    if (ta.cols != tb.cols) throw SlintError("concat_rows: column mismatch");
    Tensor2 out(ta.rows + tb.rows, ta.cols);
    std::copy(ta.data.begin(), ta.data.end(), out.data.begin());
    std::copy(tb.data.begin(), tb.data.end(), out.data.begin() + static_cast<long>(ta.data.size()));
    Var v = push(std::move(out), needs_grad(a) || needs_grad(b), {});
    int split = ta.rows;
    node(v).backprop = [a, b, v, split](Tape& t) {
        const Tensor2& g = t.grad_buf(v);
        if (t.needs_grad(a)) {
            Tensor2& da = t.grad_buf(a);
            for (int r = 0; r < split; ++r)
                for (int c = 0; c < g.cols; ++c) da.at(r, c) += g.at(r, c);
        }
        if (t.needs_grad(b)) {
            Tensor2& db = t.grad_buf(b);
            for (int r = split; r < g.rows; ++r)
                for (int c = 0; c < g.cols; ++c) db.at(r - split, c) += g.at(r, c);
        }
    };
    return v;
}

Var Tape::slice_rows(Var a, int r0, int r1) {
    const Tensor2& x = value(a);
    if (r0 < 0 || r1 > x.rows || r0 >= r1) throw SlintError("slice_rows: bad range");
    Tensor2 out(r1 - r0, x.cols);
    for (int r = r0; r < r1; ++r) {
        auto src = x.row_span(r);
        std::copy(src.begin(), src.end(), out.row_span(r - r0).begin());
    }
    Var v = push(std::move(out), needs_grad(a), {});
    node(v).backprop = [a, v, r0](Tape& t) {
        if (!t.needs_grad(a)) return;
        const Tensor2& g = t.grad_buf(v);
        Tensor2& da = t.grad_buf(a);
        for (int r = 0; r < g.rows; ++r)
            for (int c = 0; c < g.cols; ++c) da.at(r + r0, c) += g.at(r, c);
    };
    return v;
}

Var Tape::repeat_row(Var a, int n) {
    const Tensor2& x = value(a);
    if (x.rows != 1) throw SlintError("repeat_row: input must be 1 x C");
    Tensor2 out(n, x.cols);
    for (int r = 0; r < n; ++r) std::copy(x.data.begin(), x.data.end(), out.row_span(r).begin());
    Var v = push(std::move(out), needs_grad(a), {});
    node(v).backprop = [a, v](Tape& t) {
        if (!t.needs_grad(a)) return;
        const Tensor2& g = t.grad_buf(v);
        Tensor2& da = t.grad_buf(a);
        for (int r = 0; r < g.rows; ++r)
            for (int c = 0; c < g.cols; ++c) da.at(0, c) += g.at(r, c);
    };
    return v;
}

Var Tape::concat_cols(Var a, Var b) {
    const Tensor2& ta = value(a);
    const Tensor2& tb = value(b);
    if (ta.rows != tb.rows) throw SlintError("concat_cols: row mismatch");
    Tensor2 out(ta.rows, ta.cols + tb.cols);
    for (int r = 0; r < ta.rows; ++r) {
        auto sa = ta.row_span(r);
        auto sb = tb.row_span(r);
        auto dst = out.row_span(r);
        std::copy(sa.begin(), sa.end(), dst.begin());
        std::copy(sb.begin(), sb.end(), dst.begin() + ta.cols);
    }
    Var v = push(std::move(out), needs_grad(a) || needs_grad(b), {});
    int split = ta.cols;
    node(v).backprop = [a, b, v, split](Tape& t) {
        const Tensor2& g = t.grad_buf(v);
        if (t.needs_grad(a)) {
            Tensor2& da = t.grad_buf(a);
            for (int r = 0; r < g.rows; ++r)
                for (int c = 0; c < split; ++c) da.at(r, c) += g.at(r, c);
        }
        if (t.needs_grad(b)) {
            Tensor2& db = t.grad_buf(b);
            for (int r = 0; r < g.rows; ++r)
                for (int c = split; c < g.cols; ++c) db.at(r, c - split) += g.at(r, c);
        }
    };
    return v;
}

Var Tape::slice_cols(Var a, int c0, int c1) {
    const Tensor2& x = value(a);
    if (c0 < 0 || c1 > x.cols || c0 >= c1) throw SlintError("slice_cols: bad range");
    Tensor2 out(x.rows, c1 - c0);
    for (int r = 0; r < x.rows; ++r)
        for (int c = c0; c < c1; ++c) out.at(r, c - c0) = x.at(r, c);
    Var v = push(std::move(out), needs_grad(a), {});
    node(v).backprop = [a, v, c0](Tape& t) {
        if (!t.needs_grad(a)) return;
        const Tensor2& g = t.grad_buf(v);
        Tensor2& da = t.grad_buf(a);
        for (int r = 0; r < g.rows; ++r)
            for (int c = 0; c < g.cols; ++c) da.at(r, c + c0) += g.at(r, c);
    };
    return v;
}

Var Tape::scale_cols(Var a, Var g) {
    const Tensor2& x = value(a);
    const Tensor2& gv = value(g);
    if (gv.rows != 1 || gv.cols != x.cols) throw SlintError("scale_cols: gain must be 1 x cols(a)");
    Tensor2 out(x.rows, x.cols);
    for (int r = 0; r < x.rows; ++r)
        for (int c = 0; c < x.cols; ++c) out.at(r, c) = x.at(r, c) * gv.at(0, c);
    Var v = push(std::move(out), needs_grad(a) || needs_grad(g), {});
    node(v).backprop = [a, g, v](Tape& t) {
        const Tensor2& go = t.grad_buf(v);
        if (t.needs_grad(a)) {
            const Tensor2& gv = t.value(g);
            Tensor2& da = t.grad_buf(a);
            for (int r = 0; r < go.rows; ++r)
                for (int c = 0; c < go.cols; ++c) da.at(r, c) += go.at(r, c) * gv.at(0, c);
        }
        if (t.needs_grad(g)) {
            const Tensor2& x = t.value(a);
            Tensor2& dg = t.grad_buf(g);
            for (int r = 0; r < go.rows; ++r)
                for (int c = 0; c < go.cols; ++c) dg.at(0, c) += go.at(r, c) * x.at(r, c);
        }
    };
    return v;
}

Var Tape::gather_rows(Var table, std::vector<int> ids) {
    const Tensor2& tab = value(table);
    Tensor2 out(static_cast<int>(ids.size()), tab.cols);
    for (size_t r = 0; r < ids.size(); ++r) {
        if (ids[r] < 0 || ids[r] >= tab.rows) throw SlintError("gather_rows: id out of range");
        auto src = tab.row_span(ids[r]);
        std::copy(src.begin(), src.end(), out.row_span(static_cast<int>(r)).begin());
    }
    Var v = push(std::move(out), needs_grad(table), {});
    auto ids_ptr = std::make_shared<std::vector<int>>(std::move(ids));
    node(v).backprop = [table, v, ids_ptr](Tape& t) {
        if (!t.needs_grad(table)) return;
        const Tensor2& g = t.grad_buf(v);
        Tensor2& dt = t.grad_buf(table);
        for (size_t r = 0; r < ids_ptr->size(); ++r) {
            int id = (*ids_ptr)[r];
            for (int c = 0; c < g.cols; ++c) dt.at(id, c) += g.at(static_cast<int>(r), c);
        }
    };
    return v;
}

Var Tape::overwrite_rows(Var seq, std::vector<int> positions, Var rows) {
    const Tensor2& s = value(seq);
    const Tensor2& r = value(rows);
    if (static_cast<int>(positions.size()) != r.rows) {
        throw SlintError("overwrite_rows: positions size must equal rows(rows)");
    }
    if (s.cols != r.cols) throw SlintError("overwrite_rows: column mismatch");
    Tensor2 out = s;
    std::vector<uint8_t> seen(static_cast<size_t>(s.rows), 0);
    for (size_t i = 0; i < positions.size(); ++i) {
        int p = positions[i];
        if (p < 0 || p >= s.rows) throw SlintError("overwrite_rows: position out of range");
        if (seen[static_cast<size_t>(p)]) throw SlintError("overwrite_rows: duplicate position");
        seen[static_cast<size_t>(p)] = 1;
        auto src = r.row_span(static_cast<int>(i));
        std::copy(src.begin(), src.end(), out.row_span(p).begin());
    }
    Var v = push(std::move(out), needs_grad(seq) || needs_grad(rows), {});
    auto pos_ptr = std::make_shared<std::vector<int>>(std::move(positions));
    node(v).backprop = [seq, rows, v, pos_ptr](Tape& t) {
        const Tensor2& g = t.grad_buf(v);
        if (t.needs_grad(seq)) {
            Tensor2 masked = g;
            for (int p : *pos_ptr) {
                auto row = masked.row_span(p);
                std::fill(row.begin(), row.end(), 0.0);
            }
            add_in_place(t.grad_buf(seq), masked);
        }
        if (t.needs_grad(rows)) {
            Tensor2& dr = t.grad_buf(rows);
            for (size_t i = 0; i < pos_ptr->size(); ++i) {
                int p = (*pos_ptr)[i];
                for (int c = 0; c < g.cols; ++c) dr.at(static_cast<int>(i), c) += g.at(p, c);
            }
        }
    };
    return v;
}

Var Tape::sum_all(Var a) {
    const Tensor2& x = value(a);
    Tensor2 out(1, 1);
    for (double e : x.data) out.data[0] += e;
    Var v = push(std::move(out), needs_grad(a), {});
    node(v).backprop = [a, v](Tape& t) {
        if (!t.needs_grad(a)) return;
        double g = t.grad_buf(v).data[0];
        Tensor2& da = t.grad_buf(a);
        for (double& e : da.data) e += g;
    };
    return v;
}

Var Tape::cross_entropy_rows(Var logits, std::vector<int> targets, std::vector<uint8_t> mask) {
    const Tensor2& lg = value(logits);
    if (static_cast<int>(targets.size()) != lg.rows || mask.size() != targets.size()) {
        throw SlintError("cross_entropy_rows: targets/mask must have one entry per row");
    }
    int n_masked = 0;
    for (uint8_t m : mask) n_masked += (m != 0);
    if (n_masked == 0) throw SlintError("cross_entropy_rows: empty mask");

    auto probs = std::make_shared<Tensor2>(lg.rows, lg.cols);
    double loss = 0.0;
    for (int r = 0; r < lg.rows; ++r) {
        softmax_span(lg.row_span(r), probs->row_span(r));
        if (mask[static_cast<size_t>(r)]) {
            int tgt = targets[static_cast<size_t>(r)];
            if (tgt < 0 || tgt >= lg.cols) throw SlintError("cross_entropy_rows: target out of range");
            loss -= std::log(std::max(probs->at(r, tgt), 1e-300));
        }
    }
    Tensor2 out(1, 1);
    out.data[0] = loss / n_masked;
    Var v = push(std::move(out), needs_grad(logits), {});
    auto tgt_ptr = std::make_shared<std::vector<int>>(std::move(targets));
    auto mask_ptr = std::make_shared<std::vector<uint8_t>>(std::move(mask));
    node(v).backprop = [logits, v, probs, tgt_ptr, mask_ptr, n_masked](Tape& t) {
        if (!t.needs_grad(logits)) return;
        double g = t.grad_buf(v).data[0] / n_masked;
        Tensor2& dl = t.grad_buf(logits);
        for (int r = 0; r < probs->rows; ++r) {
            if (!(*mask_ptr)[static_cast<size_t>(r)]) continue;
            for (int c = 0; c < probs->cols; ++c) dl.at(r, c) += g * probs->at(r, c);
            dl.at(r, (*tgt_ptr)[static_cast<size_t>(r)]) -= g;
        }
    };
    return v;
}

void Tape::backward(Var loss) {
    const Tensor2& lv = value(loss);
    if (lv.rows != 1 || lv.cols != 1) throw SlintError("backward: loss must be scalar (1 x 1)");
    if (ran_backward_) throw SlintError("backward: already ran on this tape");
    ran_backward_ = true;
    grad_buf(loss).data[0] = 1.0;
    for (int i = loss.id; i >= 0; --i) {
        Node& n = nodes_[static_cast<size_t>(i)];
        if (!n.needs_grad || !n.backprop) continue;
        if (n.grad.rows == 0 && n.grad.cols == 0) continue;  // never used downstream
        n.backprop(*this);
    }
}

Var attention_graph(Tape& tape, Var seq, Var w_query, Var w_key, Var w_value, Var w_out,
                    int heads, bool causal) {
    const Tensor2& x = tape.value(seq);
    int width = x.cols;
    if (heads < 1 || width % heads != 0) throw SlintError("attention_graph: width not divisible by heads");
    int head_dim = width / heads;
    if (tape.value(w_query).rows != width || tape.value(w_query).cols != width ||
        tape.value(w_key).rows != width || tape.value(w_key).cols != width ||
        tape.value(w_value).rows != width || tape.value(w_value).cols != width ||
        tape.value(w_out).rows != width || tape.value(w_out).cols != width) {
        throw SlintError("attention_graph: projection matrices must be width x width");
    }

    Var q = tape.matmul(seq, w_query);
    Var k = tape.matmul(seq, w_key);
    Var v = tape.matmul(seq, w_value);

    Var merged{};
    double inv_scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
    for (int h = 0; h < heads; ++h) {
        int c0 = h * head_dim;
        int c1 = c0 + head_dim;
        Var qh = tape.slice_cols(q, c0, c1);
        Var kh = tape.slice_cols(k, c0, c1);
        Var vh = tape.slice_cols(v, c0, c1);
        Var scores = tape.scale(tape.matmul_nt(qh, kh), inv_scale);
        Var weights = tape.softmax_rows(scores, causal);
        Var ctx = tape.matmul(weights, vh);
        merged = merged.valid() ? tape.concat_cols(merged, ctx) : ctx;
    }
    return tape.matmul(merged, w_out);
}

}  // namespace slint::ad
