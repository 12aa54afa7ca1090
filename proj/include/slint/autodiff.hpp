#pragma once
// Reverse-mode automatic differentiation over a small fixed operator set.
// A Tape is rebuilt per forward pass; parameters enter as grad-enabled
// leaves and their gradients are read back after backward().

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "slint/tensor.hpp"
#include "slint/util.hpp"

namespace slint::ad {

struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

class Tape {
  public:
    // Leaves. Constants never receive gradients.
    Var leaf(Tensor2 value, bool requires_grad);
    Var constant(Tensor2 value) { return leaf(std::move(value), false); }

    // Elementwise
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var hadamard(Var a, Var b);
    Var scale(Var a, double c);
    Var silu(Var a);
    Var log_sigmoid(Var a);
    // Zeroes each element independently with probability p, scales the
    // rest by 1/(1-p). Mask is fixed at node creation.
    Var dropout(Var a, double p, Rng& rng);

    // Linear algebra
    Var matmul(Var a, Var b);
    Var matmul_nt(Var a, Var b);  // a * b^T

    // Row-wise nonlinearities
    // Softmax over each row; with causal=true entry (r,c) is masked out
    // for c > r (requires a square score matrix).
    Var softmax_rows(Var a, bool causal = false);
    Var rms_norm_rows(Var a, double eps = 1e-8);
    Var row_l2_norm(Var a);                      // R x C -> R x 1
    Var normalize_rows(Var a, double eps = 0.0); // row / ||row||

    // Shape surgery
    Var concat_rows(Var a, Var b);
    Var slice_rows(Var a, int r0, int r1);  // half-open [r0, r1)
    Var repeat_row(Var a, int n);           // 1 x C -> n x C
    Var concat_cols(Var a, Var b);
    Var slice_cols(Var a, int c0, int c1);
    Var scale_cols(Var a, Var g);  // g is 1 x C, per-column gain

    // Indexed access
    Var gather_rows(Var table, std::vector<int> ids);
    // Copy of seq with row positions[i] replaced by rows[i]; positions
    // must be distinct and in range.
    Var overwrite_rows(Var seq, std::vector<int> positions, Var rows);

    // Reductions / losses
    Var sum_all(Var a);  // 1 x 1
    // Mean negative log-likelihood over rows with mask != 0:
    //   loss = (1/n_masked) * sum_i -log softmax(logits_i)[targets_i]
    Var cross_entropy_rows(Var logits, std::vector<int> targets, std::vector<uint8_t> mask);

    void backward(Var loss);

    const Tensor2& value(Var v) const { return nodes_[static_cast<size_t>(v.id)].value; }
    const Tensor2& grad(Var v) const;
    bool needs_grad(Var v) const { return nodes_[static_cast<size_t>(v.id)].needs_grad; }
    size_t node_count() const { return nodes_.size(); }

  private:
    struct Node {
        Tensor2 value;
        Tensor2 grad;  // allocated lazily during backward
        bool needs_grad = false;
        std::function<void(Tape&)> backprop;  // empty for leaves
    };

    Var push(Tensor2 value, bool needs_grad, std::function<void(Tape&)> backprop);
    Node& node(Var v) { return nodes_[static_cast<size_t>(v.id)]; }
    Tensor2& grad_buf(Var v);

    std::vector<Node> nodes_;
    bool ran_backward_ = false;
};

// Multi-head scaled dot-product self-attention as a tape subgraph.
// Weight matrices are h x h; per-head blocks are column slices.
// No positional encoding is applied here.
Var attention_graph(Tape& tape, Var seq, Var w_query, Var w_key, Var w_value, Var w_out,
                    int heads, bool causal);

}  // namespace slint::ad
