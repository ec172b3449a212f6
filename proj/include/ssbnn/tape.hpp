#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ssbnn/tensor.hpp"

namespace ssbnn::ad {

struct TapeNode;
using NodePtr = std::shared_ptr<TapeNode>;

/// One node of the reverse-mode graph. Leaves hold parameters or
/// constants; interior nodes remember how to push gradients to their
/// parents. The graph is acyclic by construction.
struct TapeNode {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::string op;
    std::vector<NodePtr> parents;
    std::function<void(const TapeNode&)> backprop;

    explicit TapeNode(Tensor v, bool rg = false, std::string tag = "leaf")
        : value(std::move(v)), grad(value.shape), requires_grad(rg), op(std::move(tag)) {}

    void zero_grad() { grad.zero(); }
};

/// Trainable leaf.
NodePtr leaf(Tensor v);
/// Non-trainable leaf; gradients stop here.
NodePtr constant(Tensor v);

NodePtr add(const NodePtr& a, const NodePtr& b);
NodePtr sub(const NodePtr& a, const NodePtr& b);
NodePtr mul(const NodePtr& a, const NodePtr& b);
NodePtr div(const NodePtr& a, const NodePtr& b);
NodePtr max(const NodePtr& a, const NodePtr& b);

NodePtr neg(const NodePtr& a);
NodePtr exp(const NodePtr& a);
NodePtr log(const NodePtr& a);
NodePtr sigmoid(const NodePtr& a);
NodePtr swish(const NodePtr& a);
NodePtr softplus(const NodePtr& a);
NodePtr square(const NodePtr& a);
NodePtr sqrt(const NodePtr& a);

NodePtr sum(const NodePtr& a);
NodePtr mean(const NodePtr& a);
NodePtr log_sum_exp(const NodePtr& a);

/// C = A * B, A:[m,k] B:[k,n].
NodePtr matmul(const NodePtr& a, const NodePtr& b);
/// C = A * B^T, A:[m,k] B:[n,k].
NodePtr matmul_transpose_b(const NodePtr& a, const NodePtr& b);

/// [m,k] -> [m,k+1] with a leading column of ones (bias input).
NodePtr prepend_ones(const NodePtr& a);

/// out[i,j] = m[i,j] * v[i].
NodePtr scale_rows(const NodePtr& m, const NodePtr& v);
/// out[i] = sum_j m[i,j].
NodePtr row_sum(const NodePtr& m);

/// sum_i (log_sum_exp(logits[i,:]) - logits[i, labels[i]]).
NodePtr cross_entropy_sum(const NodePtr& logits, const std::vector<int>& labels);

/// Fills grads of every node reachable from a scalar root with
/// d(root)/d(node). Accumulates on repeated calls.
void backward(const NodePtr& root);

/// Reverse topological order (root last).
std::vector<TapeNode*> topo_order(const NodePtr& root);

// Scalar-broadcast helpers.
inline NodePtr add(const NodePtr& a, double b) { return add(a, constant(Tensor::scalar(b))); }
inline NodePtr sub(const NodePtr& a, double b) { return sub(a, constant(Tensor::scalar(b))); }
inline NodePtr sub(double a, const NodePtr& b) { return sub(constant(Tensor::scalar(a)), b); }
inline NodePtr mul(const NodePtr& a, double b) { return mul(a, constant(Tensor::scalar(b))); }
inline NodePtr div(const NodePtr& a, double b) { return div(a, constant(Tensor::scalar(b))); }
inline NodePtr div(double a, const NodePtr& b) { return div(constant(Tensor::scalar(a)), b); }

}  // namespace ssbnn::ad
