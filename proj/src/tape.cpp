#include "ssbnn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace ssbnn::ad {

namespace {

bool broadcast_ok(const Tensor& a, const Tensor& b) {
    return a.same_shape(b) || a.is_scalar() || b.is_scalar();
}

void check_binary(const char* op, const Tensor& a, const Tensor& b) {
    if (!broadcast_ok(a, b))
        throw ShapeError(std::string(op) + ": incompatible shapes (" +
                         a.shape_str() + ") vs (" + b.shape_str() + ")");
}

const Tensor& wider(const Tensor& a, const Tensor& b) {
    return a.is_scalar() ? b : a;
}

NodePtr make(Tensor v, std::string tag, std::vector<NodePtr> parents,
             std::function<void(const TapeNode&)> bp) {
    bool rg = false;
    for (const auto& p : parents) rg = rg || p->requires_grad;
    auto n = std::make_shared<TapeNode>(std::move(v), rg, std::move(tag));
    if (rg) {
        n->parents = std::move(parents);
        n->backprop = std::move(bp);
    }
    return n;
}

// Accumulate elementwise grad g into parent p honoring scalar broadcast.
void acc(const NodePtr& p, std::size_t i, double g) {
    if (!p->requires_grad) return;
    p->grad[p->value.is_scalar() ? 0 : i] += g;
}

double pick(const Tensor& t, std::size_t i) {
    return t.is_scalar() ? t[0] : t[i];
}

NodePtr binary(const char* tag, const NodePtr& a, const NodePtr& b,
               double (*fwd)(double, double),
               void (*bwd)(double, double, double, double& /*ga*/, double& /*gb*/)) {
    check_binary(tag, a->value, b->value);
    const Tensor& w = wider(a->value, b->value);
    Tensor out(w.shape);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = fwd(pick(a->value, i), pick(b->value, i));
    return make(std::move(out), tag, {a, b}, [a, b, bwd](const TapeNode& n) {
        for (std::size_t i = 0; i < n.value.size(); ++i) {
            double ga = 0, gb = 0;
            bwd(pick(a->value, i), pick(b->value, i), n.value[i], ga, gb);
            acc(a, i, ga * n.grad[i]);
            acc(b, i, gb * n.grad[i]);
        }
    });
}

NodePtr unary(const char* tag, const NodePtr& a, double (*fwd)(double),
              double (*dfdx)(double, double /*y*/)) {
    Tensor out(a->value.shape);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(a->value[i]);
    return make(std::move(out), tag, {a}, [a, dfdx](const TapeNode& n) {
        for (std::size_t i = 0; i < n.value.size(); ++i)
            a->grad[i] += dfdx(a->value[i], n.value[i]) * n.grad[i];
    });
}

double sigmoid_scalar(double x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

double softplus_scalar(double x) {
    // log(1+e^x) without overflow on either side
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

}  // namespace

NodePtr leaf(Tensor v) { return std::make_shared<TapeNode>(std::move(v), true, "param"); }
NodePtr constant(Tensor v) { return std::make_shared<TapeNode>(std::move(v), false, "const"); }

NodePtr add(const NodePtr& a, const NodePtr& b) {
    return binary("add", a, b, [](double x, double y) { return x + y; },
                  [](double, double, double, double& ga, double& gb) { ga = 1; gb = 1; });
}

NodePtr sub(const NodePtr& a, const NodePtr& b) {
    return binary("sub", a, b, [](double x, double y) { return x - y; },
                  [](double, double, double, double& ga, double& gb) { ga = 1; gb = -1; });
}

NodePtr mul(const NodePtr& a, const NodePtr& b) {
    return binary("mul", a, b, [](double x, double y) { return x * y; },
                  [](double x, double y, double, double& ga, double& gb) { ga = y; gb = x; });
}

NodePtr div(const NodePtr& a, const NodePtr& b) {
    return binary("div", a, b, [](double x, double y) { return x / y; },
                  [](double x, double y, double, double& ga, double& gb) {
                      ga = 1.0 / y;
                      gb = -x / (y * y);
                  });
}

NodePtr max(const NodePtr& a, const NodePtr& b) {
    return binary("max", a, b, [](double x, double y) { return x >= y ? x : y; },
                  [](double x, double y, double, double& ga, double& gb) {
                      ga = x >= y ? 1.0 : 0.0;
                      gb = x >= y ? 0.0 : 1.0;
                  });
}

NodePtr neg(const NodePtr& a) {
    return unary("neg", a, [](double x) { return -x; },
                 [](double, double) { return -1.0; });
}

NodePtr exp(const NodePtr& a) {
    return unary("exp", a, [](double x) { return std::exp(x); },
                 [](double, double y) { return y; });
}

NodePtr log(const NodePtr& a) {
    return unary("log", a, [](double x) { return std::log(x); },
                 [](double x, double) { return 1.0 / x; });
}

NodePtr sigmoid(const NodePtr& a) {
    return unary("sigmoid", a, sigmoid_scalar,
                 [](double, double y) { return y * (1.0 - y); });
}

NodePtr swish(const NodePtr& a) {
    return unary("swish", a, [](double x) { return x * sigmoid_scalar(x); },
                 [](double x, double) {
                     double s = sigmoid_scalar(x);
                     return s * (1.0 + x * (1.0 - s));
                 });
}

NodePtr softplus(const NodePtr& a) {
    return unary("softplus", a, softplus_scalar,
                 [](double x, double) { return sigmoid_scalar(x); });
}

NodePtr square(const NodePtr& a) {
    return unary("square", a, [](double x) { return x * x; },
                 [](double x, double) { return 2.0 * x; });
}

NodePtr sqrt(const NodePtr& a) {
    return unary("sqrt", a, [](double x) { return std::sqrt(x); },
                 [](double, double y) { return 0.5 / y; });
}

NodePtr sum(const NodePtr& a) {
    double s = 0;
    for (double v : a->value.data) s += v;
    return make(Tensor::scalar(s), "sum", {a}, [a](const TapeNode& n) {
        for (std::size_t i = 0; i < a->value.size(); ++i) a->grad[i] += n.grad[0];
    });
}

NodePtr mean(const NodePtr& a) {
    double s = 0;
    for (double v : a->value.data) s += v;
    double inv = 1.0 / static_cast<double>(a->value.size());
    return make(Tensor::scalar(s * inv), "mean", {a}, [a, inv](const TapeNode& n) {
        for (std::size_t i = 0; i < a->value.size(); ++i) a->grad[i] += inv * n.grad[0];
    });
}

NodePtr log_sum_exp(const NodePtr& a) {
    double m = *std::max_element(a->value.data.begin(), a->value.data.end());
    double s = 0;
    for (double v : a->value.data) s += std::exp(v - m);
    double out = m + std::log(s);
    return make(Tensor::scalar(out), "log_sum_exp", {a}, [a, out](const TapeNode& n) {
        for (std::size_t i = 0; i < a->value.size(); ++i)
            a->grad[i] += std::exp(a->value[i] - out) * n.grad[0];
    });
}

NodePtr matmul(const NodePtr& a, const NodePtr& b) {
    const Tensor& A = a->value;
    const Tensor& B = b->value;
    if (A.shape.size() != 2 || B.shape.size() != 2 || A.cols() != B.rows())
        throw ShapeError("matmul: incompatible shapes (" + A.shape_str() + ") vs (" +
                         B.shape_str() + ")");
    std::size_t m = A.rows(), k = A.cols(), n = B.cols();
    Tensor C({m, n});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
            double av = A.data[i * k + p];
            if (av == 0.0) continue;
            const double* brow = &B.data[p * n];
            double* crow = &C.data[i * n];
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    return make(std::move(C), "matmul", {a, b}, [a, b, m, k, n](const TapeNode& node) {
        const Tensor& A = a->value;
        const Tensor& B = b->value;
        const Tensor& G = node.grad;
        if (a->requires_grad) {  // dA = G * B^T
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t p = 0; p < k; ++p) {
                    double s = 0;
                    const double* grow = &G.data[i * n];
                    const double* brow = &B.data[p * n];
                    for (std::size_t j = 0; j < n; ++j) s += grow[j] * brow[j];
                    a->grad.data[i * k + p] += s;
                }
        }
        if (b->requires_grad) {  // dB = A^T * G
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t p = 0; p < k; ++p) {
                    double av = A.data[i * k + p];
                    if (av == 0.0) continue;
                    const double* grow = &G.data[i * n];
                    double* brow = &b->grad.data[p * n];
                    for (std::size_t j = 0; j < n; ++j) brow[j] += av * grow[j];
                }
        }
    });
}

NodePtr matmul_transpose_b(const NodePtr& a, const NodePtr& b) {
    const Tensor& A = a->value;
    const Tensor& B = b->value;
    if (A.shape.size() != 2 || B.shape.size() != 2 || A.cols() != B.cols())
        throw ShapeError("matmul_transpose_b: incompatible shapes (" + A.shape_str() +
                         ") vs (" + B.shape_str() + ")");
    std::size_t m = A.rows(), k = A.cols(), n = B.rows();
    Tensor C({m, n});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0;
            const double* arow = &A.data[i * k];
            const double* brow = &B.data[j * k];
            for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
            C.data[i * n + j] = s;
        }
    return make(std::move(C), "matmul_transpose_b", {a, b},
                [a, b, m, k, n](const TapeNode& node) {
                    const Tensor& A = a->value;
                    const Tensor& B = b->value;
                    const Tensor& G = node.grad;
                    if (a->requires_grad) {  // dA = G * B
                        for (std::size_t i = 0; i < m; ++i)
                            for (std::size_t j = 0; j < n; ++j) {
                                double g = G.data[i * n + j];
                                if (g == 0.0) continue;
                                const double* brow = &B.data[j * k];
                                double* arow = &a->grad.data[i * k];
                                for (std::size_t p = 0; p < k; ++p) arow[p] += g * brow[p];
                            }
                    }
                    if (b->requires_grad) {  // dB = G^T * A
                        for (std::size_t i = 0; i < m; ++i)
                            for (std::size_t j = 0; j < n; ++j) {
                                double g = G.data[i * n + j];
                                if (g == 0.0) continue;
                                const double* arow = &A.data[i * k];
                                double* brow = &b->grad.data[j * k];
                                for (std::size_t p = 0; p < k; ++p) brow[p] += g * arow[p];
                            }
                    }
                });
}

NodePtr prepend_ones(const NodePtr& a) {
    const Tensor& A = a->value;
    if (A.shape.size() != 2)
        throw ShapeError("prepend_ones: expected matrix, got (" + A.shape_str() + ")");
    std::size_t m = A.rows(), k = A.cols();
    Tensor out({m, k + 1});
    for (std::size_t i = 0; i < m; ++i) {
        out.data[i * (k + 1)] = 1.0;
        for (std::size_t j = 0; j < k; ++j) out.data[i * (k + 1) + j + 1] = A.data[i * k + j];
    }
    return make(std::move(out), "prepend_ones", {a}, [a, m, k](const TapeNode& n) {
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < k; ++j)
                a->grad.data[i * k + j] += n.grad.data[i * (k + 1) + j + 1];
    });
}

NodePtr scale_rows(const NodePtr& m, const NodePtr& v) {
    const Tensor& M = m->value;
    const Tensor& V = v->value;
    if (M.shape.size() != 2 || V.shape.size() != 1 || V.size() != M.rows())
        throw ShapeError("scale_rows: incompatible shapes (" + M.shape_str() + ") vs (" +
                         V.shape_str() + ")");
    std::size_t r = M.rows(), c = M.cols();
    Tensor out({r, c});
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out.data[i * c + j] = M.data[i * c + j] * V[i];
    return make(std::move(out), "scale_rows", {m, v}, [m, v, r, c](const TapeNode& n) {
        for (std::size_t i = 0; i < r; ++i) {
            double vi = v->value[i];
            double gv = 0;
            for (std::size_t j = 0; j < c; ++j) {
                double g = n.grad.data[i * c + j];
                if (m->requires_grad) m->grad.data[i * c + j] += g * vi;
                gv += g * m->value.data[i * c + j];
            }
            if (v->requires_grad) v->grad[i] += gv;
        }
    });
}

NodePtr row_sum(const NodePtr& m) {
    const Tensor& M = m->value;
    if (M.shape.size() != 2)
        throw ShapeError("row_sum: expected matrix, got (" + M.shape_str() + ")");
    std::size_t r = M.rows(), c = M.cols();
    Tensor out({r});
    for (std::size_t i = 0; i < r; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < c; ++j) s += M.data[i * c + j];
        out[i] = s;
    }
    return make(std::move(out), "row_sum", {m}, [m, r, c](const TapeNode& n) {
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) m->grad.data[i * c + j] += n.grad[i];
    });
}

NodePtr cross_entropy_sum(const NodePtr& logits, const std::vector<int>& labels) {
    const Tensor& L = logits->value;
    if (L.shape.size() != 2 || L.rows() != labels.size())
        throw ShapeError("cross_entropy_sum: logits (" + L.shape_str() + ") vs " +
                         std::to_string(labels.size()) + " labels");
    std::size_t n = L.rows(), c = L.cols();
    for (std::size_t i = 0; i < n; ++i)
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= c)
            throw ValueError("cross_entropy_sum: label " + std::to_string(labels[i]) +
                             " out of range [0," + std::to_string(c) + ")");
    double total = 0;
    std::vector<double> lse(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = &L.data[i * c];
        double m = *std::max_element(row, row + c);
        double s = 0;
        for (std::size_t j = 0; j < c; ++j) s += std::exp(row[j] - m);
        lse[i] = m + std::log(s);
        total += lse[i] - row[labels[i]];
    }
    return make(Tensor::scalar(total), "cross_entropy_sum", {logits},
                [logits, labels, lse, n, c](const TapeNode& node) {
                    double g = node.grad[0];
                    for (std::size_t i = 0; i < n; ++i) {
                        const double* row = &logits->value.data[i * c];
                        double* grow = &logits->grad.data[i * c];
                        for (std::size_t j = 0; j < c; ++j)
                            grow[j] += g * std::exp(row[j] - lse[i]);
                        grow[labels[i]] -= g;
                    }
                });
}

std::vector<TapeNode*> topo_order(const NodePtr& root) {
    std::vector<TapeNode*> order;
    std::unordered_set<TapeNode*> seen;
    // iterative DFS; graphs can be deep for long sums
    struct Frame {
        TapeNode* node;
        std::size_t next_child;
    };
    std::vector<Frame> stack{{root.get(), 0}};
    seen.insert(root.get());
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_child < f.node->parents.size()) {
            TapeNode* child = f.node->parents[f.next_child++].get();
            if (child->requires_grad && seen.insert(child).second)
                stack.push_back({child, 0});
        } else {
            order.push_back(f.node);
            stack.pop_back();
        }
    }
    return order;  // parents before children; root last
}

void backward(const NodePtr& root) {
    if (!root->value.is_scalar())
        throw ShapeError("backward: root must be scalar, got (" +
                         root->value.shape_str() + ")");
    if (!root->requires_grad) return;
    auto order = topo_order(root);
    // interior grads are scratch for this pass; leaves accumulate across calls
    for (auto* n : order)
        if (n->backprop) n->grad.zero();
    root->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if ((*it)->backprop) (*it)->backprop(**it);
}

}  // namespace ssbnn::ad
