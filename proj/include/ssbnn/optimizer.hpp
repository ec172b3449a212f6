#pragma once

#include "ssbnn/tape.hpp"

namespace ssbnn {

enum class OptimizerKind { Adam, SgdMomentum };

/// First-order optimizer over tape leaves. Slots are keyed by position in
/// the parameter list, which must stay stable across steps.
class Optimizer {
public:
    Optimizer(OptimizerKind kind, double lr) : kind_(kind), lr_(lr) {}

    OptimizerKind kind() const { return kind_; }
    double learning_rate() const { return lr_; }
    void set_learning_rate(double lr) { lr_ = lr; }
    void set_momentum(double m) { momentum_ = m; }

    /// Applies one update in place from the accumulated gradients.
    void step(const std::vector<ad::NodePtr>& params);

private:
    OptimizerKind kind_;
    double lr_;
    double momentum_ = 0.9;
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    long long t_ = 0;
    std::vector<Tensor> m_slots_;  // velocity or first moment
    std::vector<Tensor> v_slots_;  // second moment (adam)
};

inline void zero_grads(const std::vector<ad::NodePtr>& params) {
    for (const auto& p : params) p->zero_grad();
}

}  // namespace ssbnn
