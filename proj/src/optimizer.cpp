#include "ssbnn/optimizer.hpp"

#include <cmath>

namespace ssbnn {

void Optimizer::step(const std::vector<ad::NodePtr>& params) {
    if (m_slots_.empty()) {
        for (const auto& p : params) {
            m_slots_.emplace_back(p->value.shape);
            if (kind_ == OptimizerKind::Adam) v_slots_.emplace_back(p->value.shape);
        }
    }
    if (m_slots_.size() != params.size())
        throw ValueError("optimizer_step: parameter count changed between steps");
    ++t_;
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& p = params[i]->value;
        const auto& g = params[i]->grad;
        if (!p.same_shape(g))
            throw ShapeError("optimizer_step: grad shape mismatch for parameter " +
                             std::to_string(i));
        if (kind_ == OptimizerKind::SgdMomentum) {
            auto& v = m_slots_[i];
            for (std::size_t j = 0; j < p.size(); ++j) {
                v[j] = momentum_ * v[j] + g[j];
                p[j] -= lr_ * v[j];
            }
        } else {
            auto& m = m_slots_[i];
            auto& v = v_slots_[i];
            double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
            double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
            for (std::size_t j = 0; j < p.size(); ++j) {
                m[j] = beta1_ * m[j] + (1.0 - beta1_) * g[j];
                v[j] = beta2_ * v[j] + (1.0 - beta2_) * g[j] * g[j];
                p[j] -= lr_ * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + eps_);
            }
        }
    }
}

}  // namespace ssbnn
