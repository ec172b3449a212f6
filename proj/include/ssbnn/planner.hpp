#pragma once

#include "ssbnn/tensor.hpp"

#include <vector>

namespace ssbnn {

/// Inputs to the posterior-contraction rate calculator.
struct TopologySpec {
    std::size_t n = 0;                // sample size
    std::vector<std::size_t> k;       // widths k_0 .. k_{L+1}
    std::vector<double> s;            // per-layer node sparsity bound s_0 .. s_L
    std::vector<double> B;            // per-layer norm bound B_0 .. B_L
    double xi = 0.0;                  // approximation error
    double t0 = 1.0, t0p = 1.0, t0pp = 1.0;
    double c_reg_sq = 1.0;
    std::vector<double> C;            // per-layer constant C_l (default 1e-9)

    std::size_t n_weight_layers() const { return k.empty() ? 0 : k.size() - 1; }

    double B_at(std::size_t l) const { return l < B.size() ? B[l] : k[l] + 1.0; }
    double s_at(std::size_t l) const {
        return l < s.size() ? s[l] : static_cast<double>(k[l + 1]);
    }
    double C_at(std::size_t l) const { return l < C.size() ? C[l] : 1e-9; }

    void validate() const {
        if (n == 0) throw ValueError("planner: n must be positive");
        if (k.size() < 3) throw ValueError("planner: need widths k0..kL+1");
        for (std::size_t w : k)
            if (w < 1) throw ValueError("planner: widths must be >= 1");
        if (t0 <= 0 || t0p <= 0 || t0pp <= 0 || c_reg_sq <= 0)
            throw ValueError("planner: constants must be positive");
    }
};

struct RateQuantities {
    std::vector<double> u;      // log prior mass scale per layer
    std::vector<double> theta;  // vartheta per layer
    std::vector<double> r;      // rate contribution per layer
};

/// Group-Lasso rate quantities: penalty 1/(t0'' (k_l+1)).
RateQuantities rate_quantities_gl(const TopologySpec& spec);

/// Group-Horseshoe rate quantities: penalty 1/(t0 t0') + 1/c_reg^2 and an
/// extra log c_reg^2 in u_l.
RateQuantities rate_quantities_ghs(const TopologySpec& spec);

/// epsilon_n = sqrt((sum r_l + xi) * sum u_l).
double epsilon_n(const TopologySpec& spec, const RateQuantities& rates);

/// Layer-wise prior inclusion probabilities
/// lambda_l = (1/k_{l+1}) exp(-C_l (k_l+1) theta_l), clamped at 1e-50;
/// the output layer gets lambda = 1.
std::vector<double> lambda_l(const TopologySpec& spec, const RateQuantities& rates);

}  // namespace ssbnn
