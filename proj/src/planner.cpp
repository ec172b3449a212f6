#include "ssbnn/planner.hpp"

#include <cmath>

namespace ssbnn {

namespace {

RateQuantities rate_quantities(const TopologySpec& spec, bool ghs) {
    spec.validate();
    std::size_t L1 = spec.n_weight_layers();  // layers l = 0..L
    double logL = std::log(static_cast<double>(L1 - 1));
    if (L1 < 2) throw ValueError("planner: need at least one hidden layer");

    double sum_log_kin = 0, sum_log_kout = 0, sum_log_B = 0;
    for (std::size_t l = 0; l < L1; ++l) {
        sum_log_kin += std::log(static_cast<double>(spec.k[l]));
        sum_log_kout += std::log(static_cast<double>(spec.k[l + 1]));
        if (spec.B_at(l) <= 0) throw ValueError("planner: B_l must be positive");
        sum_log_B += std::log(spec.B_at(l));
    }

    double u_common = std::log(static_cast<double>(spec.n)) + logL + sum_log_kin +
                      sum_log_kout;
    if (ghs) u_common += std::log(spec.c_reg_sq);
    double theta_common = 2.0 * std::log(static_cast<double>(spec.n)) +
                          2.0 * static_cast<double>(L1 - 1) + 2.0 * sum_log_B;

    RateQuantities out;
    for (std::size_t l = 0; l < L1; ++l) {
        double k1 = static_cast<double>(spec.k[l]) + 1.0;
        double lambda_pen = ghs ? 1.0 / (spec.t0 * spec.t0p) + 1.0 / spec.c_reg_sq
                                : 1.0 / (spec.t0pp * k1);
        double arg = spec.B_at(l) * spec.B_at(l) / k1 * lambda_pen;
        if (arg <= 0) throw ValueError("planner: non-positive penalty argument");
        out.u.push_back(u_common);
        out.theta.push_back(-std::log(arg) + arg + theta_common);
        out.r.push_back(spec.s_at(l) * k1 * out.theta.back() /
                        static_cast<double>(spec.n));
    }
    return out;
}

}  // namespace

RateQuantities rate_quantities_gl(const TopologySpec& spec) {
    return rate_quantities(spec, false);
}

RateQuantities rate_quantities_ghs(const TopologySpec& spec) {
    return rate_quantities(spec, true);
}

double epsilon_n(const TopologySpec& spec, const RateQuantities& rates) {
    double sum_r = 0, sum_u = 0;
    for (double r : rates.r) sum_r += r;
    for (double u : rates.u) sum_u += u;
    return std::sqrt((sum_r + spec.xi) * sum_u);
}

std::vector<double> lambda_l(const TopologySpec& spec, const RateQuantities& rates) {
    std::vector<double> out;
    std::size_t L1 = spec.n_weight_layers();
    for (std::size_t l = 0; l < L1; ++l) {
        if (l + 1 == L1) {
            out.push_back(1.0);  // no node selection in the output layer
            continue;
        }
        double k1 = static_cast<double>(spec.k[l]) + 1.0;
        double v = std::exp(-spec.C_at(l) * k1 * rates.theta[l]) /
                   static_cast<double>(spec.k[l + 1]);
        out.push_back(std::max(v, 1e-50));
    }
    return out;
}

}  // namespace ssbnn
