#include "ssbnn/layer.hpp"

#include <cmath>

namespace ssbnn {

namespace {

using ad::NodePtr;

constexpr double kHalfLog2Pi = 0.9189385332046727;
constexpr double kLogGammaHalf = 0.5723649429247001;  // log Gamma(1/2)

Tensor uniform_tensor(std::vector<std::size_t> shape, double lo, double hi, SeededRng& rng) {
    Tensor t(std::move(shape));
    for (double& v : t.data) v = lo + (hi - lo) * rng.uniform();
    return t;
}

/// exp(mu + sigma*e) elementwise with fresh normal noise; gradient flows
/// through the exponent.
NodePtr lognormal_vec(const NodePtr& mu, const NodePtr& rho, SeededRng& rng) {
    auto sigma = ad::softplus(rho);
    Tensor e(mu->value.shape);
    for (double& v : e.data) v = rng.normal();
    return ad::exp(ad::add(mu, ad::mul(sigma, ad::constant(std::move(e)))));
}

}  // namespace

std::vector<double> LayerVariationalState::gamma() const {
    std::vector<double> out(fan_out, 1.0);
    if (gamma_logit)
        for (std::size_t j = 0; j < fan_out; ++j) {
            double x = gamma_logit->value[j];
            out[j] = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
        }
    return out;
}

LayerVariationalState init_layer(std::size_t fan_in, std::size_t fan_out,
                                 const PriorSpec& prior, bool is_output, SeededRng& rng) {
    if (fan_in < 1 || fan_out < 1) throw ValueError("init_layer: fan_in/fan_out must be >= 1");
    LayerVariationalState st;
    st.fan_in = fan_in;
    st.fan_out = fan_out;
    st.is_output = is_output;

    double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    st.mu = ad::leaf(uniform_tensor({fan_out, fan_in + 1}, -bound, bound, rng));
    st.rho = ad::leaf(Tensor::full({fan_out, fan_in + 1}, -6.0));

    if (!is_output) {
        double logit99 = std::log(0.99 / 0.01);
        st.gamma_logit = ad::leaf(Tensor::full({fan_out}, logit99));
    }

    if (prior.kind == PriorKind::SS_GL) {
        st.mu_local = ad::leaf(uniform_tensor({fan_out}, -0.6, 0.6, rng));
        st.rho_local = ad::leaf(Tensor::full({fan_out}, -6.0));
    } else if (prior.kind == PriorKind::SS_GHS) {
        st.mu_local = ad::leaf(uniform_tensor({fan_out}, -0.6, 0.6, rng));
        st.rho_local = ad::leaf(Tensor::full({fan_out}, -6.0));
        st.mu_local2 = ad::leaf(uniform_tensor({fan_out}, -0.6, 0.6, rng));
        st.rho_local2 = ad::leaf(Tensor::full({fan_out}, -6.0));
    }
    return st;
}

GlobalScaleState init_global_scales(const PriorSpec& prior) {
    GlobalScaleState g;
    if (prior.kind == PriorKind::SS_GL) {
        g.mu_1 = ad::leaf(Tensor::scalar(1.0));
        g.rho_1 = ad::leaf(Tensor::scalar(-6.0));
    } else if (prior.kind == PriorKind::SS_GHS) {
        g.mu_1 = ad::leaf(Tensor::scalar(1.0));  // zeta_b
        g.rho_1 = ad::leaf(Tensor::scalar(-6.0));
        g.mu_2 = ad::leaf(Tensor::scalar(1.0));  // zeta_a
        g.rho_2 = ad::leaf(Tensor::scalar(-6.0));
    }
    return g;
}

SampledLayer sample_layer(const LayerVariationalState& state, const PriorSpec& prior,
                          const GlobalScaleState& global, const RelaxationConfig& cfg,
                          Parameterization param, SeededRng& weight_rng, SeededRng& z_rng,
                          SeededRng& scale_rng) {
    auto sigma = ad::softplus(state.rho);
    auto w_raw = sample_gaussian_reparam(state.mu, sigma, weight_rng);

    NodePtr row_factor;  // per-node multiplier applied to the raw draw
    SampledLayer out;

    if (state.is_output) {
        out.z_hard.assign(state.fan_out, 1.0);
    } else {
        auto gs = sample_gumbel_softmax_vec(state.gamma_logit, cfg, z_rng);
        out.z_hard = gs.z_hard;
        out.z_soft = gs.z_soft;
        row_factor = gs.z_straight;
    }

    if (param == Parameterization::NonCentered) {
        NodePtr tau_star;
        if (prior.kind == PriorKind::SS_GL) {
            // tau* = sqrt(tau^2), tau^2 ~ LN per node
            auto tau_sq = lognormal_vec(state.mu_local, state.rho_local, scale_rng);
            tau_star = ad::sqrt(tau_sq);
        } else if (prior.kind == PriorKind::SS_GHS) {
            // tau*^2 = c^2 T / (c^2 + T), T = beta alpha zeta_a zeta_b
            auto beta = lognormal_vec(state.mu_local, state.rho_local, scale_rng);
            auto alpha = lognormal_vec(state.mu_local2, state.rho_local2, scale_rng);
            auto zeta_b = lognormal_vec(global.mu_1, global.rho_1, scale_rng);
            auto zeta_a = lognormal_vec(global.mu_2, global.rho_2, scale_rng);
            auto T = ad::mul(ad::mul(beta, alpha), ad::mul(zeta_b, zeta_a));
            auto tau_star_sq = ad::div(ad::mul(T, prior.c_reg_sq),
                                       ad::add(T, prior.c_reg_sq));
            tau_star = ad::sqrt(tau_star_sq);
        }
        if (tau_star)
            row_factor = row_factor ? ad::mul(row_factor, tau_star) : tau_star;
    }

    out.W = row_factor ? ad::scale_rows(w_raw, row_factor) : w_raw;
    return out;
}

ad::NodePtr layer_forward(const ad::NodePtr& x, const SampledLayer& sampled) {
    std::size_t want = sampled.W->value.cols() - 1;
    if (x->value.cols() != want)
        throw ShapeError("layer_forward: input width " + std::to_string(x->value.cols()) +
                         " != fan_in " + std::to_string(want));
    return ad::matmul_transpose_b(ad::prepend_ones(x), sampled.W);
}

ad::NodePtr layer_kl(const LayerVariationalState& state, const PriorSpec& prior,
                     const GlobalScaleState& global, Parameterization param,
                     double lambda_l) {
    using namespace ad;
    double d = static_cast<double>(state.fan_in + 1);
    auto sigma = softplus(state.rho);
    auto logs_row = mul(row_sum(log(sigma)), 2.0);  // sum_i log sigma_ji^2 per node
    auto quad_row = div(row_sum(add(square(sigma), square(state.mu))),
                        2.0 * prior.sigma0_sq);

    // slab KL per node
    NodePtr slab;
    bool fixed_scale_slab =
        prior.kind == PriorKind::SS_IG || param == Parameterization::NonCentered;
    if (fixed_scale_slab) {
        slab = add(add(mul(neg(logs_row), 0.5), quad_row),
                   0.5 * d * std::log(prior.sigma0_sq) - 0.5 * d);
    } else if (prior.kind == PriorKind::SS_GL) {
        auto sigma_tau = softplus(state.rho_local);
        auto e_inv = exp(add(neg(state.mu_local), mul(square(sigma_tau), 0.5)));
        slab = mul(add(sub(mul(state.mu_local, d), logs_row), d * std::log(prior.sigma0_sq)),
                   0.5);
        slab = add(slab, mul(e_inv, quad_row));
        slab = sub(slab, 0.5 * d);
    } else {  // SS_GHS centered
        auto s_b = softplus(state.rho_local);
        auto s_a = softplus(state.rho_local2);
        auto s_zb = softplus(global.rho_1);
        auto s_za = softplus(global.rho_2);
        auto m = add(add(state.mu_local, state.mu_local2), add(global.mu_1, global.mu_2));
        auto s2 = add(add(square(s_b), square(s_a)), add(square(s_zb), square(s_za)));
        auto half_s2 = mul(s2, 0.5);
        auto elog = log(add(exp(add(m, half_s2)), prior.c_reg_sq));
        auto escale = add(exp(add(neg(m), half_s2)), 1.0 / prior.c_reg_sq);
        slab = mul(sub(sub(mul(m, d), logs_row), mul(elog, d)), 0.5);
        slab = add(slab, 0.5 * d * (std::log(prior.sigma0_sq) + std::log(prior.c_reg_sq)) -
                             0.5 * d);
        slab = add(slab, mul(escale, quad_row));
    }

    NodePtr total;
    if (state.is_output) {
        total = sum(slab);  // gamma = 1, lambda = 1: no Bernoulli term
    } else {
        auto gamma = sigmoid(state.gamma_logit);
        total = sum(mul(gamma, slab));
        if (lambda_l < 1.0)
            total = add(total, sum(kl::bernoulli_node(gamma, lambda_l)));
    }

    // local-scale KL (also present on the output layer)
    if (prior.kind == PriorKind::SS_GL) {
        int k_l = static_cast<int>(state.fan_in);
        double a = 0.5 * (k_l + 2);
        auto sigma_tau = softplus(state.rho_local);
        auto s_vs = softplus(global.rho_1);
        auto exponent = add(add(state.mu_local, mul(square(sigma_tau), 0.5)),
                            add(global.mu_1, mul(square(s_vs), 0.5)));
        auto term = mul(exp(exponent), 0.5);
        term = add(term, mul(neg(add(state.mu_local, global.mu_1)), a));
        term = sub(term, log(sigma_tau));
        term = add(term, a * std::log(2.0) + std::lgamma(a) - kHalfLog2Pi - 0.5);
        total = add(total, sum(term));
    } else if (prior.kind == PriorKind::SS_GHS) {
        // beta ~ IG(1/2, 1), alpha ~ G(1/2, 1)
        auto s_b = softplus(state.rho_local);
        auto s_a = softplus(state.rho_local2);
        auto kl_beta = add(
            sub(add(mul(state.mu_local, 0.5), exp(add(neg(state.mu_local), mul(square(s_b), 0.5)))),
                log(s_b)),
            kLogGammaHalf - kHalfLog2Pi - 0.5);
        auto kl_alpha = add(
            sub(add(mul(state.mu_local2, -0.5), exp(add(state.mu_local2, mul(square(s_a), 0.5)))),
                log(s_a)),
            kLogGammaHalf - kHalfLog2Pi - 0.5);
        total = add(total, add(sum(kl_beta), sum(kl_alpha)));
    }
    return total;
}

ad::NodePtr global_scale_kl(const GlobalScaleState& global, const PriorSpec& prior) {
    using namespace ad;
    if (prior.kind == PriorKind::SS_GL) {
        LogNormalNode q{global.mu_1, softplus(global.rho_1)};
        return kl::lognormal_gamma_node(q, GammaParams{prior.a0, prior.b0});
    }
    if (prior.kind == PriorKind::SS_GHS) {
        LogNormalNode zb{global.mu_1, softplus(global.rho_1)};
        LogNormalNode za{global.mu_2, softplus(global.rho_2)};
        auto t1 = kl::lognormal_invgamma_node(zb, InvGammaParams{0.5, 1.0});
        auto t2 = kl::lognormal_gamma_node(za, GammaParams{0.5, 1.0 / prior.d0_sq});
        return add(t1, t2);
    }
    return constant(Tensor::scalar(0.0));
}

std::vector<int> active_nodes(const LayerVariationalState& state, double threshold) {
    std::vector<int> out(state.fan_out, 1);
    auto g = state.gamma();
    for (std::size_t j = 0; j < state.fan_out; ++j) out[j] = g[j] > threshold ? 1 : 0;
    return out;
}

}  // namespace ssbnn
