#pragma once

#include "ssbnn/kl.hpp"
#include "ssbnn/prior.hpp"
#include "ssbnn/sampling.hpp"

namespace ssbnn {

/// Shared global-scale variational parameters, one set per network.
/// SS-GL uses slot 1 for varsigma; SS-GHS uses slot 1 for zeta_b and
/// slot 2 for zeta_a. SS-IG leaves both null.
struct GlobalScaleState {
    ad::NodePtr mu_1, rho_1;
    ad::NodePtr mu_2, rho_2;

    std::vector<ad::NodePtr> params() const {
        std::vector<ad::NodePtr> out;
        for (const auto& p : {mu_1, rho_1, mu_2, rho_2})
            if (p) out.push_back(p);
        return out;
    }
};

/// All trainable variational parameters of one layer. Weight matrices are
/// [fan_out x (fan_in+1)] with the bias folded into column 0. Parameters
/// live as tape leaves so gradients accumulate into them directly.
struct LayerVariationalState {
    std::size_t fan_in = 0;
    std::size_t fan_out = 0;
    bool is_output = false;

    ad::NodePtr mu;           // weight means
    ad::NodePtr rho;          // pre-softplus weight scales
    ad::NodePtr gamma_logit;  // inclusion logits [fan_out]; null on the output layer

    // per-node log-normal scale parameters [fan_out]
    ad::NodePtr mu_local, rho_local;    // SS-GL: tau. SS-GHS: beta.
    ad::NodePtr mu_local2, rho_local2;  // SS-GHS: alpha. Null otherwise.

    std::vector<ad::NodePtr> params() const {
        std::vector<ad::NodePtr> out;
        for (const auto& p : {mu, rho, gamma_logit, mu_local, rho_local, mu_local2, rho_local2})
            if (p) out.push_back(p);
        return out;
    }

    /// Inclusion probabilities; all ones on the output layer.
    std::vector<double> gamma() const;
};

/// One Monte Carlo realization of a layer.
struct SampledLayer {
    ad::NodePtr W;               // masked weights, pruned rows exactly zero
    std::vector<double> z_hard;  // hard inclusion draws
    ad::NodePtr z_soft;          // relaxed draws (null on the output layer)
};

LayerVariationalState init_layer(std::size_t fan_in, std::size_t fan_out,
                                 const PriorSpec& prior, bool is_output, SeededRng& rng);

/// Draws weights, masks, and (non-centered) scale factors for one pass.
/// weight_rng / z_rng / scale_rng are distinct streams so draw counts in
/// one family never shift another.
SampledLayer sample_layer(const LayerVariationalState& state, const PriorSpec& prior,
                          const GlobalScaleState& global, const RelaxationConfig& cfg,
                          Parameterization param, SeededRng& weight_rng, SeededRng& z_rng,
                          SeededRng& scale_rng);

/// x [batch x fan_in] -> x * W_weights^T + bias.
ad::NodePtr layer_forward(const ad::NodePtr& x, const SampledLayer& sampled);

/// This layer's KL contribution: gamma-weighted slab KL, Bernoulli KL,
/// and local-scale KL. Global-scale terms are added once at network level.
ad::NodePtr layer_kl(const LayerVariationalState& state, const PriorSpec& prior,
                     const GlobalScaleState& global, Parameterization param,
                     double lambda_l);

/// Global-scale KL terms, counted exactly once per network.
ad::NodePtr global_scale_kl(const GlobalScaleState& global, const PriorSpec& prior);

GlobalScaleState init_global_scales(const PriorSpec& prior);

std::vector<int> active_nodes(const LayerVariationalState& state, double threshold = 0.5);

}  // namespace ssbnn
