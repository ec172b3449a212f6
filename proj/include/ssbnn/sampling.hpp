#pragma once

#include "ssbnn/rng.hpp"
#include "ssbnn/tape.hpp"

namespace ssbnn {

/// Settings for the concrete relaxation of Bernoulli indicators.
struct RelaxationConfig {
    double temperature = 0.5;
    bool hard_forward = true;
};

/// mu + sigma*e with e ~ N(0,I). Gradients reach mu and sigma only.
/// sigma may be exactly 0 (degenerate); negative sigma is an error.
ad::NodePtr sample_gaussian_reparam(const ad::NodePtr& mu, const ad::NodePtr& sigma,
                                    SeededRng& rng);

/// exp(mu + sigma*e) for scalar nodes, e ~ N(0,1). Requires sigma > 0.
ad::NodePtr sample_lognormal(const ad::NodePtr& mu, const ad::NodePtr& sigma,
                             SeededRng& rng);

struct GumbelSample {
    ad::NodePtr z_soft;       // relaxed value in (0,1), carries the gradient
    double z_hard;            // 0 or 1, thresholded at 0.5
    ad::NodePtr z_straight;   // hard value forward, soft gradient backward
};

/// One relaxed Bernoulli draw from the inclusion logit (logit of gamma).
/// eta = gamma_logit + logit(u), z_soft = sigmoid(eta / temperature).
GumbelSample sample_gumbel_softmax_logit(const ad::NodePtr& gamma_logit,
                                         const RelaxationConfig& cfg, SeededRng& rng);

/// Convenience wrapper taking gamma in (0,1) directly.
GumbelSample sample_gumbel_softmax(double gamma, const RelaxationConfig& cfg,
                                   SeededRng& rng);

/// Vector version over a logit vector; returns the straight-through vector
/// plus the hard mask values.
struct GumbelSampleVec {
    ad::NodePtr z_soft;
    std::vector<double> z_hard;
    ad::NodePtr z_straight;
};
GumbelSampleVec sample_gumbel_softmax_vec(const ad::NodePtr& gamma_logits,
                                          const RelaxationConfig& cfg, SeededRng& rng);

/// Differentiable softplus of a parameter node.
inline ad::NodePtr softplus_transform(const ad::NodePtr& rho) { return ad::softplus(rho); }

/// Plain-tensor softplus for code outside the tape.
Tensor softplus_transform(const Tensor& rho);

}  // namespace ssbnn
