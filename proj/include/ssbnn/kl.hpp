#pragma once

#include "ssbnn/tape.hpp"

namespace ssbnn {

/// Parameters of a log-normal variational factor: mean and std of the log.
struct LogNormalParams {
    double mu;
    double sigma;
};

struct GammaParams {
    double shape;
    double rate;
};

struct InvGammaParams {
    double shape;
    double rate;
};

/// Log-normal factor living on the tape (sigma already softplus-transformed).
struct LogNormalNode {
    ad::NodePtr mu;
    ad::NodePtr sigma;
};

namespace kl {

// Scalar closed forms. Each matches a Monte Carlo oracle in the tests.

/// KL(Ber(gamma) || Ber(lambda)). gamma may be 1 (output layer).
double bernoulli(double gamma, double lambda);

/// KL(LN(q) || Gamma(a, rate b)).
double lognormal_gamma(const LogNormalParams& q, const GammaParams& p);

/// KL(LN(q) || InvGamma(a, rate b)).
double lognormal_invgamma(const LogNormalParams& q, const InvGammaParams& p);

/// E_{tau^2 ~ LN(tau_params)} KL(N(mu, diag sigma^2) || N(0, sigma0^2 tau^2 I)).
double expected_gaussian_slab_gl(const Tensor& mu, const Tensor& sigma, double sigma0_sq,
                                 const LogNormalParams& tau);

/// E_{varsigma^2 ~ LN} KL(LN(tau) || Gamma((k_l+2)/2, varsigma^2/2)).
double expected_lognormal_gamma_random_rate(const LogNormalParams& tau, int k_l,
                                            const LogNormalParams& varsigma);

/// Expected Gaussian slab KL under the regularized horseshoe scale
/// sigma0^2 * ttilde^2 * zeta^2, with the plug-in approximation for
/// E[log(c_reg^2 + beta alpha zeta_b zeta_a)].
double expected_gaussian_slab_ghs(const Tensor& mu, const Tensor& sigma, double sigma0_sq,
                                  double c_reg_sq, const LogNormalParams& beta,
                                  const LogNormalParams& alpha, const LogNormalParams& zeta_b,
                                  const LogNormalParams& zeta_a);

// Tape builders for the same quantities, so layer KL terms backpropagate.
// All LogNormalNode sigmas and the weight sigma are post-softplus nodes.

ad::NodePtr bernoulli_node(const ad::NodePtr& gamma, double lambda);
ad::NodePtr lognormal_gamma_node(const LogNormalNode& q, const GammaParams& p);
ad::NodePtr lognormal_invgamma_node(const LogNormalNode& q, const InvGammaParams& p);
ad::NodePtr expected_gaussian_slab_gl_node(const ad::NodePtr& mu, const ad::NodePtr& sigma,
                                           double sigma0_sq, const LogNormalNode& tau);
ad::NodePtr expected_lognormal_gamma_random_rate_node(const LogNormalNode& tau, int k_l,
                                                      const LogNormalNode& varsigma);
ad::NodePtr expected_gaussian_slab_ghs_node(const ad::NodePtr& mu, const ad::NodePtr& sigma,
                                            double sigma0_sq, double c_reg_sq,
                                            const LogNormalNode& beta,
                                            const LogNormalNode& alpha,
                                            const LogNormalNode& zeta_b,
                                            const LogNormalNode& zeta_a);

/// KL(N(mu, diag sigma^2) || N(0, s0^2 I)), used by the non-centered slab.
ad::NodePtr gaussian_slab_fixed_node(const ad::NodePtr& mu, const ad::NodePtr& sigma,
                                     double s0_sq);
double gaussian_slab_fixed(const Tensor& mu, const Tensor& sigma, double s0_sq);

}  // namespace kl
}  // namespace ssbnn
