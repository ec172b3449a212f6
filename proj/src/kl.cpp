#include "ssbnn/kl.hpp"

#include <cmath>

namespace ssbnn::kl {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;

using ad::NodePtr;

void check_ln(const LogNormalParams& q, const char* who) {
    if (q.sigma <= 0.0)
        throw ValueError(std::string(who) + ": log-normal sigma must be positive");
}

}  // namespace

double bernoulli(double gamma, double lambda) {
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw ValueError("kl_bernoulli: gamma must lie in (0,1], got " +
                         std::to_string(gamma));
    if (lambda <= 0.0)
        throw ValueError("kl_bernoulli: lambda must be positive (infinite KL at 0)");
    if (lambda >= 1.0) {
        if (gamma < 1.0)
            throw ValueError("kl_bernoulli: lambda=1 with gamma<1 gives infinite KL");
        return 0.0;
    }
    double out = gamma * std::log(gamma / lambda);
    if (gamma < 1.0) out += (1.0 - gamma) * std::log((1.0 - gamma) / (1.0 - lambda));
    return out;
}

double lognormal_gamma(const LogNormalParams& q, const GammaParams& p) {
    check_ln(q, "kl_lognormal_gamma");
    if (p.shape <= 0.0 || p.rate <= 0.0)
        throw ValueError("kl_lognormal_gamma: gamma parameters must be positive");
    return std::lgamma(p.shape) - p.shape * std::log(p.rate) - p.shape * q.mu +
           p.rate * std::exp(q.mu + 0.5 * q.sigma * q.sigma) - std::log(q.sigma) -
           kHalfLog2Pi - 0.5;
}

double lognormal_invgamma(const LogNormalParams& q, const InvGammaParams& p) {
    check_ln(q, "kl_lognormal_invgamma");
    if (p.shape <= 0.0 || p.rate <= 0.0)
        throw ValueError("kl_lognormal_invgamma: parameters must be positive");
    return std::lgamma(p.shape) - p.shape * std::log(p.rate) + p.shape * q.mu +
           p.rate * std::exp(-q.mu + 0.5 * q.sigma * q.sigma) - std::log(q.sigma) -
           kHalfLog2Pi - 0.5;
}

double expected_gaussian_slab_gl(const Tensor& mu, const Tensor& sigma, double sigma0_sq,
                                 const LogNormalParams& tau) {
    if (!mu.same_shape(sigma))
        throw ShapeError("expected_kl_gaussian_slab_gl: mu (" + mu.shape_str() +
                         ") vs sigma (" + sigma.shape_str() + ")");
    if (sigma0_sq <= 0.0)
        throw ValueError("expected_kl_gaussian_slab_gl: sigma0^2 must be positive");
    check_ln(tau, "expected_kl_gaussian_slab_gl");
    double e_inv_tau2 = std::exp(-tau.mu + 0.5 * tau.sigma * tau.sigma);
    double total = 0.0;
    for (std::size_t j = 0; j < mu.size(); ++j) {
        double s = sigma[j];
        if (s <= 0.0)
            throw ValueError("expected_kl_gaussian_slab_gl: sigma must be positive");
        total += 0.5 * (std::log(sigma0_sq) - std::log(s * s) + tau.mu) +
                 (s * s + mu[j] * mu[j]) / (2.0 * sigma0_sq) * e_inv_tau2 - 0.5;
    }
    return total;
}

double expected_lognormal_gamma_random_rate(const LogNormalParams& tau, int k_l,
                                            const LogNormalParams& varsigma) {
    if (k_l < 1)
        throw ValueError("expected_kl_lognormal_gamma_random_rate: k_l must be >= 1");
    check_ln(tau, "expected_kl_lognormal_gamma_random_rate");
    check_ln(varsigma, "expected_kl_lognormal_gamma_random_rate");
    double a = 0.5 * (k_l + 2);
    return a * (std::log(2.0) - tau.mu - varsigma.mu) + std::lgamma(a) +
           0.5 * std::exp(tau.mu + 0.5 * tau.sigma * tau.sigma + varsigma.mu +
                          0.5 * varsigma.sigma * varsigma.sigma) -
           std::log(tau.sigma) - kHalfLog2Pi - 0.5;
}

double expected_gaussian_slab_ghs(const Tensor& mu, const Tensor& sigma, double sigma0_sq,
                                  double c_reg_sq, const LogNormalParams& beta,
                                  const LogNormalParams& alpha, const LogNormalParams& zeta_b,
                                  const LogNormalParams& zeta_a) {
    if (!mu.same_shape(sigma))
        throw ShapeError("expected_kl_gaussian_slab_ghs: mu (" + mu.shape_str() +
                         ") vs sigma (" + sigma.shape_str() + ")");
    if (sigma0_sq <= 0.0 || c_reg_sq <= 0.0)
        throw ValueError("expected_kl_gaussian_slab_ghs: scales must be positive");
    double m = beta.mu + alpha.mu + zeta_b.mu + zeta_a.mu;
    double s2 = beta.sigma * beta.sigma + alpha.sigma * alpha.sigma +
                zeta_b.sigma * zeta_b.sigma + zeta_a.sigma * zeta_a.sigma;
    // plug-in for E[log(c^2 + T)] with log T ~ N(m, s2)
    double elog = std::log(c_reg_sq + std::exp(m + 0.5 * s2));
    double escale = std::exp(-m + 0.5 * s2) + 1.0 / c_reg_sq;
    double total = 0.0;
    for (std::size_t j = 0; j < mu.size(); ++j) {
        double s = sigma[j];
        if (s <= 0.0)
            throw ValueError("expected_kl_gaussian_slab_ghs: sigma must be positive");
        total += 0.5 * (std::log(sigma0_sq) + std::log(c_reg_sq) - std::log(s * s) + m -
                        elog) +
                 (s * s + mu[j] * mu[j]) / (2.0 * sigma0_sq) * escale - 0.5;
    }
    return total;
}

double gaussian_slab_fixed(const Tensor& mu, const Tensor& sigma, double s0_sq) {
    if (!mu.same_shape(sigma))
        throw ShapeError("gaussian_slab_fixed: mu (" + mu.shape_str() + ") vs sigma (" +
                         sigma.shape_str() + ")");
    if (s0_sq <= 0.0) throw ValueError("gaussian_slab_fixed: s0^2 must be positive");
    double total = 0.0;
    for (std::size_t j = 0; j < mu.size(); ++j) {
        double s = sigma[j];
        total += 0.5 * (std::log(s0_sq) - std::log(s * s)) +
                 (s * s + mu[j] * mu[j]) / (2.0 * s0_sq) - 0.5;
    }
    return total;
}

// tape builders

NodePtr bernoulli_node(const NodePtr& gamma, double lambda) {
    if (lambda <= 0.0 || lambda >= 1.0)
        throw ValueError("kl_bernoulli: lambda must lie in (0,1) on the tape");
    using namespace ad;
    auto one_minus = sub(1.0, gamma);
    auto t1 = mul(gamma, sub(log(gamma), std::log(lambda)));
    auto t2 = mul(one_minus, sub(log(one_minus), std::log1p(-lambda)));
    return add(t1, t2);
}

NodePtr lognormal_gamma_node(const LogNormalNode& q, const GammaParams& p) {
    using namespace ad;
    auto evar = exp(add(q.mu, mul(square(q.sigma), 0.5)));
    auto out = add(mul(evar, p.rate),
                   std::lgamma(p.shape) - p.shape * std::log(p.rate) - kHalfLog2Pi - 0.5);
    out = sub(out, mul(q.mu, p.shape));
    return sub(out, log(q.sigma));
}

NodePtr lognormal_invgamma_node(const LogNormalNode& q, const InvGammaParams& p) {
    using namespace ad;
    auto evar = exp(add(neg(q.mu), mul(square(q.sigma), 0.5)));
    auto out = add(mul(evar, p.rate),
                   std::lgamma(p.shape) - p.shape * std::log(p.rate) - kHalfLog2Pi - 0.5);
    out = add(out, mul(q.mu, p.shape));
    return sub(out, log(q.sigma));
}

NodePtr expected_gaussian_slab_gl_node(const NodePtr& mu, const NodePtr& sigma,
                                       double sigma0_sq, const LogNormalNode& tau) {
    using namespace ad;
    double d = static_cast<double>(mu->value.size());
    auto e_inv = exp(add(neg(tau.mu), mul(square(tau.sigma), 0.5)));
    auto quad = div(sum(add(square(sigma), square(mu))), 2.0 * sigma0_sq);
    auto logs = mul(sum(log(sigma)), 2.0);
    auto out = mul(add(sub(mul(tau.mu, d), logs), d * std::log(sigma0_sq)), 0.5);
    out = add(out, mul(e_inv, quad));
    return sub(out, 0.5 * d);
}

NodePtr expected_lognormal_gamma_random_rate_node(const LogNormalNode& tau, int k_l,
                                                  const LogNormalNode& varsigma) {
    using namespace ad;
    if (k_l < 1)
        throw ValueError("expected_kl_lognormal_gamma_random_rate: k_l must be >= 1");
    double a = 0.5 * (k_l + 2);
    auto exponent = add(add(tau.mu, mul(square(tau.sigma), 0.5)),
                        add(varsigma.mu, mul(square(varsigma.sigma), 0.5)));
    auto out = mul(exp(exponent), 0.5);
    out = add(out, mul(neg(add(tau.mu, varsigma.mu)), a));
    out = sub(out, log(tau.sigma));
    return add(out, a * std::log(2.0) + std::lgamma(a) - kHalfLog2Pi - 0.5);
}

NodePtr expected_gaussian_slab_ghs_node(const NodePtr& mu, const NodePtr& sigma,
                                        double sigma0_sq, double c_reg_sq,
                                        const LogNormalNode& beta, const LogNormalNode& alpha,
                                        const LogNormalNode& zeta_b,
                                        const LogNormalNode& zeta_a) {
    using namespace ad;
    if (c_reg_sq <= 0.0)
        throw ValueError("expected_kl_gaussian_slab_ghs: c_reg^2 must be positive");
    double d = static_cast<double>(mu->value.size());
    auto m = add(add(beta.mu, alpha.mu), add(zeta_b.mu, zeta_a.mu));
    auto s2 = add(add(square(beta.sigma), square(alpha.sigma)),
                  add(square(zeta_b.sigma), square(zeta_a.sigma)));
    auto half_s2 = mul(s2, 0.5);
    auto elog = log(add(exp(add(m, half_s2)), c_reg_sq));
    auto escale = add(exp(add(neg(m), half_s2)), 1.0 / c_reg_sq);
    auto quad = div(sum(add(square(sigma), square(mu))), 2.0 * sigma0_sq);
    auto logs = mul(sum(log(sigma)), 2.0);
    auto out = mul(sub(sub(mul(m, d), logs), mul(elog, d)), 0.5);
    out = add(out, 0.5 * d * (std::log(sigma0_sq) + std::log(c_reg_sq)) - 0.5 * d);
    return add(out, mul(escale, quad));
}

NodePtr gaussian_slab_fixed_node(const NodePtr& mu, const NodePtr& sigma, double s0_sq) {
    using namespace ad;
    double d = static_cast<double>(mu->value.size());
    auto quad = div(sum(add(square(sigma), square(mu))), 2.0 * s0_sq);
    auto logs = mul(sum(log(sigma)), 2.0);
    auto out = add(mul(neg(logs), 0.5), quad);
    return add(out, 0.5 * d * std::log(s0_sq) - 0.5 * d);
}

}  // namespace ssbnn::kl
