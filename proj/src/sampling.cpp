#include "ssbnn/sampling.hpp"

#include <cmath>

namespace ssbnn {

namespace ad_ = ad;

ad_::NodePtr sample_gaussian_reparam(const ad_::NodePtr& mu, const ad_::NodePtr& sigma,
                                     SeededRng& rng) {
    if (!mu->value.same_shape(sigma->value))
        throw ShapeError("sample_gaussian_reparam: mu (" + mu->value.shape_str() +
                         ") vs sigma (" + sigma->value.shape_str() + ")");
    for (double s : sigma->value.data)
        if (s < 0.0)
            throw ValueError("sample_gaussian_reparam: negative sigma");
    Tensor e(mu->value.shape);
    for (double& v : e.data) v = rng.normal();
    return ad_::add(mu, ad_::mul(sigma, ad_::constant(std::move(e))));
}

ad_::NodePtr sample_lognormal(const ad_::NodePtr& mu, const ad_::NodePtr& sigma,
                              SeededRng& rng) {
    for (double s : sigma->value.data)
        if (s <= 0.0)
            throw ValueError("sample_lognormal: sigma must be positive");
    Tensor e(mu->value.shape);
    for (double& v : e.data) v = rng.normal();
    return ad_::exp(ad_::add(mu, ad_::mul(sigma, ad_::constant(std::move(e)))));
}

namespace {

constexpr double kEpsU = 1e-10;

double clamped_logit_uniform(SeededRng& rng) {
    double u = rng.uniform();
    if (u < kEpsU) u = kEpsU;
    if (u > 1.0 - kEpsU) u = 1.0 - kEpsU;
    return std::log(u) - std::log1p(-u);
}

}  // namespace

GumbelSample sample_gumbel_softmax_logit(const ad_::NodePtr& gamma_logit,
                                         const RelaxationConfig& cfg, SeededRng& rng) {
    if (cfg.temperature <= 0.0)
        throw ValueError("sample_gumbel_softmax: temperature must be positive");
    double noise = clamped_logit_uniform(rng);
    auto eta = ad_::add(gamma_logit, noise);
    auto z_soft = ad_::sigmoid(ad_::div(eta, cfg.temperature));
    double z_hard = z_soft->value[0] >= 0.5 ? 1.0 : 0.0;
    GumbelSample out;
    out.z_soft = z_soft;
    out.z_hard = z_hard;
    if (cfg.hard_forward) {
        // value z_hard, gradient of z_soft
        out.z_straight =
            ad_::add(z_soft, ad_::constant(Tensor::scalar(z_hard - z_soft->value[0])));
    } else {
        out.z_straight = z_soft;
    }
    return out;
}

GumbelSample sample_gumbel_softmax(double gamma, const RelaxationConfig& cfg,
                                   SeededRng& rng) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw ValueError("sample_gumbel_softmax: gamma must lie in (0,1), got " +
                         std::to_string(gamma));
    auto logit = ad_::constant(Tensor::scalar(std::log(gamma) - std::log1p(-gamma)));
    return sample_gumbel_softmax_logit(logit, cfg, rng);
}

GumbelSampleVec sample_gumbel_softmax_vec(const ad_::NodePtr& gamma_logits,
                                          const RelaxationConfig& cfg, SeededRng& rng) {
    if (cfg.temperature <= 0.0)
        throw ValueError("sample_gumbel_softmax: temperature must be positive");
    std::size_t n = gamma_logits->value.size();
    Tensor noise(gamma_logits->value.shape);
    for (double& v : noise.data) v = clamped_logit_uniform(rng);
    auto eta = ad_::add(gamma_logits, ad_::constant(std::move(noise)));
    auto z_soft = ad_::sigmoid(ad_::div(eta, cfg.temperature));
    GumbelSampleVec out;
    out.z_soft = z_soft;
    out.z_hard.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.z_hard[i] = z_soft->value[i] >= 0.5 ? 1.0 : 0.0;
    if (cfg.hard_forward) {
        Tensor diff(gamma_logits->value.shape);
        for (std::size_t i = 0; i < n; ++i) diff[i] = out.z_hard[i] - z_soft->value[i];
        out.z_straight = ad_::add(z_soft, ad_::constant(std::move(diff)));
    } else {
        out.z_straight = z_soft;
    }
    return out;
}

Tensor softplus_transform(const Tensor& rho) {
    Tensor out(rho.shape);
    for (std::size_t i = 0; i < rho.size(); ++i) {
        double x = rho[i];
        out[i] = std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
    }
    return out;
}

}  // namespace ssbnn
