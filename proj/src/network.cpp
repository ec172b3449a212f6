#include "ssbnn/network.hpp"

#include <cmath>

namespace ssbnn {

namespace {
constexpr double kHalfLog2Pi = 0.9189385332046727;
}

NetRng NetRng::make(std::uint64_t seed, std::size_t n_layers, std::uint64_t stream_base) {
    NetRng r;
    for (std::size_t l = 0; l < n_layers; ++l) {
        r.weight.emplace_back(seed, stream_base + 100 + l);
        r.z.emplace_back(seed, stream_base + 200 + l);
        r.scale.emplace_back(seed, stream_base + 300 + l);
    }
    return r;
}

Network init_network(const NetworkConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Network net;
    net.cfg = cfg;
    std::size_t L1 = cfg.n_layers();
    for (std::size_t l = 0; l < L1; ++l) {
        SeededRng rng(seed, 600 + l);
        bool is_output = (l + 1 == L1);
        net.layers.push_back(
            init_layer(cfg.widths[l], cfg.widths[l + 1], cfg.prior, is_output, rng));
    }
    net.global = init_global_scales(cfg.prior);
    return net;
}

std::vector<SampledLayer> sample_network(const Network& net, NetRng& rng) {
    std::vector<SampledLayer> out;
    for (std::size_t l = 0; l < net.layers.size(); ++l)
        out.push_back(sample_layer(net.layers[l], net.cfg.prior, net.global, net.relax,
                                   net.cfg.parameterization, rng.weight[l], rng.z[l],
                                   rng.scale[l]));
    return out;
}

ad::NodePtr forward(const Network& net, const ad::NodePtr& x,
                    const std::vector<SampledLayer>& sampled) {
    if (x->value.cols() != net.cfg.widths[0])
        throw ShapeError("forward: input width " + std::to_string(x->value.cols()) +
                         " != k0 " + std::to_string(net.cfg.widths[0]));
    auto h = x;
    for (std::size_t l = 0; l < sampled.size(); ++l) {
        h = layer_forward(h, sampled[l]);
        if (l + 1 < sampled.size())
            h = net.cfg.activation == Activation::Swish
                    ? ad::swish(h)
                    : ad::max(h, ad::constant(Tensor::scalar(0.0)));
    }
    return h;
}

ad::NodePtr negative_log_likelihood(const ad::NodePtr& eta, const Batch& batch,
                                    Likelihood likelihood) {
    if (likelihood == Likelihood::GaussianRegression) {
        if (!eta->value.same_shape(batch.y))
            throw ShapeError("negative_log_likelihood: eta (" + eta->value.shape_str() +
                             ") vs y (" + batch.y.shape_str() + ")");
        auto resid = ad::sub(eta, ad::constant(batch.y));
        return ad::add(ad::mul(ad::sum(ad::square(resid)), 0.5),
                       kHalfLog2Pi * static_cast<double>(batch.y.size()));
    }
    return ad::cross_entropy_sum(eta, batch.labels);
}

ad::NodePtr negative_elbo_kl_total(const Network& net) {
    const auto& prior = net.cfg.prior;
    std::size_t L1 = net.layers.size();
    ad::NodePtr total;
    for (std::size_t l = 0; l < L1; ++l) {
        auto term = layer_kl(net.layers[l], prior, net.global, net.cfg.parameterization,
                             prior.lambda_for(l, L1));
        total = total ? ad::add(total, term) : term;
    }
    return ad::add(total, global_scale_kl(net.global, prior));
}

ElboParts negative_elbo(const Network& net, const Batch& batch, std::size_t n,
                        std::size_t S, NetRng& rng) {
    if (S < 1) throw ValueError("negative_elbo: S must be >= 1");
    std::size_t b = batch.x.rows();
    if (b == 0) throw ValueError("negative_elbo: empty batch");
    auto x = ad::constant(batch.x);
    ad::NodePtr nll_sum;
    for (std::size_t s = 0; s < S; ++s) {
        auto sampled = sample_network(net, rng);
        auto eta = forward(net, x, sampled);
        auto nll = negative_log_likelihood(eta, batch, net.cfg.likelihood);
        nll_sum = nll_sum ? ad::add(nll_sum, nll) : nll;
    }
    auto nll_avg = ad::div(nll_sum, static_cast<double>(S));
    auto kl = negative_elbo_kl_total(net);
    ElboParts out;
    out.nll = nll_avg->value[0];
    out.kl = kl->value[0];
    out.loss = ad::add(
        ad::mul(nll_avg, static_cast<double>(n) / static_cast<double>(b)), kl);
    return out;
}

Prediction predict_posterior_mean(const Network& net, const Tensor& x, std::size_t S,
                                  NetRng& rng) {
    if (S < 1) throw ValueError("predict_posterior_mean: S must be >= 1");
    std::size_t b = x.rows();
    std::size_t k_out = net.cfg.widths.back();
    Tensor acc({b, k_out});
    auto xc = ad::constant(x);
    for (std::size_t s = 0; s < S; ++s) {
        auto sampled = sample_network(net, rng);
        auto eta = forward(net, xc, sampled);
        if (net.cfg.likelihood == Likelihood::Categorical) {
            // accumulate softmax probabilities
            for (std::size_t i = 0; i < b; ++i) {
                const double* row = &eta->value.data[i * k_out];
                double m = row[0];
                for (std::size_t j = 1; j < k_out; ++j) m = std::max(m, row[j]);
                double z = 0;
                for (std::size_t j = 0; j < k_out; ++j) z += std::exp(row[j] - m);
                for (std::size_t j = 0; j < k_out; ++j)
                    acc.data[i * k_out + j] += std::exp(row[j] - m) / z;
            }
        } else {
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += eta->value[i];
        }
    }
    for (double& v : acc.data) v /= static_cast<double>(S);
    Prediction pred;
    pred.mean = std::move(acc);
    if (net.cfg.likelihood == Likelihood::Categorical) {
        pred.arg_max.resize(b);
        for (std::size_t i = 0; i < b; ++i) {
            std::size_t best = 0;
            for (std::size_t j = 1; j < k_out; ++j)
                if (pred.mean.data[i * k_out + j] > pred.mean.data[i * k_out + best]) best = j;
            pred.arg_max[i] = static_cast<int>(best);
        }
    }
    return pred;
}

TruthDiagnostic kl_to_truth_diagnostic(const Network& net, const Tensor& grid_x,
                                       const Tensor& teacher_eta, std::size_t S,
                                       NetRng& rng) {
    if (net.cfg.likelihood != Likelihood::GaussianRegression)
        throw ValueError("kl_to_truth_diagnostic: regression likelihood required");
    auto pred = predict_posterior_mean(net, grid_x, S, rng);
    if (!pred.mean.same_shape(teacher_eta))
        throw ShapeError("kl_to_truth_diagnostic: prediction (" + pred.mean.shape_str() +
                         ") vs teacher (" + teacher_eta.shape_str() + ")");
    double kl = 0, hell = 0;
    for (std::size_t i = 0; i < teacher_eta.size(); ++i) {
        double d = teacher_eta[i] - pred.mean[i];
        kl += 0.5 * d * d;
        hell += 1.0 - std::exp(-d * d / 8.0);
    }
    double inv = 1.0 / static_cast<double>(teacher_eta.size());
    return {kl * inv, hell * inv};
}

}  // namespace ssbnn
