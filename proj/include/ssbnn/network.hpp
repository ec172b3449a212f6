#pragma once

#include "ssbnn/layer.hpp"

namespace ssbnn {

/// One minibatch. Regression targets live in y; classification labels in
/// labels (y unused).
struct Batch {
    Tensor x;  // [batch x k0]
    Tensor y;  // [batch x k_out] for regression
    std::vector<int> labels;
};

/// Independent noise streams per layer so the draw count in one family
/// never shifts another. Counters advance across steps.
struct NetRng {
    std::vector<SeededRng> weight, z, scale;

    /// stream_base offsets all stream ids so separate bundles (training
    /// vs evaluation) never share a stream.
    static NetRng make(std::uint64_t seed, std::size_t n_layers,
                       std::uint64_t stream_base = 0);
};

struct Network {
    NetworkConfig cfg;
    std::vector<LayerVariationalState> layers;
    GlobalScaleState global;
    RelaxationConfig relax;

    std::vector<ad::NodePtr> params() const {
        std::vector<ad::NodePtr> out;
        for (const auto& l : layers)
            for (const auto& p : l.params()) out.push_back(p);
        for (const auto& p : global.params()) out.push_back(p);
        return out;
    }
};

/// Builds a freshly initialized network; layer l draws its init from
/// stream 600+l of the seed.
Network init_network(const NetworkConfig& cfg, std::uint64_t seed);

std::vector<SampledLayer> sample_network(const Network& net, NetRng& rng);

/// Affine/activation alternation; no activation after the final layer.
ad::NodePtr forward(const Network& net, const ad::NodePtr& x,
                    const std::vector<SampledLayer>& sampled);

ad::NodePtr negative_log_likelihood(const ad::NodePtr& eta, const Batch& batch,
                                    Likelihood likelihood);

/// Total KL of the variational posterior to the prior (deterministic in
/// the variational parameters).
ad::NodePtr negative_elbo_kl_total(const Network& net);

struct ElboParts {
    ad::NodePtr loss;   // scaled NLL + KL
    double nll = 0.0;   // average per-sample NLL value, unscaled
    double kl = 0.0;
};

/// (n/|batch|) * (1/S) * sum_s NLL(sample s) + KL total.
ElboParts negative_elbo(const Network& net, const Batch& batch, std::size_t n,
                        std::size_t S, NetRng& rng);

struct Prediction {
    Tensor mean;                  // mean eta (regression) or mean softmax probs
    std::vector<int> arg_max;     // classification only
};

Prediction predict_posterior_mean(const Network& net, const Tensor& x, std::size_t S,
                                  NetRng& rng);

struct TruthDiagnostic {
    double kl;            // 0.5 * mean (eta0 - eta_bar)^2
    double hellinger_sq;  // mean of 1 - exp(-(eta0 - eta_bar)^2 / 8)
};

/// Compares the posterior-mean predictor against a known teacher on a
/// grid; regression only.
TruthDiagnostic kl_to_truth_diagnostic(const Network& net, const Tensor& grid_x,
                                       const Tensor& teacher_eta, std::size_t S,
                                       NetRng& rng);

}  // namespace ssbnn
