#pragma once

#include "ssbnn/dataset.hpp"
#include "ssbnn/metrics.hpp"
#include "ssbnn/network.hpp"
#include "ssbnn/optimizer.hpp"

#include <iosfwd>

namespace ssbnn {

struct TrainConfig {
    std::size_t epochs = 1;
    std::size_t batch_size = 1024;
    std::size_t S = 1;
    double lr = 1e-3;
    std::uint64_t seed = 0;
    double elbo_tolerance = -1.0;  // negative disables early stopping
    std::size_t eval_samples = 10;
    OptimizerKind optimizer = OptimizerKind::Adam;
    double grad_clip = 0.0;  // per-element gradient clamp; 0 disables

    void validate() const {
        if (epochs < 1) throw ValueError("train: epochs must be >= 1");
        if (batch_size < 1) throw ValueError("train: batch size must be >= 1");
        if (S < 1) throw ValueError("train: S must be >= 1");
        if (grad_clip < 0) throw ValueError("train: grad_clip must be >= 0");
    }
};

struct EpochMetrics {
    std::size_t epoch;
    double elbo;  // negative ELBO estimate, averaged over minibatches
    double nll;
    double kl;
    double score;  // accuracy (classification) or RMSE (regression)
    std::vector<double> node_sparsity;
    double compression;
    double flops_ratio;
};

using MetricTrace = std::vector<EpochMetrics>;

void write_metrics_csv(std::ostream& out, const MetricTrace& trace);

/// True once the per-epoch ELBO change stayed within eps for a window of
/// three consecutive epochs.
bool early_stop(const std::vector<double>& elbo_trace, double eps);

/// Accuracy or RMSE of the posterior-mean predictor.
double evaluate(const Network& net, const Dataset& data, std::size_t S, NetRng& rng);

/// Algorithm: per minibatch, S sampled forward passes build the negative
/// ELBO; backward; optimizer step. Deterministic in (seed, config, data).
MetricTrace train(Network& net, const Dataset& train_data, const Dataset* test_data,
                  const TrainConfig& cfg);

}  // namespace ssbnn
