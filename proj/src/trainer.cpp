#include "ssbnn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

namespace ssbnn {

void write_metrics_csv(std::ostream& out, const MetricTrace& trace) {
    std::size_t n_layers = trace.empty() ? 0 : trace.front().node_sparsity.size();
    out << "epoch,elbo,nll,kl,score";
    for (std::size_t l = 0; l < n_layers; ++l) out << ",sparsity_l" << l;
    out << ",compression,flops_ratio\n";
    out.precision(12);
    for (const auto& m : trace) {
        out << m.epoch << ',' << m.elbo << ',' << m.nll << ',' << m.kl << ',' << m.score;
        for (double s : m.node_sparsity) out << ',' << s;
        out << ',' << m.compression << ',' << m.flops_ratio << '\n';
    }
}

bool early_stop(const std::vector<double>& elbo_trace, double eps) {
    if (eps < 0.0) return false;
    if (elbo_trace.size() < 4) return false;
    std::size_t n = elbo_trace.size();
    for (std::size_t i = n - 3; i < n; ++i)
        if (std::abs(elbo_trace[i] - elbo_trace[i - 1]) > eps) return false;
    return true;
}

double evaluate(const Network& net, const Dataset& data, std::size_t S, NetRng& rng) {
    auto pred = predict_posterior_mean(net, data.inputs, S, rng);
    if (data.is_classification()) {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < data.labels.size(); ++i)
            if (pred.arg_max[i] == data.labels[i]) ++hits;
        return static_cast<double>(hits) / static_cast<double>(data.labels.size());
    }
    double se = 0;
    for (std::size_t i = 0; i < data.targets.size(); ++i) {
        double d = pred.mean[i] - data.targets[i];
        se += d * d;
    }
    return std::sqrt(se / static_cast<double>(data.targets.size()));
}

namespace {

void check_finite_loss(const ElboParts& parts, std::size_t epoch) {
    if (std::isfinite(parts.loss->value[0])) return;
    const char* term = "loss";
    if (!std::isfinite(parts.kl))
        term = "kl";
    else if (!std::isfinite(parts.nll))
        term = "nll";
    std::ostringstream msg;
    msg << "training aborted: non-finite " << term << " term at epoch " << epoch;
    throw ValueError(msg.str());
}

Batch slice_batch(const Dataset& data, const std::vector<std::size_t>& order,
                  std::size_t start, std::size_t count) {
    std::size_t p = data.inputs.cols();
    Batch b;
    b.x = Tensor({count, p});
    if (data.is_classification()) {
        b.labels.resize(count);
    } else {
        b.y = Tensor({count, data.targets.cols()});
    }
    for (std::size_t r = 0; r < count; ++r) {
        std::size_t src = order[start + r];
        for (std::size_t j = 0; j < p; ++j) b.x.at(r, j) = data.inputs.at(src, j);
        if (data.is_classification())
            b.labels[r] = data.labels[src];
        else
            for (std::size_t j = 0; j < data.targets.cols(); ++j)
                b.y.at(r, j) = data.targets.at(src, j);
    }
    return b;
}

}  // namespace

MetricTrace train(Network& net, const Dataset& train_data, const Dataset* test_data,
                  const TrainConfig& cfg) {
    cfg.validate();
    train_data.validate();
    if (train_data.size() == 0) throw ValueError("train: empty dataset");
    if (train_data.inputs.cols() != net.cfg.widths.front())
        throw ValueError("train: data width " + std::to_string(train_data.inputs.cols()) +
                         " != network k0 " + std::to_string(net.cfg.widths.front()));

    std::size_t n = train_data.size();
    auto params = net.params();
    Optimizer opt(cfg.optimizer, cfg.lr);
    NetRng noise = NetRng::make(cfg.seed, net.layers.size());
    NetRng eval_noise = NetRng::make(cfg.seed, net.layers.size(), 1000);
    SeededRng shuffle_rng(cfg.seed, 500);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    MetricTrace trace;
    std::vector<double> elbo_trace;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        // Fisher-Yates from the shuffle stream
        for (std::size_t i = n - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(shuffle_rng.next_u64() % (i + 1));
            std::swap(order[i], order[j]);
        }

        double loss_sum = 0, nll_sum = 0, kl_sum = 0;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            std::size_t count = std::min(cfg.batch_size, n - start);
            Batch batch = slice_batch(train_data, order, start, count);
            zero_grads(params);
            auto parts = negative_elbo(net, batch, n, cfg.S, noise);
            check_finite_loss(parts, epoch);
            ad::backward(parts.loss);
            if (cfg.grad_clip > 0)
                for (const auto& p : params)
                    for (double& g : p->grad.data)
                        g = std::clamp(g, -cfg.grad_clip, cfg.grad_clip);
            opt.step(params);
            loss_sum += parts.loss->value[0];
            nll_sum += parts.nll;
            kl_sum += parts.kl;
            ++n_batches;
        }

        for (const auto& p : params)
            if (!p->value.all_finite())
                throw ValueError("training aborted: non-finite parameter at epoch " +
                                 std::to_string(epoch));

        EpochMetrics m;
        m.epoch = epoch;
        m.elbo = loss_sum / static_cast<double>(n_batches);
        m.nll = nll_sum / static_cast<double>(n_batches);
        m.kl = kl_sum / static_cast<double>(n_batches);
        m.score = evaluate(net, test_data ? *test_data : train_data, cfg.eval_samples,
                           eval_noise);
        auto rep = sparsity_report(net);
        m.node_sparsity = rep.node_sparsity;
        m.compression = rep.compression_ratio;
        m.flops_ratio = rep.flops_ratio;
        trace.push_back(m);
        elbo_trace.push_back(m.elbo);
        if (early_stop(elbo_trace, cfg.elbo_tolerance)) break;
    }
    return trace;
}

}  // namespace ssbnn
