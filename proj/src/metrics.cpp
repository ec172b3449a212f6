#include "ssbnn/metrics.hpp"

#include <cmath>

namespace ssbnn {

namespace {

long long active_count(const LayerVariationalState& st, double thr) {
    long long n = 0;
    for (int a : active_nodes(st, thr)) n += a;
    return n;
}

/// Weight matrices with pruned rows and pruned-input columns zeroed.
std::vector<Tensor> materialize_pruned(const Network& net, double thr) {
    std::vector<Tensor> mats;
    std::vector<int> prev_active;  // empty means "all inputs live"
    for (const auto& st : net.layers) {
        Tensor W = st.mu->value;
        auto act = active_nodes(st, thr);
        for (std::size_t j = 0; j < st.fan_out; ++j)
            for (std::size_t i = 0; i <= st.fan_in; ++i) {
                bool dead = !act[j];
                if (!dead && i > 0 && !prev_active.empty() && !prev_active[i - 1]) dead = true;
                if (dead) W.at(j, i) = 0.0;
            }
        mats.push_back(std::move(W));
        prev_active = act;
    }
    return mats;
}

}  // namespace

double node_sparsity(const LayerVariationalState& state, double threshold) {
    return static_cast<double>(active_count(state, threshold)) /
           static_cast<double>(state.fan_out);
}

double channel_sparsity(const LayerShape& shape) {
    if (shape.kind != LayerKind::Conv2d)
        throw ValueError("channel_sparsity: conv2d layer required");
    return static_cast<double>(shape.C_out_pr) / static_cast<double>(shape.C_out);
}

double compression_ratio(const Network& net, double threshold) {
    long long dense = 0, kept = 0;
    long long prev_active = -1;  // -1: raw inputs, never pruned
    for (const auto& st : net.layers) {
        long long I = static_cast<long long>(st.fan_in);
        long long O = static_cast<long long>(st.fan_out);
        long long act = active_count(st, threshold);
        long long live_in = prev_active < 0 ? I : prev_active;
        dense += O * (I + 1);
        kept += act * (live_in + 1);
        prev_active = act;
    }
    return static_cast<double>(kept) / static_cast<double>(dense);
}

double compression_ratio_materialized(const Network& net, double threshold) {
    long long dense = 0, kept = 0;
    for (const auto& W : materialize_pruned(net, threshold)) {
        dense += static_cast<long long>(W.size());
        for (double v : W.data)
            if (v != 0.0) ++kept;
    }
    return static_cast<double>(kept) / static_cast<double>(dense);
}

long long flops_linear(long long I_pr, long long O_pr) {
    if (I_pr < 0 || O_pr < 0) throw ValueError("flops_linear: negative counts");
    return (I_pr + 1) * O_pr;
}

long long flops_conv(const LayerShape& s) {
    if (s.kind != LayerKind::Conv2d) throw ValueError("flops_conv: conv2d layer required");
    long long ow = (s.I_w + 2 * s.P_w - s.D_w * (s.K_w - 1) - 1) / s.S_w + 1;
    long long oh = (s.I_h + 2 * s.P_h - s.D_h * (s.K_h - 1) - 1) / s.S_h + 1;
    if (ow <= 0 || oh <= 0)
        throw ValueError("flops_conv: non-positive output dims " + std::to_string(ow) +
                         "x" + std::to_string(oh));
    return (s.C_in_pr * s.K_w * s.K_h + 1) * ow * oh * s.C_out_pr;
}

double flops_ratio(const Network& net, double threshold) {
    long long dense = 0, pruned = 0;
    long long prev_active = -1;
    for (const auto& st : net.layers) {
        long long I = static_cast<long long>(st.fan_in);
        long long O = static_cast<long long>(st.fan_out);
        long long act = active_count(st, threshold);
        long long live_in = prev_active < 0 ? I : prev_active;
        dense += flops_linear(I, O);
        pruned += flops_linear(live_in, act);
        prev_active = act;
    }
    return static_cast<double>(pruned) / static_cast<double>(dense);
}

double flops_ratio_materialized(const Network& net, double threshold) {
    auto mats = materialize_pruned(net, threshold);
    long long dense = 0, pruned = 0;
    long long prev_active = -1;
    for (const auto& W : mats) {
        long long I = static_cast<long long>(W.cols()) - 1;
        long long O = static_cast<long long>(W.rows());
        long long act = 0;
        for (std::size_t j = 0; j < W.rows(); ++j) {
            bool any = false;
            for (std::size_t i = 0; i < W.cols(); ++i)
                if (W.at(j, i) != 0.0) any = true;
            if (any) ++act;
        }
        long long live_in = prev_active < 0 ? I : prev_active;
        dense += flops_linear(I, O);
        pruned += flops_linear(live_in, act);
        prev_active = act;
    }
    return static_cast<double>(pruned) / static_cast<double>(dense);
}

std::vector<FlopsRow> flops_table(const std::vector<LayerShape>& shapes) {
    std::vector<FlopsRow> rows;
    long long prev_out_pr = -1, prev_out = -1;
    for (std::size_t l = 0; l < shapes.size(); ++l) {
        LayerShape s = shapes[l];
        LayerShape d = s;  // dense twin
        if (s.kind == LayerKind::Linear) {
            d.I_pr = d.I;
            d.O_pr = d.O;
            if (l == 0) {
                s.I_pr = s.I;  // inputs never pruned
            } else if (shapes[l - 1].kind == LayerKind::Linear) {
                s.I_pr = prev_out_pr;
            } else {
                // flattened conv output: scale by surviving channel fraction
                s.I_pr = std::llround(static_cast<double>(s.I) *
                                      static_cast<double>(prev_out_pr) /
                                      static_cast<double>(prev_out));
            }
            rows.push_back({l, flops_linear(d.I, d.O), flops_linear(s.I_pr, s.O_pr)});
            prev_out_pr = s.O_pr;
            prev_out = s.O;
        } else {
            d.C_in_pr = d.C_in;
            d.C_out_pr = d.C_out;
            if (l == 0)
                s.C_in_pr = s.C_in;
            else
                s.C_in_pr = prev_out_pr;
            rows.push_back({l, flops_conv(d), flops_conv(s)});
            prev_out_pr = s.C_out_pr;
            prev_out = s.C_out;
        }
    }
    return rows;
}

double flops_ratio(const std::vector<LayerShape>& shapes) {
    long long dense = 0, pruned = 0;
    for (const auto& r : flops_table(shapes)) {
        dense += r.dense;
        pruned += r.pruned;
    }
    return static_cast<double>(pruned) / static_cast<double>(dense);
}

SparsityReport sparsity_report(const Network& net, double threshold) {
    SparsityReport rep;
    for (const auto& st : net.layers) rep.node_sparsity.push_back(node_sparsity(st, threshold));
    rep.compression_ratio = compression_ratio(net, threshold);
    rep.flops_ratio = flops_ratio(net, threshold);
    return rep;
}

}  // namespace ssbnn
