#pragma once

#include "ssbnn/network.hpp"

namespace ssbnn {

enum class LayerKind { Linear, Conv2d };

/// Architecture description for the FLOPs calculator. Pruned counts mirror
/// the dense ones when nothing is pruned.
struct LayerShape {
    LayerKind kind = LayerKind::Linear;
    // linear
    long long I = 0, O = 0, I_pr = 0, O_pr = 0;
    // conv2d
    long long C_in = 0, C_out = 0, C_in_pr = 0, C_out_pr = 0;
    long long K_w = 0, K_h = 0, I_w = 0, I_h = 0;
    long long P_w = 0, P_h = 0, D_w = 1, D_h = 1, S_w = 1, S_h = 1;
};

struct SparsityReport {
    std::vector<double> node_sparsity;  // per layer, surviving node fraction
    double compression_ratio = 1.0;
    double flops_ratio = 1.0;
};

/// Fraction of nodes still active (gamma above threshold).
double node_sparsity(const LayerVariationalState& state, double threshold = 0.5);

/// C_out_pr / C_out for a conv layer description.
double channel_sparsity(const LayerShape& shape);

/// Surviving weights over dense weights. A weight survives when its node
/// is active and its input node (for hidden inputs) is active.
double compression_ratio(const Network& net, double threshold = 0.5);

/// Same quantity counted on explicitly materialized pruned weight
/// matrices; an independent path used for cross-checks.
double compression_ratio_materialized(const Network& net, double threshold = 0.5);

long long flops_linear(long long I_pr, long long O_pr);
long long flops_conv(const LayerShape& shape);

/// Pruned over dense multiply count for a trained MLP; input features are
/// never pruned, output nodes are always kept.
double flops_ratio(const Network& net, double threshold = 0.5);
double flops_ratio_materialized(const Network& net, double threshold = 0.5);

/// FLOPs chain over an architecture description: each layer's pruned
/// input count is derived from the previous layer's pruned output count.
struct FlopsRow {
    std::size_t layer;
    long long dense;
    long long pruned;
};
std::vector<FlopsRow> flops_table(const std::vector<LayerShape>& shapes);
double flops_ratio(const std::vector<LayerShape>& shapes);

SparsityReport sparsity_report(const Network& net, double threshold = 0.5);

}  // namespace ssbnn
