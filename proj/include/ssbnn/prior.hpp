#pragma once

#include <string>
#include <vector>

#include "ssbnn/tensor.hpp"

namespace ssbnn {

enum class PriorKind { SS_IG, SS_GL, SS_GHS };

enum class Activation { Swish, Relu };
enum class Likelihood { GaussianRegression, Categorical };
enum class Parameterization { Centered, NonCentered };

/// Fixed prior hyperparameters shared by the whole network.
struct PriorSpec {
    PriorKind kind = PriorKind::SS_GL;
    double sigma0_sq = 1.0;
    double a0 = 4.0;
    double b0 = 2.0;
    double d0_sq = 1.0;
    double c_reg_sq = 1.0;
    // one inclusion probability per layer; the output entry must be 1
    std::vector<double> lambda;

    double lambda_for(std::size_t layer, std::size_t n_layers) const {
        if (layer + 1 == n_layers) return 1.0;
        if (layer < lambda.size()) return lambda[layer];
        return 0.5;
    }
};

PriorKind prior_kind_from_string(const std::string& s);
std::string to_string(PriorKind k);

struct NetworkConfig {
    std::vector<std::size_t> widths;  // k_0 .. k_{L+1}
    Activation activation = Activation::Swish;
    Likelihood likelihood = Likelihood::GaussianRegression;
    Parameterization parameterization = Parameterization::Centered;
    PriorSpec prior;

    std::size_t n_layers() const { return widths.empty() ? 0 : widths.size() - 1; }

    void validate() const {
        if (widths.size() < 3)
            throw ValueError("network: need at least one hidden layer (widths k0..kL+1)");
        for (std::size_t w : widths)
            if (w < 1) throw ValueError("network: all widths must be >= 1");
        for (double l : prior.lambda)
            if (!(l > 0.0 && l <= 1.0))
                throw ValueError("prior: lambda entries must lie in (0,1]");
    }
};

}  // namespace ssbnn
