#include "ssbnn/tensor.hpp"

#include <cmath>

namespace ssbnn {

bool Tensor::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace ssbnn
