#include "ssbnn/rng.hpp"

#include <cmath>

namespace ssbnn {

double SeededRng::normal() {
    // Box-Muller, no caching of the second variate so the draw count
    // stays a pure function of how many normals were requested.
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace ssbnn
