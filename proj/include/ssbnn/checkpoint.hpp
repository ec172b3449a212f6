#pragma once

#include "ssbnn/network.hpp"

#include <string>

namespace ssbnn {

class CheckpointError : public std::runtime_error {
public:
    explicit CheckpointError(const std::string& msg) : std::runtime_error(msg) {}
};

struct CheckpointState {
    Network net;
    std::uint64_t seed = 0;
    NetRng rng;  // counters restored so noise streams resume exactly
};

/// Versioned binary container; save -> load -> save is byte-identical.
void checkpoint_save(const std::string& path, const Network& net, std::uint64_t seed,
                     const NetRng& rng);

CheckpointState checkpoint_load(const std::string& path);

}  // namespace ssbnn
