#pragma once

#include "ssbnn/planner.hpp"
#include "ssbnn/prior.hpp"
#include "ssbnn/trainer.hpp"

#include <string>

namespace ssbnn {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Everything one run needs: network, prior, training, planner inputs,
/// and file locations. Stored on disk as flat key=value lines, '#' for
/// comments; parse -> serialize -> parse is a fixed point.
struct RunConfig {
    NetworkConfig network;
    TrainConfig train;
    TopologySpec topology;

    std::string train_images, train_labels, test_images, test_labels;
    std::string data_format = "idx";  // idx | csv
    double pixel_scale = 126.0;
    std::size_t train_limit = 0;  // 0: use everything
    std::string out_dir = ".";

    void validate() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& cfg);

}  // namespace ssbnn
