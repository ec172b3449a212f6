#pragma once

#include "ssbnn/tensor.hpp"

#include <string>
#include <vector>

namespace ssbnn {

class IdxError : public std::runtime_error {
public:
    explicit IdxError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Reads a big-endian IDX image file (magic 0x00000803, dims n x h x w)
/// and flattens each image row-major to one row.
Tensor read_idx_images(const std::string& path);

/// Reads an IDX label file (magic 0x00000801).
std::vector<int> read_idx_labels(const std::string& path);

/// Inverse writers; pixel values must be integers in [0,255].
void write_idx_images(const std::string& path, const Tensor& images, std::size_t height,
                      std::size_t width);
void write_idx_labels(const std::string& path, const std::vector<int>& labels);

/// Divides pixels by scale (the published preprocessing uses 126).
Tensor preprocess_pixels(const Tensor& raw, double scale = 126.0);

}  // namespace ssbnn
