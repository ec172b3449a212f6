#include "ssbnn/idx.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>

namespace ssbnn {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be32(std::ifstream& f, const std::string& path, std::size_t offset) {
    unsigned char b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    if (f.gcount() != 4)
        throw IdxError(path + ": truncated header at byte " + std::to_string(offset));
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_be32(std::ofstream& f, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v)};
    f.write(reinterpret_cast<char*>(b), 4);
}

std::string hex32(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "0x%08x", v);
    return buf;
}

std::vector<unsigned char> read_payload(std::ifstream& f, const std::string& path,
                                        std::size_t expect, std::size_t offset) {
    // size the file before allocating so a corrupt header cannot trigger a
    // huge allocation
    auto here = f.tellg();
    f.seekg(0, std::ios::end);
    std::size_t avail = static_cast<std::size_t>(f.tellg() - here);
    f.seekg(here);
    if (avail != expect)
        throw IdxError(path + ": payload at byte " + std::to_string(offset) + ": expected " +
                       std::to_string(expect) + " bytes, file holds " + std::to_string(avail));
    std::vector<unsigned char> data(expect);
    f.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(expect));
    std::size_t got = static_cast<std::size_t>(f.gcount());
    if (got != expect)
        throw IdxError(path + ": truncated payload at byte " + std::to_string(offset + got) +
                       ": expected " + std::to_string(expect) + " bytes, got " +
                       std::to_string(got));
    return data;
}

}  // namespace

Tensor read_idx_images(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IdxError(path + ": cannot open");
    std::uint32_t magic = read_be32(f, path, 0);
    if (magic != kImageMagic)
        throw IdxError(path + ": bad magic at byte 0: expected " + hex32(kImageMagic) +
                       ", got " + hex32(magic));
    std::uint32_t n = read_be32(f, path, 4);
    std::uint32_t h = read_be32(f, path, 8);
    std::uint32_t w = read_be32(f, path, 12);
    auto payload = read_payload(f, path, std::size_t(n) * h * w, 16);
    Tensor out({n, std::size_t(h) * w});
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = payload[i];
    return out;
}

std::vector<int> read_idx_labels(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IdxError(path + ": cannot open");
    std::uint32_t magic = read_be32(f, path, 0);
    if (magic != kLabelMagic)
        throw IdxError(path + ": bad magic at byte 0: expected " + hex32(kLabelMagic) +
                       ", got " + hex32(magic));
    std::uint32_t n = read_be32(f, path, 4);
    auto payload = read_payload(f, path, n, 8);
    return std::vector<int>(payload.begin(), payload.end());
}

void write_idx_images(const std::string& path, const Tensor& images, std::size_t height,
                      std::size_t width) {
    if (images.cols() != height * width)
        throw IdxError(path + ": image width " + std::to_string(images.cols()) +
                       " != " + std::to_string(height) + "*" + std::to_string(width));
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IdxError(path + ": cannot open for writing");
    write_be32(f, kImageMagic);
    write_be32(f, static_cast<std::uint32_t>(images.rows()));
    write_be32(f, static_cast<std::uint32_t>(height));
    write_be32(f, static_cast<std::uint32_t>(width));
    std::vector<unsigned char> payload(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) {
        double v = images[i];
        if (v < 0 || v > 255 || v != std::floor(v))
            throw IdxError(path + ": pixel " + std::to_string(i) +
                           " not an integer in [0,255]");
        payload[i] = static_cast<unsigned char>(v);
    }
    f.write(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
}

void write_idx_labels(const std::string& path, const std::vector<int>& labels) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IdxError(path + ": cannot open for writing");
    write_be32(f, kLabelMagic);
    write_be32(f, static_cast<std::uint32_t>(labels.size()));
    std::vector<unsigned char> payload;
    for (int l : labels) {
        if (l < 0 || l > 255)
            throw IdxError(path + ": label " + std::to_string(l) + " out of byte range");
        payload.push_back(static_cast<unsigned char>(l));
    }
    f.write(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
}

Tensor preprocess_pixels(const Tensor& raw, double scale) {
    if (scale <= 0) throw ValueError("preprocess_pixels: scale must be positive");
    Tensor out = raw;
    for (double& v : out.data) v /= scale;
    return out;
}

}  // namespace ssbnn
