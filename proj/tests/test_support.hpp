#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "limsim/bnn.hpp"

namespace test_support {

inline std::filesystem::path temp_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() / ("limsim-test-" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline limsim::Bits random_bits(std::mt19937_64& gen, std::size_t n) {
    limsim::Bits b(n);
    for (auto& x : b) x = static_cast<std::uint8_t>(gen() & 1);
    return b;
}

inline limsim::DenseLayer random_dense(std::mt19937_64& gen, std::size_t in, std::size_t out) {
    limsim::DenseLayer d{in, out, {}, {}};
    for (std::size_t u = 0; u < out; ++u) {
        d.kernel.push_back(random_bits(gen, in));
        d.thresholds.push_back(static_cast<std::int32_t>(gen() % 7) - 3);
    }
    return d;
}

/// Binarize -> dense layers of the given widths; widths.front() is the input size.
inline limsim::BnnModel random_dense_model(std::uint64_t seed, const std::vector<std::size_t>& widths) {
    std::mt19937_64 gen(seed);
    limsim::BnnModel m{{1, 1, widths.front()}, widths.back(), {limsim::BinarizeLayer{128}}};
    for (std::size_t i = 1; i < widths.size(); ++i) m.layers.emplace_back(random_dense(gen, widths[i - 1], widths[i]));
    return m;
}

/// 6x6x1 -> conv 3x3 (4 filters) -> dense 64 -> 5 classes.
inline limsim::BnnModel small_conv_model(std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    limsim::Conv2dLayer c{3, 3, 1, 4, 1, {}, {}};
    for (std::size_t u = 0; u < 4; ++u) {
        c.kernel.push_back(random_bits(gen, 9));
        c.thresholds.push_back(static_cast<std::int32_t>(gen() % 5) - 2);
    }
    limsim::BnnModel m{{6, 6, 1}, 5, {limsim::BinarizeLayer{128}, c}};
    m.layers.emplace_back(random_dense(gen, 64, 5));
    return m;
}

inline std::vector<std::vector<std::int32_t>> random_samples(std::uint64_t seed, std::size_t count, std::size_t size) {
    std::mt19937_64 gen(seed);
    std::vector<std::vector<std::int32_t>> out(count, std::vector<std::int32_t>(size));
    for (auto& s : out) {
        for (auto& v : s) v = static_cast<std::int32_t>(gen() % 256);
    }
    return out;
}

}  // namespace test_support
