#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace limsim {

/// One bit per element, values 0 or 1.
using Bits = std::vector<std::uint8_t>;

/// Height x width x channels, flattened in that order.
struct Shape {
    std::size_t h = 1;
    std::size_t w = 1;
    std::size_t c = 1;

    std::size_t size() const noexcept { return h * w * c; }
    friend bool operator==(const Shape&, const Shape&) = default;
};

/// Thresholds raw integer input into bits (bit = raw >= threshold).
struct BinarizeLayer {
    std::int32_t threshold = 0;

    friend bool operator==(const BinarizeLayer&, const BinarizeLayer&) = default;
};

struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<Bits> kernel;  // out rows of `in` bits
    std::vector<std::int32_t> thresholds;

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Valid-padding binary convolution. Kernel rows are flattened (kh, kw, cin).
struct Conv2dLayer {
    std::size_t kh = 1;
    std::size_t kw = 1;
    std::size_t cin = 1;
    std::size_t cout = 1;
    std::size_t stride = 1;
    std::vector<Bits> kernel;  // cout rows of kh*kw*cin bits
    std::vector<std::int32_t> thresholds;

    friend bool operator==(const Conv2dLayer&, const Conv2dLayer&) = default;
};

using Layer = std::variant<BinarizeLayer, DenseLayer, Conv2dLayer>;

struct BnnModel {
    Shape input_shape;
    std::size_t class_count = 0;
    std::vector<Layer> layers;

    friend bool operator==(const BnnModel&, const BnnModel&) = default;
};

/// Checks dims, kernel sizes, threshold counts and shape composition.
/// Throws ValidationError naming the offending path.
void validate_model(const BnnModel& model);

BnnModel load_model(std::string_view text);
std::string save_model(const BnnModel& model);
BnnModel load_model_file(const std::filesystem::path& path);
void save_model_file(const BnnModel& model, const std::filesystem::path& path);

Bits binarize_input(std::span<const std::int32_t> raw, std::int32_t threshold);

bool is_xnor_layer(const Layer& layer);
Shape output_shape(const Layer& layer, const Shape& in);
std::size_t fan_in(const Layer& layer);
std::size_t unit_count(const Layer& layer);
const std::vector<Bits>& layer_kernel(const Layer& layer);
const std::vector<std::int32_t>& layer_thresholds(const Layer& layer);

/// Converts a raw sample into the bit vector fed to the first XNOR layer.
Bits prepare_input(const BnnModel& model, std::span<const std::int32_t> sample);

/// Operand vectors of an XNOR layer: one for dense, one per output position
/// (im2col order) for conv.
std::vector<Bits> layer_patches(const Layer& layer, const Bits& input, const Shape& shape);

/// `popcounts` is position-major: index = position * units + unit.
Bits threshold_activations(const Layer& layer, std::span<const std::uint32_t> popcounts);
std::vector<std::int64_t> final_scores(const Layer& layer, std::span<const std::uint32_t> popcounts);

/// Lowest index wins ties.
std::size_t argmax(std::span<const std::int64_t> scores);

std::uint32_t xnor_popcount_bits(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

struct ForwardTrace {
    std::vector<std::vector<std::uint32_t>> popcounts;  // per XNOR layer
    std::vector<Bits> activations;                      // per hidden XNOR layer
    std::vector<std::int64_t> scores;
    std::size_t predicted = 0;
};

/// Pure integer forward pass; the bit-exact reference for the crossbar engine.
ForwardTrace host_forward(const BnnModel& model, std::span<const std::int32_t> sample);

struct Dataset {
    Shape shape;
    std::vector<std::vector<std::int32_t>> samples;
    std::vector<std::uint8_t> labels;

    std::size_t size() const noexcept { return samples.size(); }
};

/// Reads big-endian IDX image (magic 0x00000803) and label (0x00000801)
/// files. At most `limit` samples are kept.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 std::size_t limit = SIZE_MAX);

}  // namespace limsim
