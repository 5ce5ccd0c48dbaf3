// Generates the checked-in fixture: a 64-32-10 dense BNN on 8x8 inputs and a
// labelled set of noisy class prototypes in IDX format.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "limsim/bnn.hpp"

namespace {

constexpr std::size_t kSide = 8;
constexpr std::size_t kPixels = kSide * kSide;
constexpr std::size_t kHidden = 32;
constexpr std::size_t kClasses = 10;
constexpr std::size_t kSamples = 200;
constexpr double kFlipProbability = 0.08;
constexpr std::int32_t kPrototypeThreshold = 24;  // 2*pop - 64 >= 24 <=> pop >= 44

void put_be32(std::ofstream& out, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                       static_cast<char>(v)};
    out.write(b, 4);
}

limsim::Bits random_bits(std::mt19937_64& gen, std::size_t n) {
    limsim::Bits b(n);
    for (auto& x : b) x = static_cast<std::uint8_t>(gen() & 1);
    return b;
}

}  // namespace

int main(int argc, char** argv) {
    const std::filesystem::path dir = argc > 1 ? argv[1] : "data";
    std::filesystem::create_directories(dir);
    std::mt19937_64 gen(20241016);

    std::vector<limsim::Bits> prototypes;
    for (std::size_t k = 0; k < kClasses; ++k) prototypes.push_back(random_bits(gen, kPixels));

    // Hidden units 0..9 match one prototype each; the rest are random features.
    limsim::DenseLayer hidden{kPixels, kHidden, {}, {}};
    for (std::size_t u = 0; u < kHidden; ++u) {
        hidden.kernel.push_back(u < kClasses ? prototypes[u] : random_bits(gen, kPixels));
        hidden.thresholds.push_back(u < kClasses ? kPrototypeThreshold : 0);
    }

    // Class k agrees with hidden unit k firing and with the other prototype
    // units staying silent; the random features carry identical weights.
    const limsim::Bits shared = random_bits(gen, kHidden - kClasses);
    limsim::DenseLayer output{kHidden, kClasses, {}, {}};
    for (std::size_t k = 0; k < kClasses; ++k) {
        limsim::Bits row(kHidden);
        for (std::size_t j = 0; j < kHidden; ++j) row[j] = j < kClasses ? (j == k) : shared[j - kClasses];
        output.kernel.push_back(row);
        output.thresholds.push_back(0);
    }

    limsim::BnnModel model{{kSide, kSide, 1}, kClasses, {limsim::BinarizeLayer{128}, hidden, output}};
    limsim::save_model_file(model, dir / "fixture-model.json");

    std::ofstream images(dir / "fixture-images.idx", std::ios::binary);
    std::ofstream labels(dir / "fixture-labels.idx", std::ios::binary);
    put_be32(images, 0x00000803);
    put_be32(images, kSamples);
    put_be32(images, kSide);
    put_be32(images, kSide);
    put_be32(labels, 0x00000801);
    put_be32(labels, kSamples);

    std::bernoulli_distribution flip(kFlipProbability);
    std::uniform_int_distribution<int> dark(0, 100);
    std::uniform_int_distribution<int> bright(156, 255);
    for (std::size_t s = 0; s < kSamples; ++s) {
        const std::size_t label = s % kClasses;
        for (std::size_t p = 0; p < kPixels; ++p) {
            const bool on = (prototypes[label][p] != 0) != flip(gen);
            images.put(static_cast<char>(on ? bright(gen) : dark(gen)));
        }
        labels.put(static_cast<char>(label));
    }
    std::cout << "wrote fixture to " << dir.string() << '\n';
    return 0;
}
