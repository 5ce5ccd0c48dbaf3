#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "limsim/bnn.hpp"
#include "limsim/error.hpp"
#include "test_support.hpp"

using namespace limsim;

namespace {

const char* kMinimal = R"({
  "format": "limsim-bnn",
  "version": 1,
  "input_shape": [1, 1, 4],
  "class_count": 2,
  "layers": [
    {"type": "dense", "in": 4, "out": 2, "kernel": ["1010", "0101"], "thresholds": [0, 0]}
  ]
})";

std::string path_of(const std::string& text) {
    try {
        load_model(text);
    } catch (const ValidationError& e) {
        return e.path();
    }
    return "<valid>";
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
    const auto at = s.find(from);
    REQUIRE(at != std::string::npos);
    return s.replace(at, from.size(), to);
}

}  // namespace

TEST_CASE("minimal model loads") {
    const BnnModel m = load_model(kMinimal);
    REQUIRE(m.layers.size() == 1);
    const auto& d = std::get<DenseLayer>(m.layers[0]);
    CHECK(d.kernel[0] == Bits{1, 0, 1, 0});
    CHECK(m.class_count == 2);
    CHECK(load_model(save_model(m)) == m);
}

TEST_CASE("validation errors name the offending path") {
    CHECK(path_of(replace(kMinimal, "\"0101\"", "\"010\"")) == "layers[0].kernel[1]");
    CHECK(path_of(replace(kMinimal, "[\"1010\", \"0101\"]", "[\"1010\"]")) == "layers[0].kernel");
    CHECK(path_of(replace(kMinimal, "[0, 0]", "[0]")) == "layers[0].thresholds");
    CHECK(path_of(replace(kMinimal, "\"in\": 4", "\"in\": 5")) == "layers[0].in");
    CHECK(path_of(replace(kMinimal, "\"class_count\": 2", "\"class_count\": 3")) == "class_count");
    CHECK(path_of(replace(kMinimal, "\"dense\"", "\"pool\"")) == "layers[0].type");
    CHECK(path_of(replace(kMinimal, "\"1010\"", "\"10x0\"")) == "layers[0].kernel[0]");
    CHECK(path_of(replace(kMinimal, "\"version\": 1", "\"version\": 2")) == "version");
    CHECK(path_of(replace(kMinimal, "[1, 1, 4]", "[1, 4]")) == "input_shape");
    CHECK(path_of("{not json") == "$");
    CHECK(path_of(replace(kMinimal, "\"layers\": [", "\"layers\": [{\"type\": \"dense\", \"in\": 4, \"out\": 4, "
                                                     "\"kernel\": [\"0000\",\"0000\",\"0000\",\"0000\"], "
                                                     "\"thresholds\": [0,0,0,0]}, {\"type\": \"binarize\", "
                                                     "\"threshold\": 1},")) == "layers[1]");
}

TEST_CASE("fixture model round-trips byte-identically") {
    const auto file = std::filesystem::path(LIMSIM_DATA_DIR) / "fixture-model.json";
    std::ifstream in(file);
    std::stringstream ss;
    ss << in.rdbuf();
    const BnnModel m = load_model(ss.str());
    const std::string once = save_model(m);
    CHECK(once == ss.str());
    CHECK(save_model(load_model(once)) == once);
}

TEST_CASE("binarize_input") {
    const std::int32_t raw[] = {0, 128, 255};
    CHECK(binarize_input(raw, 128) == Bits{0, 1, 1});
    const std::int32_t low[] = {1, 2, 3};
    CHECK(binarize_input(low, 10) == Bits{0, 0, 0});
    CHECK(binarize_input(low, 0) == Bits{1, 1, 1});
}

TEST_CASE("identity dense layer passes its input bit through") {
    BnnModel m{{1, 1, 1}, 1, {DenseLayer{1, 1, {{1}}, {0}}}};
    // Single-class final layer: score = 2*pop - 1, pop = [x == 1].
    for (std::int32_t x : {0, 1}) {
        const std::int32_t s[] = {x};
        CHECK(host_forward(m, s).popcounts[0][0] == static_cast<std::uint32_t>(x));
    }
    BnnModel two{{1, 1, 1}, 1, {DenseLayer{1, 1, {{1}}, {0}}, DenseLayer{1, 1, {{1}}, {0}}}};
    for (std::int32_t x : {0, 1}) {
        const std::int32_t s[] = {x};
        CHECK(host_forward(two, s).activations[0] == Bits{static_cast<std::uint8_t>(x)});
    }
}

TEST_CASE("argmax ties go to the lowest index") {
    const std::int64_t a[] = {3, 5, 5, 1};
    CHECK(argmax(a) == 1);
    const std::int64_t b[] = {2, 2, 2};
    CHECK(argmax(b) == 0);
    CHECK_THROWS_AS(argmax(std::span<const std::int64_t>{}), DomainError);

    BnnModel uniform{{1, 1, 3}, 3, {DenseLayer{3, 3, {{1, 0, 1}, {1, 0, 1}, {1, 0, 1}}, {0, 0, 0}}}};
    const std::int32_t s[] = {1, 1, 0};
    CHECK(host_forward(uniform, s).predicted == 0);
}

TEST_CASE("dense equals a 1x1 convolution over a 1x1 input") {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t in = 1 + gen() % 12, out = 1 + gen() % 6;
        DenseLayer d{in, out, {}, {}};
        for (std::size_t u = 0; u < out; ++u) {
            Bits row(in);
            for (auto& b : row) b = gen() & 1;
            d.kernel.push_back(row);
            d.thresholds.push_back(static_cast<std::int32_t>(gen() % 5) - 2);
        }
        Conv2dLayer c{1, 1, in, out, 1, d.kernel, d.thresholds};
        BnnModel md{{1, 1, in}, out, {d}};
        BnnModel mc{{1, 1, in}, out, {c}};
        std::vector<std::int32_t> s(in);
        for (auto& v : s) v = gen() & 1;
        const auto td = host_forward(md, s);
        const auto tc = host_forward(mc, s);
        CHECK(td.popcounts == tc.popcounts);
        CHECK(td.scores == tc.scores);
        CHECK(td.predicted == tc.predicted);
    }
}

TEST_CASE("conv patches follow im2col order and valid padding") {
    // 3x3x1 input, 2x2 kernel, stride 1 -> 2x2 output positions.
    Conv2dLayer c{2, 2, 1, 1, 1, {{1, 1, 1, 1}}, {0}};
    const Bits x = {1, 0, 1, 0, 1, 0, 1, 0, 1};
    const auto patches = layer_patches(c, x, {3, 3, 1});
    REQUIRE(patches.size() == 4);
    CHECK(patches[0] == Bits{1, 0, 0, 1});
    CHECK(patches[1] == Bits{0, 1, 1, 0});
    CHECK(patches[3] == Bits{1, 0, 0, 1});
    CHECK(output_shape(c, {3, 3, 1}) == Shape{2, 2, 1});

    Conv2dLayer strided{2, 2, 2, 3, 2, {}, {}};
    CHECK(output_shape(strided, {5, 5, 2}) == Shape{2, 2, 3});
    CHECK(fan_in(strided) == 8);
}

TEST_CASE("conv model validates and runs") {
    const BnnModel m = test_support::small_conv_model(11);
    validate_model(m);
    CHECK(load_model(save_model(m)) == m);
    std::vector<std::int32_t> s(m.input_shape.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<std::int32_t>((i * 37) % 256);
    const auto t = host_forward(m, s);
    CHECK(t.popcounts.size() == 2);
    CHECK(t.scores.size() == m.class_count);
}

TEST_CASE("prepare_input checks shape and bit values") {
    BnnModel m{{1, 1, 2}, 1, {DenseLayer{2, 1, {{1, 1}}, {0}}}};
    const std::int32_t ok[] = {0, 1};
    CHECK(prepare_input(m, ok) == Bits{0, 1});
    const std::int32_t bad[] = {0, 7};
    CHECK_THROWS_AS(prepare_input(m, bad), ShapeError);
    const std::int32_t short_sample[] = {1};
    CHECK_THROWS_AS(prepare_input(m, short_sample), ShapeError);
}

TEST_CASE("fixture regression") {
    const auto dir = std::filesystem::path(LIMSIM_DATA_DIR);
    const BnnModel m = load_model_file(dir / "fixture-model.json");
    const Dataset d = load_idx(dir / "fixture-images.idx", dir / "fixture-labels.idx");
    CHECK(d.size() == 200);
    CHECK(d.shape == Shape{8, 8, 1});
    CHECK(d.labels[3] == 3);
    CHECK(host_forward(m, d.samples[3]).predicted == 3);
    CHECK(load_idx(dir / "fixture-images.idx", dir / "fixture-labels.idx", 10).size() == 10);
}

TEST_CASE("IDX errors") {
    const auto dir = std::filesystem::path(LIMSIM_DATA_DIR);
    const auto tmp = test_support::temp_dir("idx");
    {
        std::ofstream bad(tmp / "bad.idx", std::ios::binary);
        bad << "nope";
    }
    CHECK_THROWS_AS(load_idx(tmp / "bad.idx", dir / "fixture-labels.idx"), ParseError);
    CHECK_THROWS_AS(load_idx(dir / "fixture-labels.idx", dir / "fixture-labels.idx"), ParseError);
    CHECK_THROWS_AS(load_idx(tmp / "missing.idx", dir / "fixture-labels.idx"), Error);
}
