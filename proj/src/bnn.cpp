#include "limsim/bnn.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "limsim/error.hpp"

namespace limsim {

using Json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kFormatName = "limsim-bnn";
constexpr int kFormatVersion = 1;

std::string at_path(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

void check_kernel(const std::vector<Bits>& kernel, std::size_t rows, std::size_t width, const std::string& path) {
    if (kernel.size() != rows) {
        throw ValidationError(path + ".kernel",
                              "expected " + std::to_string(rows) + " rows, got " + std::to_string(kernel.size()));
    }
    for (std::size_t r = 0; r < rows; ++r) {
        if (kernel[r].size() != width) {
            throw ValidationError(at_path(path + ".kernel", r), "expected " + std::to_string(width) +
                                                                    " bits, got " + std::to_string(kernel[r].size()));
        }
        if (std::any_of(kernel[r].begin(), kernel[r].end(), [](std::uint8_t b) { return b > 1; })) {
            throw ValidationError(at_path(path + ".kernel", r), "bits must be 0 or 1");
        }
    }
}

void check_thresholds(const std::vector<std::int32_t>& t, std::size_t units, const std::string& path) {
    if (t.size() != units) {
        throw ValidationError(path + ".thresholds",
                              "expected " + std::to_string(units) + " values, got " + std::to_string(t.size()));
    }
}

}  // namespace

bool is_xnor_layer(const Layer& layer) { return !std::holds_alternative<BinarizeLayer>(layer); }

Shape output_shape(const Layer& layer, const Shape& in) {
    if (const auto* d = std::get_if<DenseLayer>(&layer)) return {1, 1, d->out};
    if (const auto* c = std::get_if<Conv2dLayer>(&layer)) {
        return {(in.h - c->kh) / c->stride + 1, (in.w - c->kw) / c->stride + 1, c->cout};
    }
    return in;
}

std::size_t fan_in(const Layer& layer) {
    if (const auto* d = std::get_if<DenseLayer>(&layer)) return d->in;
    if (const auto* c = std::get_if<Conv2dLayer>(&layer)) return c->kh * c->kw * c->cin;
    return 0;
}

std::size_t unit_count(const Layer& layer) {
    if (const auto* d = std::get_if<DenseLayer>(&layer)) return d->out;
    if (const auto* c = std::get_if<Conv2dLayer>(&layer)) return c->cout;
    return 0;
}

const std::vector<Bits>& layer_kernel(const Layer& layer) {
    if (const auto* d = std::get_if<DenseLayer>(&layer)) return d->kernel;
    if (const auto* c = std::get_if<Conv2dLayer>(&layer)) return c->kernel;
    throw MappingError("layer has no kernel");
}

const std::vector<std::int32_t>& layer_thresholds(const Layer& layer) {
    if (const auto* d = std::get_if<DenseLayer>(&layer)) return d->thresholds;
    if (const auto* c = std::get_if<Conv2dLayer>(&layer)) return c->thresholds;
    throw MappingError("layer has no thresholds");
}

void validate_model(const BnnModel& model) {
    const Shape& s0 = model.input_shape;
    if (s0.h == 0 || s0.w == 0 || s0.c == 0) throw ValidationError("input_shape", "dimensions must be positive");
    if (model.class_count == 0) throw ValidationError("class_count", "must be positive");

    Shape shape = s0;
    bool any_xnor = false;
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        const std::string path = at_path("layers", i);
        const Layer& layer = model.layers[i];
        if (std::holds_alternative<BinarizeLayer>(layer)) {
            if (i != 0) throw ValidationError(path, "binarize is only allowed as the first layer");
            continue;
        }
        any_xnor = true;
        if (const auto* d = std::get_if<DenseLayer>(&layer)) {
            if (d->in == 0 || d->out == 0) throw ValidationError(path, "in and out must be positive");
            if (d->in != shape.size()) {
                throw ValidationError(path + ".in", "expected " + std::to_string(shape.size()) + " (previous output), got " +
                                                        std::to_string(d->in));
            }
            check_kernel(d->kernel, d->out, d->in, path);
            check_thresholds(d->thresholds, d->out, path);
        } else {
            const auto& c = std::get<Conv2dLayer>(layer);
            if (c.kh == 0 || c.kw == 0 || c.cin == 0 || c.cout == 0 || c.stride == 0) {
                throw ValidationError(path, "kh, kw, cin, cout and stride must be positive");
            }
            if (c.cin != shape.c) {
                throw ValidationError(path + ".cin", "expected " + std::to_string(shape.c) + " input channels, got " +
                                                         std::to_string(c.cin));
            }
            if (c.kh > shape.h || c.kw > shape.w) {
                throw ValidationError(path, "kernel larger than its " + std::to_string(shape.h) + "x" +
                                                std::to_string(shape.w) + " input");
            }
            check_kernel(c.kernel, c.cout, c.kh * c.kw * c.cin, path);
            check_thresholds(c.thresholds, c.cout, path);
        }
        shape = output_shape(layer, shape);
    }
    if (!any_xnor) throw ValidationError("layers", "model needs at least one dense or conv2d layer");
    if (shape.size() != model.class_count) {
        throw ValidationError("class_count", "final layer produces " + std::to_string(shape.size()) +
                                                 " outputs, class_count is " + std::to_string(model.class_count));
    }
}

namespace {

const Json& require(const Json& obj, const char* key, const std::string& path) {
    if (!obj.is_object() || !obj.contains(key)) throw ValidationError(path + "." + key, "missing");
    return obj.at(key);
}

std::int64_t get_int(const Json& obj, const char* key, const std::string& path) {
    const Json& v = require(obj, key, path);
    if (!v.is_number_integer()) throw ValidationError(path + "." + key, "expected an integer");
    return v.get<std::int64_t>();
}

std::size_t get_count(const Json& obj, const char* key, const std::string& path) {
    const std::int64_t v = get_int(obj, key, path);
    if (v < 0) throw ValidationError(path + "." + key, "must not be negative");
    return static_cast<std::size_t>(v);
}

std::vector<Bits> get_kernel(const Json& obj, const std::string& path) {
    const Json& k = require(obj, "kernel", path);
    if (!k.is_array()) throw ValidationError(path + ".kernel", "expected an array of bit strings");
    std::vector<Bits> rows;
    for (std::size_t i = 0; i < k.size(); ++i) {
        if (!k[i].is_string()) throw ValidationError(at_path(path + ".kernel", i), "expected a bit string");
        const auto& s = k[i].get_ref<const std::string&>();
        Bits row;
        row.reserve(s.size());
        for (char ch : s) {
            if (ch != '0' && ch != '1') throw ValidationError(at_path(path + ".kernel", i), "bits must be '0' or '1'");
            row.push_back(ch == '1' ? 1 : 0);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<std::int32_t> get_thresholds(const Json& obj, const std::string& path) {
    const Json& t = require(obj, "thresholds", path);
    if (!t.is_array()) throw ValidationError(path + ".thresholds", "expected an integer array");
    std::vector<std::int32_t> out;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!t[i].is_number_integer()) throw ValidationError(at_path(path + ".thresholds", i), "expected an integer");
        out.push_back(t[i].get<std::int32_t>());
    }
    return out;
}

Json kernel_json(const std::vector<Bits>& kernel) {
    Json rows = Json::array();
    for (const Bits& row : kernel) {
        std::string s;
        s.reserve(row.size());
        for (std::uint8_t b : row) s.push_back(b ? '1' : '0');
        rows.push_back(std::move(s));
    }
    return rows;
}

}  // namespace

BnnModel load_model(std::string_view text) {
    Json doc;
    try {
        doc = Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
        throw ValidationError("$", std::string("not a valid document: ") + e.what());
    }
    if (!doc.is_object()) throw ValidationError("$", "expected an object");
    if (doc.contains("format") && doc["format"] != kFormatName) {
        throw ValidationError("format", "expected \"" + std::string(kFormatName) + "\"");
    }
    if (get_int(doc, "version", "$") != kFormatVersion) throw ValidationError("version", "unsupported version");

    BnnModel m;
    const Json& shape = require(doc, "input_shape", "$");
    if (!shape.is_array() || shape.size() != 3 ||
        !std::all_of(shape.begin(), shape.end(), [](const Json& v) { return v.is_number_unsigned(); })) {
        throw ValidationError("input_shape", "expected [height, width, channels]");
    }
    m.input_shape = {shape[0].get<std::size_t>(), shape[1].get<std::size_t>(), shape[2].get<std::size_t>()};
    m.class_count = get_count(doc, "class_count", "$");

    const Json& layers = require(doc, "layers", "$");
    if (!layers.is_array()) throw ValidationError("layers", "expected an array");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const std::string path = at_path("layers", i);
        const Json& l = layers[i];
        const Json& type = require(l, "type", path);
        if (type == "binarize") {
            m.layers.emplace_back(BinarizeLayer{static_cast<std::int32_t>(get_int(l, "threshold", path))});
        } else if (type == "dense") {
            DenseLayer d;
            d.in = get_count(l, "in", path);
            d.out = get_count(l, "out", path);
            d.kernel = get_kernel(l, path);
            d.thresholds = get_thresholds(l, path);
            m.layers.emplace_back(std::move(d));
        } else if (type == "conv2d") {
            Conv2dLayer c;
            c.kh = get_count(l, "kh", path);
            c.kw = get_count(l, "kw", path);
            c.cin = get_count(l, "cin", path);
            c.cout = get_count(l, "cout", path);
            c.stride = get_count(l, "stride", path);
            c.kernel = get_kernel(l, path);
            c.thresholds = get_thresholds(l, path);
            m.layers.emplace_back(std::move(c));
        } else {
            throw ValidationError(path + ".type", "unknown layer type " + type.dump());
        }
    }
    validate_model(m);
    return m;
}

std::string save_model(const BnnModel& model) {
    validate_model(model);
    Json doc;
    doc["format"] = kFormatName;
    doc["version"] = kFormatVersion;
    doc["input_shape"] = {model.input_shape.h, model.input_shape.w, model.input_shape.c};
    doc["class_count"] = model.class_count;
    Json layers = Json::array();
    for (const Layer& layer : model.layers) {
        Json l;
        if (const auto* b = std::get_if<BinarizeLayer>(&layer)) {
            l["type"] = "binarize";
            l["threshold"] = b->threshold;
        } else if (const auto* d = std::get_if<DenseLayer>(&layer)) {
            l["type"] = "dense";
            l["in"] = d->in;
            l["out"] = d->out;
            l["kernel"] = kernel_json(d->kernel);
            l["thresholds"] = d->thresholds;
        } else {
            const auto& c = std::get<Conv2dLayer>(layer);
            l["type"] = "conv2d";
            l["kh"] = c.kh;
            l["kw"] = c.kw;
            l["cin"] = c.cin;
            l["cout"] = c.cout;
            l["stride"] = c.stride;
            l["kernel"] = kernel_json(c.kernel);
            l["thresholds"] = c.thresholds;
        }
        layers.push_back(std::move(l));
    }
    doc["layers"] = std::move(layers);
    return doc.dump(2) + "\n";
}

BnnModel load_model_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError(path.string(), "cannot open model file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_model(ss.str());
}

void save_model_file(const BnnModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << save_model(model);
}

Bits binarize_input(std::span<const std::int32_t> raw, std::int32_t threshold) {
    Bits bits(raw.size());
    std::transform(raw.begin(), raw.end(), bits.begin(), [threshold](std::int32_t v) { return v >= threshold ? 1 : 0; });
    return bits;
}

Bits prepare_input(const BnnModel& model, std::span<const std::int32_t> sample) {
    if (sample.size() != model.input_shape.size()) {
        throw ShapeError("sample has " + std::to_string(sample.size()) + " values, model expects " +
                         std::to_string(model.input_shape.size()));
    }
    if (!model.layers.empty()) {
        if (const auto* b = std::get_if<BinarizeLayer>(&model.layers.front())) {
            return binarize_input(sample, b->threshold);
        }
    }
    Bits bits(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) {
        if (sample[i] != 0 && sample[i] != 1) {
            throw ShapeError("model has no binarize layer and sample value " + std::to_string(sample[i]) +
                             " is not a bit");
        }
        bits[i] = static_cast<std::uint8_t>(sample[i]);
    }
    return bits;
}

std::vector<Bits> layer_patches(const Layer& layer, const Bits& input, const Shape& shape) {
    if (std::holds_alternative<DenseLayer>(layer)) return {input};
    const auto& c = std::get<Conv2dLayer>(layer);
    const Shape out = output_shape(layer, shape);
    std::vector<Bits> patches;
    patches.reserve(out.h * out.w);
    for (std::size_t oy = 0; oy < out.h; ++oy) {
        for (std::size_t ox = 0; ox < out.w; ++ox) {
            Bits patch;
            patch.reserve(c.kh * c.kw * c.cin);
            for (std::size_t dy = 0; dy < c.kh; ++dy) {
                for (std::size_t dx = 0; dx < c.kw; ++dx) {
                    const std::size_t y = oy * c.stride + dy;
                    const std::size_t x = ox * c.stride + dx;
                    for (std::size_t ch = 0; ch < c.cin; ++ch) {
                        patch.push_back(input[(y * shape.w + x) * shape.c + ch]);
                    }
                }
            }
            patches.push_back(std::move(patch));
        }
    }
    return patches;
}

Bits threshold_activations(const Layer& layer, std::span<const std::uint32_t> popcounts) {
    const auto n = static_cast<std::int64_t>(fan_in(layer));
    const auto& thr = layer_thresholds(layer);
    const std::size_t units = unit_count(layer);
    Bits out(popcounts.size());
    for (std::size_t i = 0; i < popcounts.size(); ++i) {
        const std::int64_t value = 2 * static_cast<std::int64_t>(popcounts[i]) - n;
        out[i] = value >= thr[i % units] ? 1 : 0;
    }
    return out;
}

std::vector<std::int64_t> final_scores(const Layer& layer, std::span<const std::uint32_t> popcounts) {
    const auto n = static_cast<std::int64_t>(fan_in(layer));
    const auto& thr = layer_thresholds(layer);
    const std::size_t units = unit_count(layer);
    std::vector<std::int64_t> out(popcounts.size());
    for (std::size_t i = 0; i < popcounts.size(); ++i) {
        out[i] = 2 * static_cast<std::int64_t>(popcounts[i]) - n - thr[i % units];
    }
    return out;
}

std::size_t argmax(std::span<const std::int64_t> scores) {
    if (scores.empty()) throw DomainError("argmax of an empty score vector");
    return static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

std::uint32_t xnor_popcount_bits(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    if (a.size() != b.size()) throw ShapeError("XNOR operands differ in length");
    std::uint32_t count = 0;
    for (std::size_t i = 0; i < a.size(); ++i) count += (a[i] == b[i]) ? 1 : 0;
    return count;
}

ForwardTrace host_forward(const BnnModel& model, std::span<const std::int32_t> sample) {
    ForwardTrace trace;
    Bits x = prepare_input(model, sample);
    Shape shape = model.input_shape;

    std::size_t last = 0;
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        if (is_xnor_layer(model.layers[i])) last = i;
    }
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        const Layer& layer = model.layers[i];
        if (!is_xnor_layer(layer)) continue;
        const auto& kernel = layer_kernel(layer);
        const std::vector<Bits> patches = layer_patches(layer, x, shape);
        std::vector<std::uint32_t> pops;
        pops.reserve(patches.size() * kernel.size());
        for (const Bits& patch : patches) {
            for (const Bits& k : kernel) pops.push_back(xnor_popcount_bits(k, patch));
        }
        if (i == last) {
            trace.scores = final_scores(layer, pops);
        } else {
            x = threshold_activations(layer, pops);
            trace.activations.push_back(x);
        }
        trace.popcounts.push_back(std::move(pops));
        shape = output_shape(layer, shape);
    }
    trace.predicted = argmax(trace.scores);
    return trace;
}

namespace {

std::uint32_t read_be32(std::istream& in, std::size_t& offset) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw ParseError(offset, "truncated IDX header");
    offset += 4;
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

}  // namespace

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels, std::size_t limit) {
    std::ifstream img(images, std::ios::binary);
    if (!img) throw Error("cannot open " + images.string());
    std::ifstream lab(labels, std::ios::binary);
    if (!lab) throw Error("cannot open " + labels.string());

    std::size_t off = 0;
    if (read_be32(img, off) != 0x00000803) throw ParseError(0, images.string() + ": not an IDX image file");
    const std::uint32_t count = read_be32(img, off);
    const std::uint32_t rows = read_be32(img, off);
    const std::uint32_t cols = read_be32(img, off);

    std::size_t loff = 0;
    if (read_be32(lab, loff) != 0x00000801) throw ParseError(0, labels.string() + ": not an IDX label file");
    const std::uint32_t label_count = read_be32(lab, loff);
    if (label_count != count) {
        throw ParseError(4, "image count " + std::to_string(count) + " differs from label count " +
                                std::to_string(label_count));
    }

    Dataset ds;
    ds.shape = {rows, cols, 1};
    const std::size_t n = std::min<std::size_t>(count, limit);
    const std::size_t pixels = std::size_t{rows} * cols;
    std::vector<unsigned char> buf(pixels);
    for (std::size_t i = 0; i < n; ++i) {
        if (!img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(pixels))) {
            throw ParseError(off, "truncated image data");
        }
        off += pixels;
        ds.samples.emplace_back(buf.begin(), buf.end());
        char l = 0;
        if (!lab.get(l)) throw ParseError(loff, "truncated label data");
        ++loff;
        ds.labels.push_back(static_cast<std::uint8_t>(l));
    }
    return ds;
}

}  // namespace limsim
