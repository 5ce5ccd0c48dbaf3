#include "limsim/engine.hpp"

#include <algorithm>
#include <numeric>

#include "limsim/error.hpp"

namespace limsim {

ExecutionContext::ExecutionContext(InstructionStream stream, std::optional<InjectionConfig> injection)
    : stream_(std::move(stream)), injection_(injection) {
    validate_stream(stream_);
    const StreamHeader& h = stream_.header;
    crossbars_.reserve(h.crossbar_count);
    for (std::size_t i = 0; i < h.crossbar_count; ++i) {
        crossbars_.emplace_back(h.rows, h.cols);
        if (injection_) {
            InjectionConfig cfg = *injection_;
            cfg.seed = derive_seed(injection_->seed, i);
            injected_ += inject(crossbars_.back(), cfg);
        }
    }
    for (const Instruction& ins : stream_.records) {
        if (const auto* w = std::get_if<WriteInstr>(&ins)) {
            Crossbar& xbar = crossbars_[w->xb];
            for (std::size_t i = 0; i < w->bits.size(); ++i) xbar.write_cell(w->row_offset + i, w->col, w->bits[i] != 0);
            cycles_.write += w->bits.size();
        }
    }
}

Bits ExecutionContext::execute(const ComputeInstr& c, std::span<const std::uint8_t> operand) {
    if (c.gate != GateKind::Xnor) throw UnsupportedGateError("the controller only executes XNOR templates");
    if (operand.size() != c.length) {
        throw ShapeError("operand has " + std::to_string(operand.size()) + " bits, COMPUTE spans " +
                         std::to_string(c.length) + " rows");
    }
    if (c.xb >= crossbars_.size()) throw AddressError("crossbar " + std::to_string(c.xb) + " out of range");
    Crossbar& xbar = crossbars_[c.xb];
    for (std::size_t i = 0; i < c.length; ++i) xbar.write_cell(c.row_offset + i, c.b_col, operand[i] != 0);
    cycles_.write += c.length;

    XnorColumns cols{c.a_col, c.b_col, c.out_col, {c.work.begin(), c.work.end()}};
    run_xnor_rows(xbar, family(), cols, c.row_offset, c.length);
    cycles_.compute += std::uint64_t{c.length} * microprogram(family(), GateKind::Xnor).cycle_count();

    Bits out(c.length);
    for (std::size_t i = 0; i < c.length; ++i) out[i] = xbar.read_cell(c.row_offset + i, c.out_col) ? 1 : 0;
    cycles_.read += c.length;
    return out;
}

ExecutionContext load(const InstructionStream& stream, std::optional<InjectionConfig> injection) {
    return ExecutionContext(stream, injection);
}

std::uint32_t xnor_popcount(ExecutionContext& ctx, const Placement& placement, std::span<const std::uint8_t> input_bits) {
    if (input_bits.size() != placement.length) {
        throw ShapeError("input has " + std::to_string(input_bits.size()) + " bits, placement holds " +
                         std::to_string(placement.length));
    }
    ComputeInstr c;
    c.xb = static_cast<std::uint16_t>(placement.crossbar_id);
    c.a_col = static_cast<std::uint32_t>(placement.column);
    c.b_col = static_cast<std::uint32_t>(kInputColumn);
    c.out_col = static_cast<std::uint32_t>(kOutputColumn);
    for (std::size_t w = kFirstWorkColumn; w < reserved_columns(ctx.family()); ++w) {
        c.work.push_back(static_cast<std::uint32_t>(w));
    }
    c.row_offset = static_cast<std::uint32_t>(placement.row_offset);
    c.length = static_cast<std::uint32_t>(placement.length);
    const Bits out = ctx.execute(c, input_bits);
    return static_cast<std::uint32_t>(std::count(out.begin(), out.end(), std::uint8_t{1}));
}

namespace {

// COMPUTE record indices per model layer.
std::vector<std::vector<std::size_t>> group_computes(const InstructionStream& stream, const BnnModel& model) {
    std::vector<std::vector<std::size_t>> by_layer(model.layers.size());
    for (std::size_t i = 0; i < stream.records.size(); ++i) {
        const auto* c = std::get_if<ComputeInstr>(&stream.records[i]);
        if (!c) continue;
        const std::string where = "COMPUTE at records[" + std::to_string(i) + "]";
        if (c->gate != GateKind::Xnor) throw LinkageError(where + " is not an XNOR template");
        if (c->layer >= model.layers.size() || !is_xnor_layer(model.layers[c->layer])) {
            throw LinkageError(where + " names layer " + std::to_string(c->layer) +
                               ", which is not an XNOR layer of the model");
        }
        if (c->unit >= unit_count(model.layers[c->layer])) {
            throw LinkageError(where + " names unit " + std::to_string(c->unit) + " of layer " +
                               std::to_string(c->layer) + ", which has " +
                               std::to_string(unit_count(model.layers[c->layer])) + " units");
        }
        by_layer[c->layer].push_back(i);
    }
    return by_layer;
}

}  // namespace

void check_linkage(const InstructionStream& stream, const BnnModel& model) {
    const auto by_layer = group_computes(stream, model);
    for (std::size_t li = 0; li < model.layers.size(); ++li) {
        const Layer& layer = model.layers[li];
        if (!is_xnor_layer(layer)) continue;
        const std::size_t n = fan_in(layer);
        std::vector<std::vector<RowRange>> spans(unit_count(layer));
        for (std::size_t idx : by_layer[li]) {
            const auto& c = std::get<ComputeInstr>(stream.records[idx]);
            spans[c.unit].push_back({c.input_offset, std::size_t{c.input_offset} + c.length});
        }
        for (std::size_t u = 0; u < spans.size(); ++u) {
            auto& s = spans[u];
            std::sort(s.begin(), s.end(), [](const RowRange& a, const RowRange& b) { return a.begin < b.begin; });
            std::size_t next = 0;
            for (const RowRange& r : s) {
                if (r.begin != next) break;
                next = r.end;
            }
            if (next != n || std::accumulate(s.begin(), s.end(), std::size_t{0},
                                             [](std::size_t acc, const RowRange& r) { return acc + r.size(); }) != n) {
                throw LinkageError("layer " + std::to_string(li) + " unit " + std::to_string(u) +
                                   ": stream operands do not tile the " + std::to_string(n) + " input bits");
            }
        }
    }
}

ForwardTrace run_inference(ExecutionContext& ctx, const BnnModel& model, std::span<const std::int32_t> sample) {
    check_linkage(ctx.stream(), model);
    const auto by_layer = group_computes(ctx.stream(), model);

    ForwardTrace trace;
    Bits x = prepare_input(model, sample);
    Shape shape = model.input_shape;
    std::size_t last = 0;
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        if (is_xnor_layer(model.layers[i])) last = i;
    }

    for (std::size_t li = 0; li < model.layers.size(); ++li) {
        const Layer& layer = model.layers[li];
        if (!is_xnor_layer(layer)) continue;
        const std::size_t units = unit_count(layer);
        const std::vector<Bits> patches = layer_patches(layer, x, shape);
        std::vector<std::uint32_t> pops(patches.size() * units, 0);
        for (std::size_t pos = 0; pos < patches.size(); ++pos) {
            const Bits& patch = patches[pos];
            for (std::size_t idx : by_layer[li]) {
                const auto& c = std::get<ComputeInstr>(ctx.stream().records[idx]);
                const Bits out =
                    ctx.execute(c, std::span<const std::uint8_t>(patch).subspan(c.input_offset, c.length));
                pops[pos * units + c.unit] += static_cast<std::uint32_t>(std::count(out.begin(), out.end(), 1));
            }
        }
        if (li == last) {
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

}  // namespace limsim
