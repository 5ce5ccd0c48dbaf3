#include "limsim/logic.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <string>
#include <utility>

#include "limsim/error.hpp"

namespace limsim {

std::string_view to_string(Family family) {
    return family == Family::Imply ? "IMPLY" : "MAGIC";
}

std::string_view to_string(GateKind gate) {
    switch (gate) {
        case GateKind::And: return "AND";
        case GateKind::Imp: return "IMP";
        case GateKind::Nand: return "NAND";
        case GateKind::Nor: return "NOR";
        case GateKind::Not: return "NOT";
        case GateKind::Or: return "OR";
        case GateKind::Xnor: return "XNOR";
        case GateKind::Nimp: return "NIMP";
        case GateKind::Xor: return "XOR";
    }
    return "?";
}

namespace {
std::string upper(std::string_view s) {
    std::string out(s);
    for (char& ch : out) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return out;
}
}  // namespace

std::optional<Family> parse_family(std::string_view name) {
    const std::string u = upper(name);
    if (u == "IMPLY") return Family::Imply;
    if (u == "MAGIC") return Family::Magic;
    return std::nullopt;
}

std::optional<GateKind> parse_gate(std::string_view name) {
    const std::string u = upper(name);
    for (GateKind g : kAllGates) {
        if (to_string(g) == u) return g;
    }
    return std::nullopt;
}

bool gate_truth(GateKind gate, bool a, bool b) {
    switch (gate) {
        case GateKind::And: return a && b;
        case GateKind::Imp: return !a || b;
        case GateKind::Nand: return !(a && b);
        case GateKind::Nor: return !(a || b);
        case GateKind::Not: return !a;
        case GateKind::Or: return a || b;
        case GateKind::Xnor: return a == b;
        case GateKind::Nimp: return a && !b;
        case GateKind::Xor: return a != b;
    }
    return false;
}

namespace {

Step init(Role cell, bool value) { return InitStep{cell, value}; }
Step imp(Role p, Role q) { return ImplyStep{p, q}; }
Step nor(Role x, Role y, Role out) { return MagicStep{MagicOp::Nor, {x, y}, out}; }
Step mor(Role x, Role y, Role out) { return MagicStep{MagicOp::Or, {x, y}, out}; }
Step nimp(Role x, Role y, Role out) { return MagicStep{MagicOp::Nimp, {x, y}, out}; }

GateMicroprogram make(Family f, GateKind g, std::size_t mem, Role out, std::vector<Cycle> cycles,
                      std::optional<InitStep> preset = std::nullopt) {
    const std::size_t inputs = g == GateKind::Not ? 1 : 2;
    return GateMicroprogram{f, g, mem, inputs, out, std::move(cycles), preset};
}

// Role 0 and 1 hold the operands; higher roles are work cells. The XNOR
// programs never write role 0 so a stored kernel survives repeated use.
std::map<std::pair<Family, GateKind>, GateMicroprogram> build_library() {
    using F = Family;
    using G = GateKind;
    std::map<std::pair<F, G>, GateMicroprogram> lib;
    auto add = [&lib](GateMicroprogram p) { lib.emplace(std::make_pair(p.family, p.gate), std::move(p)); };

    add(make(F::Imply, G::Imp, 2, 1, {{imp(0, 1)}}));
    add(make(F::Imply, G::Not, 2, 1, {{init(1, false)}, {imp(0, 1)}}));
    add(make(F::Imply, G::Nand, 3, 2, {{init(2, false)}, {imp(0, 2)}, {imp(1, 2)}}));
    add(make(F::Imply, G::Or, 3, 1, {{init(2, false)}, {imp(0, 2)}, {imp(2, 1)}}));
    add(make(F::Imply, G::Nor, 3, 0,
             {{init(2, false)}, {imp(0, 2)}, {imp(2, 1)}, {init(0, false)}, {imp(1, 0)}}));
    // NAND accumulates in role 2 while role 0 is cleared in the same cycle.
    add(make(F::Imply, G::And, 3, 0, {{init(2, false)}, {imp(0, 2)}, {init(0, false), imp(1, 2)}, {imp(2, 0)}}));
    // s = !a, t = !b; b <- a|b; then t <- NAND, s <- NOR; s <- !NAND | NOR.
    add(make(F::Imply, G::Xnor, 4, 2,
             {{init(2, false), init(3, false)},
              {imp(0, 2), imp(1, 3)},
              {imp(2, 1)},
              {init(2, false)},
              {imp(0, 3), imp(1, 2)},
              {imp(3, 2)}}));
    // One cycle over the reference budget; see reference_budget().
    add(make(F::Imply, G::Xor, 4, 2,
             {{init(2, false)},
              {init(3, false), imp(0, 2)},
              {imp(2, 3)},
              {init(2, false), imp(1, 3)},
              {imp(0, 1), imp(3, 2)},
              {imp(1, 2)}}));

    add(make(F::Magic, G::Nor, 3, 2, {{nor(0, 1, 2)}}, InitStep{2, kLrs}));
    add(make(F::Magic, G::Or, 3, 2, {{mor(0, 1, 2)}}, InitStep{2, kHrs}));
    add(make(F::Magic, G::Nimp, 3, 2, {{nimp(0, 1, 2)}}, InitStep{2, kHrs}));
    add(make(F::Magic, G::Xor, 3, 2, {{init(2, kHrs)}, {nimp(0, 1, 2)}, {nimp(1, 0, 2)}}));
    // XOR into role 2, clear b as a constant-0 operand, NOR into role 3.
    add(make(F::Magic, G::Xnor, 4, 3,
             {{init(2, kHrs)}, {nimp(0, 1, 2)}, {nimp(1, 0, 2)}, {init(1, kHrs)}, {init(3, kLrs)}, {nor(2, 1, 3)}}));
    // NOT is realized as NOR against a cell cleared to 0. Work cells return
    // to LRS after the result is formed.
    std::vector<Cycle> and_cycles = {{init(3, kHrs)}, {init(2, kLrs)}, {nor(0, 3, 2)}, {init(4, kLrs)},
                                     {nor(1, 3, 4)},  {init(3, kLrs)}, {nor(2, 4, 3)}};
    std::vector<Cycle> nand_cycles = and_cycles;
    and_cycles.push_back({init(2, kLrs)});
    and_cycles.push_back({init(4, kLrs)});
    add(make(F::Magic, G::And, 5, 3, std::move(and_cycles)));
    nand_cycles.push_back({init(2, kHrs)});
    nand_cycles.push_back({init(4, kLrs)});
    nand_cycles.push_back({nor(3, 2, 4)});
    nand_cycles.push_back({init(2, kLrs)});
    nand_cycles.push_back({init(3, kLrs)});
    add(make(F::Magic, G::Nand, 5, 4, std::move(nand_cycles)));
    return lib;
}

const std::map<std::pair<Family, GateKind>, GateMicroprogram>& library() {
    static const auto lib = build_library();
    return lib;
}

Role driven_cell(const Step& step) {
    return std::visit(
        [](const auto& s) -> Role {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, InitStep>) {
                return s.cell;
            } else if constexpr (std::is_same_v<T, ImplyStep>) {
                return s.q;
            } else {
                return s.out;
            }
        },
        step);
}

void run_step(Crossbar& xbar, const Step& step, std::span<const Coord> at) {
    auto sense = [&](Role r) { return xbar.sense(at[r].row, at[r].col); };
    auto drive = [&](Role r, bool v) { xbar.drive(at[r].row, at[r].col, v); };
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, InitStep>) {
                drive(s.cell, s.value);
            } else if constexpr (std::is_same_v<T, ImplyStep>) {
                const bool p = sense(s.p);
                const bool q = sense(s.q);
                drive(s.q, !p || q);
            } else {
                const bool x = sense(s.in[0]);
                const bool y = sense(s.in[1]);
                const bool o = sense(s.out);
                switch (s.op) {
                    case MagicOp::Nor: drive(s.out, o && !(x || y)); break;
                    case MagicOp::Or: drive(s.out, o || x || y); break;
                    case MagicOp::Nimp: drive(s.out, o || (x && !y)); break;
                }
            }
        },
        step);
}

void check_binding(const Crossbar& xbar, const GateMicroprogram& prog, std::span<const Coord> binding) {
    if (binding.size() != prog.mem_count) {
        throw AddressError("binding has " + std::to_string(binding.size()) + " cells, program needs " +
                           std::to_string(prog.mem_count));
    }
    for (std::size_t i = 0; i < binding.size(); ++i) {
        if (binding[i].row >= xbar.rows() || binding[i].col >= xbar.cols()) {
            throw AddressError("role " + std::to_string(i) + " bound outside the crossbar");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (binding[i] == binding[j]) {
                throw AddressError("roles " + std::to_string(j) + " and " + std::to_string(i) +
                                   " bound to the same cell");
            }
        }
    }
}

}  // namespace

bool is_supported(Family family, GateKind gate) { return library().contains({family, gate}); }

std::vector<GateKind> family_gates(Family family) {
    std::vector<GateKind> out;
    for (GateKind g : kAllGates) {
        if (is_supported(family, g)) out.push_back(g);
    }
    return out;
}

std::vector<GateKind> characterized_gates(Family family) {
    using G = GateKind;
    if (family == Family::Imply) {
        return {G::And, G::Imp, G::Nand, G::Nor, G::Not, G::Or, G::Xnor};
    }
    return {G::And, G::Nimp, G::Nand, G::Nor, G::Xor, G::Or, G::Xnor};
}

Budget reference_budget(Family family, GateKind gate) {
    using G = GateKind;
    if (family == Family::Imply) {
        switch (gate) {
            case G::And: return {3, 4};
            case G::Imp: return {2, 1};
            case G::Nand: return {3, 3};
            case G::Nor: return {3, 5};
            case G::Not: return {2, 2};
            case G::Or: return {3, 3};
            case G::Xnor: return {4, 6};
            case G::Xor: return {4, 5};
            case G::Nimp: break;
        }
    } else {
        switch (gate) {
            case G::And: return {5, 9};
            case G::Nand: return {5, 12};
            case G::Nor: return {3, 1};
            case G::Or: return {3, 1};
            case G::Xnor: return {4, 6};
            case G::Nimp: return {3, 1};
            case G::Xor: return {3, 3};
            case G::Imp:
            case G::Not: break;
        }
    }
    throw UnsupportedGateError(std::string(to_string(gate)) + " is not offered by the " +
                               std::string(to_string(family)) + " family");
}

const GateMicroprogram& microprogram(Family family, GateKind gate) {
    const auto& lib = library();
    auto it = lib.find({family, gate});
    if (it == lib.end()) {
        throw UnsupportedGateError(std::string(to_string(gate)) + " is not offered by the " +
                                   std::string(to_string(family)) + " family");
    }
    return it->second;
}

void run_cycles(Crossbar& xbar, const GateMicroprogram& prog, std::span<const Coord> binding) {
    for (const Cycle& cycle : prog.cycles) {
        for (const Step& step : cycle) {
            run_step(xbar, step, binding);
        }
        const Coord& c = binding[driven_cell(cycle.front())];
        xbar.log_compute(c.row, c.col);
    }
}

bool execute_gate(Crossbar& xbar, const GateMicroprogram& prog, std::span<const Coord> binding,
                  std::span<const bool> inputs) {
    check_binding(xbar, prog, binding);
    if (inputs.size() != prog.input_count) {
        throw ShapeError(std::string(to_string(prog.gate)) + " takes " + std::to_string(prog.input_count) +
                         " inputs, got " + std::to_string(inputs.size()));
    }
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        xbar.write_cell(binding[i].row, binding[i].col, inputs[i]);
    }
    if (prog.preset) {
        const Coord& c = binding[prog.preset->cell];
        xbar.write_cell(c.row, c.col, prog.preset->value);
    }
    run_cycles(xbar, prog, binding);
    const Coord& out = binding[prog.output];
    return xbar.read_cell(out.row, out.col);
}

std::size_t xnor_work_count(Family family) { return microprogram(family, GateKind::Xnor).mem_count - 3; }

namespace {

// Role -> column for the XNOR program of `family`.
std::vector<std::size_t> xnor_role_columns(const GateMicroprogram& prog, const XnorColumns& cols) {
    std::vector<std::size_t> role_col(prog.mem_count);
    role_col[0] = cols.a;
    role_col[1] = cols.b;
    role_col[prog.output] = cols.out;
    std::size_t next = 0;
    for (Role r = 2; r < prog.mem_count; ++r) {
        if (r == prog.output) continue;
        role_col[r] = cols.work.at(next++);
    }
    return role_col;
}

void check_xnor_columns(const Crossbar& xbar, const GateMicroprogram& prog, const XnorColumns& cols,
                        std::size_t row_offset, std::size_t len) {
    if (cols.work.size() != prog.mem_count - 3) {
        throw CapacityError("XNOR needs " + std::to_string(prog.mem_count - 3) + " work columns, got " +
                            std::to_string(cols.work.size()));
    }
    std::vector<std::size_t> all = {cols.a, cols.b, cols.out};
    all.insert(all.end(), cols.work.begin(), cols.work.end());
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (all[i] >= xbar.cols()) throw AddressError("column " + std::to_string(all[i]) + " out of range");
        for (std::size_t j = 0; j < i; ++j) {
            if (all[i] == all[j]) throw AddressError("XNOR columns must be distinct");
        }
    }
    if (row_offset + len > xbar.rows()) {
        throw CapacityError("rows " + std::to_string(row_offset) + "+" + std::to_string(len) + " exceed " +
                            std::to_string(xbar.rows()));
    }
}

}  // namespace

void run_xnor_rows(Crossbar& xbar, Family family, const XnorColumns& cols, std::size_t row_offset,
                   std::size_t len) {
    const GateMicroprogram& prog = microprogram(family, GateKind::Xnor);
    check_xnor_columns(xbar, prog, cols, row_offset, len);
    const std::vector<std::size_t> role_col = xnor_role_columns(prog, cols);
    std::vector<Coord> binding(prog.mem_count);
    for (std::size_t r = row_offset; r < row_offset + len; ++r) {
        for (std::size_t i = 0; i < binding.size(); ++i) binding[i] = {r, role_col[i]};
        run_cycles(xbar, prog, binding);
    }
}

std::vector<bool> xnor_vector(Crossbar& xbar, Family family, const XnorColumns& cols, std::size_t row_offset,
                              std::size_t len) {
    run_xnor_rows(xbar, family, cols, row_offset, len);
    std::vector<bool> out(len);
    for (std::size_t i = 0; i < len; ++i) out[i] = xbar.read_cell(row_offset + i, cols.out);
    return out;
}

std::vector<bool> xnor_vector(Crossbar& xbar, Family family, std::size_t a_col, std::size_t b_col,
                              std::size_t out_col, std::size_t len) {
    XnorColumns cols{a_col, b_col, out_col, {}};
    const std::size_t need = xnor_work_count(family);
    for (std::size_t c = 0; c < xbar.cols() && cols.work.size() < need; ++c) {
        if (c != a_col && c != b_col && c != out_col) cols.work.push_back(c);
    }
    if (cols.work.size() < need) {
        throw CapacityError("crossbar has no room for " + std::to_string(need) + " XNOR work column(s)");
    }
    return xnor_vector(xbar, family, cols, 0, len);
}

}  // namespace limsim
