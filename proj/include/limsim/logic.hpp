#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "limsim/crossbar.hpp"

namespace limsim {

enum class Family : std::uint8_t { Imply = 0, Magic = 1 };

enum class GateKind : std::uint8_t { And, Imp, Nand, Nor, Not, Or, Xnor, Nimp, Xor };

inline constexpr std::array<GateKind, 9> kAllGates = {GateKind::And,  GateKind::Imp, GateKind::Nand,
                                                      GateKind::Nor,  GateKind::Not, GateKind::Or,
                                                      GateKind::Xnor, GateKind::Nimp, GateKind::Xor};

std::string_view to_string(Family family);
std::string_view to_string(GateKind gate);
std::optional<Family> parse_family(std::string_view name);
std::optional<GateKind> parse_gate(std::string_view name);

/// Index of a memristor within a microprogram. Roles 0 (and 1) are the inputs.
using Role = std::uint8_t;

/// FALSE/TRUE initialization of one cell.
struct InitStep {
    Role cell;
    bool value;
};

/// Material implication: q <- !p | q.
struct ImplyStep {
    Role p;
    Role q;
};

enum class MagicOp : std::uint8_t {
    Nor,   // output pre-set to LRS, reset when either input is 1
    Or,    // output pre-set to HRS, set when either input is 1
    Nimp,  // output pre-set to HRS, set when in0 & !in1
};

/// Single-cycle MAGIC evaluation. The output switches in one direction only,
/// so it must hold the op's initialization level beforehand.
struct MagicStep {
    MagicOp op;
    std::array<Role, 2> in;
    Role out;
};

using Step = std::variant<InitStep, ImplyStep, MagicStep>;

/// Steps issued in the same clock cycle. They touch pairwise disjoint cells.
using Cycle = std::vector<Step>;

struct Budget {
    std::size_t mem = 0;
    std::size_t cycles = 0;

    friend bool operator==(const Budget&, const Budget&) = default;
};

struct GateMicroprogram {
    Family family;
    GateKind gate;
    std::size_t mem_count;
    std::size_t input_count;
    Role output;
    std::vector<Cycle> cycles;
    /// Output initialization performed by the controller's write phase for
    /// single-cycle MAGIC gates; not charged as a cycle.
    std::optional<InitStep> preset;

    std::size_t cycle_count() const noexcept { return cycles.size(); }
    Budget budget() const noexcept { return {mem_count, cycles.size()}; }
};

bool is_supported(Family family, GateKind gate);

/// Gates offered by a family, in table order.
std::vector<GateKind> family_gates(Family family);

/// Gates listed in the published per-family fault tables (seven per family).
std::vector<GateKind> characterized_gates(Family family);

/// Reference device/cycle budget from the published comparison table.
Budget reference_budget(Family family, GateKind gate);

/// Throws UnsupportedGateError for IMPLY/NIMP, MAGIC/IMP and MAGIC/NOT.
const GateMicroprogram& microprogram(Family family, GateKind gate);

/// Boolean reference value of `gate`. `b` is ignored for NOT.
bool gate_truth(GateKind gate, bool a, bool b);

/// Runs the program's cycles on already-loaded cells. Each cycle logs one
/// compute pulse at the cell driven by its first step. Does not read the output.
void run_cycles(Crossbar& xbar, const GateMicroprogram& prog, std::span<const Coord> binding);

/// Loads inputs (and the MAGIC preset) with controller writes, runs every
/// cycle, then reads the output cell with a controller read.
bool execute_gate(Crossbar& xbar, const GateMicroprogram& prog, std::span<const Coord> binding,
                  std::span<const bool> inputs);

/// Column assignment for row-parallel XNOR over two stored operand columns.
struct XnorColumns {
    std::size_t a = 0;    // preserved operand (kernel)
    std::size_t b = 0;    // consumed operand (input)
    std::size_t out = 0;
    std::vector<std::size_t> work;
};

/// Number of work columns the family's XNOR program needs.
std::size_t xnor_work_count(Family family);

/// Executes the XNOR program in every row of [row_offset, row_offset + len)
/// without reading the outputs.
void run_xnor_rows(Crossbar& xbar, Family family, const XnorColumns& cols, std::size_t row_offset,
                   std::size_t len);

std::vector<bool> xnor_vector(Crossbar& xbar, Family family, const XnorColumns& cols, std::size_t row_offset,
                              std::size_t len);

/// Picks the lowest-indexed free columns as work columns.
std::vector<bool> xnor_vector(Crossbar& xbar, Family family, std::size_t a_col, std::size_t b_col,
                              std::size_t out_col, std::size_t len);

}  // namespace limsim
