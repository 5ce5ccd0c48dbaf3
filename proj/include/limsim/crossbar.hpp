#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace limsim {

// Logic levels: HRS encodes 0, LRS encodes 1.
inline constexpr bool kHrs = false;
inline constexpr bool kLrs = true;

/// Fault attached to a single memristive cell. At most one per cell.
enum class FaultTag : std::uint8_t { None, SA0, SA1, RDF, DRDF, IRF, SwfSet, SwfReset };

std::string_view to_string(FaultTag tag);

struct Coord {
    std::size_t row = 0;
    std::size_t col = 0;

    friend bool operator==(const Coord&, const Coord&) = default;
};

struct PulseCounters {
    std::uint64_t reads = 0;
    std::uint64_t writes = 0;
    std::uint64_t computes = 0;

    friend bool operator==(const PulseCounters&, const PulseCounters&) = default;
};

enum class PulseKind : std::uint8_t { Read, Write, Compute };

/// One entry of the optional verbose pulse trace.
struct PulseEvent {
    PulseKind kind;
    Coord cell;
};

/// Dense row-major grid of logic levels.
class BitGrid {
public:
    BitGrid(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), bits_(rows * cols, 0) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool at(std::size_t r, std::size_t c) const { return bits_[r * cols_ + c] != 0; }
    void set(std::size_t r, std::size_t c, bool v) { bits_[r * cols_ + c] = v ? 1 : 0; }

    friend bool operator==(const BitGrid&, const BitGrid&) = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<std::uint8_t> bits_;
};

/// 2-D array of binary memristive cells with fault-aware access and per-line
/// pulse counters.
///
/// `read_cell`/`write_cell` are controller accesses and are logged as read and
/// write pulses. Logic steps executed inside a compute cycle use `sense` and
/// `drive`, which apply the same fault semantics but are accounted for by a
/// single `log_compute` per cycle.
///
/// Not safe for concurrent mutation; use one instance per trial.
class Crossbar {
public:
    Crossbar(std::size_t rows, std::size_t cols, bool initial = kHrs);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    void write_cell(std::size_t r, std::size_t c, bool target);
    bool read_cell(std::size_t r, std::size_t c);

    bool sense(std::size_t r, std::size_t c);
    void drive(std::size_t r, std::size_t c, bool target);
    void log_compute(std::size_t r, std::size_t c);

    /// Effective stored values; stuck-at cells report their pinned level.
    /// Never triggers faults or pulse accounting.
    BitGrid snapshot() const;
    bool effective(std::size_t r, std::size_t c) const;

    /// Overwrites the raw stored level without pulses or fault semantics.
    /// Used to establish arbitrary initial conditions.
    void preset(std::size_t r, std::size_t c, bool value);

    FaultTag tag(std::size_t r, std::size_t c) const;
    void set_tag(std::size_t r, std::size_t c, FaultTag tag);
    std::size_t fault_count() const noexcept { return fault_count_; }

    const PulseCounters& row_pulses(std::size_t r) const;
    const PulseCounters& col_pulses(std::size_t c) const;
    PulseCounters total_row_pulses() const;
    PulseCounters total_col_pulses() const;

    void set_trace(bool enabled) { trace_enabled_ = enabled; }
    const std::vector<PulseEvent>& trace() const noexcept { return trace_; }

private:
    std::size_t index(std::size_t r, std::size_t c) const;
    void record(PulseKind kind, std::size_t r, std::size_t c);

    std::size_t rows_;
    std::size_t cols_;
    std::vector<std::uint8_t> stored_;
    std::vector<FaultTag> tags_;
    std::size_t fault_count_ = 0;
    std::vector<PulseCounters> row_log_;
    std::vector<PulseCounters> col_log_;
    bool trace_enabled_ = false;
    std::vector<PulseEvent> trace_;
};

}  // namespace limsim
