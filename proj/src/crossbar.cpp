#include "limsim/crossbar.hpp"

#include <string>

#include "limsim/error.hpp"
#include "limsim/faults.hpp"

namespace limsim {

std::string_view to_string(FaultTag tag) {
    switch (tag) {
        case FaultTag::None: return "NONE";
        case FaultTag::SA0: return "SA0";
        case FaultTag::SA1: return "SA1";
        case FaultTag::RDF: return "RDF";
        case FaultTag::DRDF: return "DRDF";
        case FaultTag::IRF: return "IRF";
        case FaultTag::SwfSet: return "SWF_SET";
        case FaultTag::SwfReset: return "SWF_RESET";
    }
    return "?";
}

Crossbar::Crossbar(std::size_t rows, std::size_t cols, bool initial)
    : rows_(rows), cols_(cols) {
    if (rows == 0 || cols == 0) {
        throw ConstructionError("crossbar dimensions must be non-zero, got " + std::to_string(rows) + "x" +
                                std::to_string(cols));
    }
    stored_.assign(rows * cols, initial ? 1 : 0);
    tags_.assign(rows * cols, FaultTag::None);
    row_log_.resize(rows);
    col_log_.resize(cols);
}

std::size_t Crossbar::index(std::size_t r, std::size_t c) const {
    if (r >= rows_ || c >= cols_) {
        throw AddressError("cell (" + std::to_string(r) + "," + std::to_string(c) + ") outside " +
                           std::to_string(rows_) + "x" + std::to_string(cols_) + " crossbar");
    }
    return r * cols_ + c;
}

void Crossbar::record(PulseKind kind, std::size_t r, std::size_t c) {
    auto bump = [kind](PulseCounters& p) {
        switch (kind) {
            case PulseKind::Read: ++p.reads; break;
            case PulseKind::Write: ++p.writes; break;
            case PulseKind::Compute: ++p.computes; break;
        }
    };
    bump(row_log_[r]);
    bump(col_log_[c]);
    if (trace_enabled_) {
        trace_.push_back({kind, {r, c}});
    }
}

bool Crossbar::sense(std::size_t r, std::size_t c) {
    const std::size_t i = index(r, c);
    const ReadOutcome out = apply_on_read(tags_[i], stored_[i] != 0);
    stored_[i] = out.new_stored ? 1 : 0;
    return out.returned;
}

void Crossbar::drive(std::size_t r, std::size_t c, bool target) {
    const std::size_t i = index(r, c);
    stored_[i] = apply_on_write(tags_[i], stored_[i] != 0, target) ? 1 : 0;
}

void Crossbar::write_cell(std::size_t r, std::size_t c, bool target) {
    drive(r, c, target);
    record(PulseKind::Write, r, c);
}

bool Crossbar::read_cell(std::size_t r, std::size_t c) {
    const bool v = sense(r, c);
    record(PulseKind::Read, r, c);
    return v;
}

void Crossbar::log_compute(std::size_t r, std::size_t c) {
    index(r, c);
    record(PulseKind::Compute, r, c);
}

bool Crossbar::effective(std::size_t r, std::size_t c) const {
    const std::size_t i = index(r, c);
    switch (tags_[i]) {
        case FaultTag::SA0: return false;
        case FaultTag::SA1: return true;
        default: return stored_[i] != 0;
    }
}

BitGrid Crossbar::snapshot() const {
    BitGrid grid(rows_, cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            grid.set(r, c, effective(r, c));
        }
    }
    return grid;
}

void Crossbar::preset(std::size_t r, std::size_t c, bool value) { stored_[index(r, c)] = value ? 1 : 0; }

FaultTag Crossbar::tag(std::size_t r, std::size_t c) const { return tags_[index(r, c)]; }

void Crossbar::set_tag(std::size_t r, std::size_t c, FaultTag tag) {
    FaultTag& slot = tags_[index(r, c)];
    if (slot == FaultTag::None && tag != FaultTag::None) {
        ++fault_count_;
    } else if (slot != FaultTag::None && tag == FaultTag::None) {
        --fault_count_;
    }
    slot = tag;
}

const PulseCounters& Crossbar::row_pulses(std::size_t r) const {
    if (r >= rows_) throw AddressError("row " + std::to_string(r) + " out of range");
    return row_log_[r];
}

const PulseCounters& Crossbar::col_pulses(std::size_t c) const {
    if (c >= cols_) throw AddressError("column " + std::to_string(c) + " out of range");
    return col_log_[c];
}

namespace {
PulseCounters sum(const std::vector<PulseCounters>& log) {
    PulseCounters total;
    for (const auto& p : log) {
        total.reads += p.reads;
        total.writes += p.writes;
        total.computes += p.computes;
    }
    return total;
}
}  // namespace

PulseCounters Crossbar::total_row_pulses() const { return sum(row_log_); }
PulseCounters Crossbar::total_col_pulses() const { return sum(col_log_); }

}  // namespace limsim
