#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "limsim/crossbar.hpp"

namespace limsim {

/// Experiment-level fault selector. SAF expands to SA0/SA1 per cell.
enum class FaultType : std::uint8_t { SAF, RDF, DRDF, IRF, SwfSet, SwfReset };

inline constexpr std::array<FaultType, 6> kAllFaultTypes = {
    FaultType::SAF, FaultType::RDF, FaultType::DRDF, FaultType::IRF, FaultType::SwfSet, FaultType::SwfReset};

/// The four read/retention faults reported in the gate characterization tables.
inline constexpr std::array<FaultType, 4> kTableFaultTypes = {FaultType::SAF, FaultType::RDF, FaultType::DRDF,
                                                              FaultType::IRF};

std::string_view to_string(FaultType fault);
std::optional<FaultType> parse_fault_type(std::string_view name);

struct InjectionConfig {
    FaultType fault = FaultType::SAF;
    double rate = 0.0;  // fraction of cells, in [0, 1]
    std::uint64_t seed = 0;
};

struct ReadOutcome {
    bool returned;
    bool new_stored;

    friend bool operator==(const ReadOutcome&, const ReadOutcome&) = default;
};

ReadOutcome apply_on_read(FaultTag tag, bool stored);
bool apply_on_write(FaultTag tag, bool stored, bool target);

/// Tags exactly round(rate * rows * cols) cells, chosen uniformly without
/// replacement from a generator seeded with `cfg.seed`. For SAF each chosen
/// cell is SA0 or SA1 with probability 1/2, drawn from the same stream.
/// Returns the number of tagged cells.
std::size_t inject(Crossbar& xbar, const InjectionConfig& cfg);

/// Number of cells `inject` tags for a given rate and array size.
std::size_t injection_count(double rate, std::size_t cells);

/// SplitMix64 finalizer; used to derive independent child seeds.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace limsim
