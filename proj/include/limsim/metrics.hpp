#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "limsim/faults.hpp"
#include "limsim/logic.hpp"

namespace limsim {

/// Faulty-output tally of one gate under one fault type.
struct CharacterizationCell {
    Family family;
    GateKind gate;
    FaultType fault;
    std::uint64_t lambda = 0;  // faulty outputs
    std::uint64_t omega = 0;   // all outputs

    double fraction() const { return omega == 0 ? 0.0 : 100.0 * static_cast<double>(lambda) / omega; }

    friend bool operator==(const CharacterizationCell&, const CharacterizationCell&) = default;
};

/// Fault tags a fault type expands to during characterization.
std::vector<FaultTag> fault_polarities(FaultType fault);

/// Slow-write faults only count when the program drives the failing transition.
bool fault_applicable(const GateMicroprogram& prog, FaultType fault);

/// Exhaustive single-fault characterization: every input combination, every
/// initial state of every cell, the fault on each cell in turn (both
/// polarities for SAF), each case on a fresh crossbar.
CharacterizationCell characterize_gate(Family family, GateKind gate, FaultType fault);

/// Mismatch count of the same enumeration with no fault placed.
std::uint64_t fault_free_mismatches(Family family, GateKind gate);

/// Arithmetic mean of percentages. Throws DomainError when empty.
double mean_percentage(std::span<const double> fractions);

/// Quality of Logic: mean faulty-output fraction over gates for one fault.
double qol(std::span<const CharacterizationCell> cells, FaultType fault);

/// Impact of Fault: mean faulty-output fraction over faults for one gate.
double iof(std::span<const CharacterizationCell> cells, GateKind gate);

struct CharacterizationReport {
    Family family;
    std::vector<GateKind> gates;
    std::vector<FaultType> faults;
    /// gates.size() x faults.size(), row-major; empty where a fault does not apply.
    std::vector<std::optional<CharacterizationCell>> matrix;
    std::vector<std::optional<double>> qol;  // per fault; empty if no gate applies
    std::vector<std::optional<double>> iof;  // per gate; empty if no fault applies

    std::size_t g_count() const noexcept { return gates.size(); }
    std::size_t f_count() const noexcept { return faults.size(); }
    const std::optional<CharacterizationCell>& at(std::size_t g, std::size_t f) const {
        return matrix[g * faults.size() + f];
    }
    std::vector<CharacterizationCell> cells() const;
};

CharacterizationReport characterize_family(Family family, std::span<const GateKind> gates,
                                           std::span<const FaultType> faults);

/// CSV with header `gate,fault,lambda,omega,fraction`.
std::string report_csv(const CharacterizationReport& report);

/// Fixed-width table: gates as rows, faults as columns, IoF column, QoL row.
std::string report_table(const CharacterizationReport& report);

}  // namespace limsim
