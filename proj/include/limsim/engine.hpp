#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "limsim/bnn.hpp"
#include "limsim/crossbar.hpp"
#include "limsim/faults.hpp"
#include "limsim/mapper.hpp"

namespace limsim {

/// Clock cycles spent by the controller.
struct CycleCounters {
    std::uint64_t compute = 0;  // program cycles, one row after another
    std::uint64_t write = 0;    // one per row written
    std::uint64_t read = 0;     // one per row read

    std::uint64_t total() const noexcept { return compute + write + read; }
};

/// The memory controller: owns the crossbars described by a stream, with
/// kernels loaded and faults injected.
class ExecutionContext {
public:
    ExecutionContext(InstructionStream stream, std::optional<InjectionConfig> injection);

    const InstructionStream& stream() const noexcept { return stream_; }
    const std::optional<InjectionConfig>& injection() const noexcept { return injection_; }
    Family family() const noexcept { return stream_.header.family; }

    std::vector<Crossbar>& crossbars() noexcept { return crossbars_; }
    const std::vector<Crossbar>& crossbars() const noexcept { return crossbars_; }

    const CycleCounters& cycles() const noexcept { return cycles_; }
    std::size_t injected_faults() const noexcept { return injected_; }

    /// Writes `operand` into the input rows, runs the XNOR program row by row
    /// and reads the output column back. Returns the XNOR bits.
    Bits execute(const ComputeInstr& compute, std::span<const std::uint8_t> operand);

private:
    InstructionStream stream_;
    std::optional<InjectionConfig> injection_;
    std::vector<Crossbar> crossbars_;
    CycleCounters cycles_;
    std::size_t injected_ = 0;
};

/// Validates the stream, creates the crossbars, injects faults into each
/// (crossbar i uses seed derive_seed(cfg.seed, i)) and replays every WRITE.
ExecutionContext load(const InstructionStream& stream, std::optional<InjectionConfig> injection = std::nullopt);

/// Popcount of XNOR(kernel at `placement`, input_bits) computed in the crossbar.
/// Uses the fixed input/output/work columns. Throws ShapeError on a length
/// mismatch.
std::uint32_t xnor_popcount(ExecutionContext& ctx, const Placement& placement, std::span<const std::uint8_t> input_bits);

/// Throws LinkageError unless the stream's COMPUTE templates cover every XNOR
/// layer of `model` exactly (units and operand rows).
void check_linkage(const InstructionStream& stream, const BnnModel& model);

/// Forward pass with every XNOR popcount taken from the crossbars; thresholds,
/// chunk sums and argmax run on the host.
ForwardTrace run_inference(ExecutionContext& ctx, const BnnModel& model, std::span<const std::int32_t> sample);

}  // namespace limsim
