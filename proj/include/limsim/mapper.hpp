#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "limsim/bnn.hpp"
#include "limsim/logic.hpp"

namespace limsim {

inline constexpr std::array<char, 4> kStreamMagic = {'X', 'F', 'L', 'T'};
inline constexpr std::uint16_t kStreamVersion = 1;

/// Fixed column roles on every crossbar; kernels start after the work columns.
inline constexpr std::size_t kInputColumn = 0;
inline constexpr std::size_t kOutputColumn = 1;
inline constexpr std::size_t kFirstWorkColumn = 2;

/// Input, output and XNOR work columns held back from kernel placement.
std::size_t reserved_columns(Family family);

struct StreamHeader {
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    Family family = Family::Imply;
    std::uint16_t crossbar_count = 1;

    friend bool operator==(const StreamHeader&, const StreamHeader&) = default;
};

/// Stores `bits` into rows [row_offset, row_offset + bits.size()) of one column.
struct WriteInstr {
    std::uint16_t xb = 0;
    std::uint32_t col = 0;
    std::uint32_t row_offset = 0;
    Bits bits;

    friend bool operator==(const WriteInstr&, const WriteInstr&) = default;
};

/// Row-parallel gate over [row_offset, row_offset + length). Before it runs,
/// the controller writes operand bits [input_offset, input_offset + length)
/// of the current layer input into `b_col`. `layer` and `unit` link the
/// template to the model.
struct ComputeInstr {
    GateKind gate = GateKind::Xnor;
    std::uint16_t xb = 0;
    std::uint16_t layer = 0;
    std::uint32_t unit = 0;
    std::uint32_t input_offset = 0;
    std::uint32_t a_col = 0;
    std::uint32_t b_col = 0;
    std::uint32_t out_col = 0;
    std::vector<std::uint32_t> work;
    std::uint32_t row_offset = 0;
    std::uint32_t length = 0;

    friend bool operator==(const ComputeInstr&, const ComputeInstr&) = default;
};

struct ReadInstr {
    std::uint16_t xb = 0;
    std::uint32_t col = 0;
    std::uint32_t row_offset = 0;
    std::uint32_t length = 0;

    friend bool operator==(const ReadInstr&, const ReadInstr&) = default;
};

enum class Opcode : std::uint8_t { End = 0, Write = 1, Compute = 2, Read = 3 };

/// END is implicit: it terminates every serialized stream and is not stored.
using Instruction = std::variant<WriteInstr, ComputeInstr, ReadInstr>;

struct InstructionStream {
    StreamHeader header;
    std::vector<Instruction> records;

    friend bool operator==(const InstructionStream&, const InstructionStream&) = default;
};

/// Little-endian TLV encoding: magic, u16 version, u32 rows, u32 cols,
/// u8 family, u16 crossbar count, then {u8 opcode, u32 length, payload}
/// records closed by END.
std::vector<std::uint8_t> serialize(const InstructionStream& stream);

/// Throws ParseError carrying the byte offset of the first problem.
InstructionStream parse_stream(std::span<const std::uint8_t> bytes);

/// One line per record, e.g. `WRITE xb0 col3 rows0..3 1011`.
std::string disassemble(const InstructionStream& stream);

/// Inverse of `disassemble`. Throws ParseError with the line number as offset.
InstructionStream assemble(std::string_view listing);

/// Structural checks: ranges in bounds, no overlapping kernel writes, compute
/// operands populated, every COMPUTE followed by the READ of its output.
/// Throws ValidationError naming `records[i]`.
void validate_stream(const InstructionStream& stream);

struct RowRange {
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive

    std::size_t size() const noexcept { return end - begin; }
    friend bool operator==(const RowRange&, const RowRange&) = default;
};

/// Free row ranges of every column of one crossbar, sorted by row.
using FreeMap = std::vector<std::vector<RowRange>>;

FreeMap empty_free_map(std::size_t rows, std::size_t cols);

/// Marks rows [row_offset, row_offset + length) of `col` as used.
void occupy(FreeMap& free_map, std::size_t col, std::size_t row_offset, std::size_t length);

struct Placement {
    std::size_t layer_id = 0;
    std::size_t kernel_id = 0;
    std::size_t crossbar_id = 0;
    std::size_t column = 0;
    std::size_t row_offset = 0;
    std::size_t length = 0;

    friend bool operator==(const Placement&, const Placement&) = default;
};

/// First fit: lowest column, then lowest row offset, with `kernel_len` free rows.
/// Only column, row_offset and length are filled in.
std::optional<Placement> pack_partial(const FreeMap& free_map, std::size_t kernel_len);

enum class Packing : std::uint8_t {
    FirstFit,      // chunks share columns wherever they fit
    OnePerColumn,  // reference mapper: every chunk opens a fresh column
};

/// Compiles the XNOR layers of `model` layer by layer. Kernels longer than
/// `rows` are split into row chunks whose popcounts are summed on the host.
InstructionStream map_model(const BnnModel& model, std::size_t rows, std::size_t cols, Family family,
                            Packing packing = Packing::FirstFit);

/// Kernel chunk placements recovered from the COMPUTE templates.
std::vector<Placement> placements(const InstructionStream& stream);

struct MappingStats {
    std::size_t write_records = 0;
    std::size_t written_cells = 0;
    std::size_t columns_used = 0;
    std::size_t crossbars = 0;
};

MappingStats mapping_stats(const InstructionStream& stream);

}  // namespace limsim
