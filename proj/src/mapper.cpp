#include "limsim/mapper.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <set>
#include <sstream>
#include <tuple>

#include "limsim/error.hpp"

namespace limsim {

std::size_t reserved_columns(Family family) { return kFirstWorkColumn + xnor_work_count(family); }

// ---------------------------------------------------------------------------
// Binary encoding

namespace {

class ByteWriter {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v) { le(v, 2); }
    void u32(std::uint32_t v) { le(v, 4); }
    void raw(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
    std::vector<std::uint8_t>& bytes() { return out_; }

private:
    void le(std::uint32_t v, int n) {
        for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    std::vector<std::uint8_t> out_;
};

class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> bytes, std::size_t base) : bytes_(bytes), base_(base) {}

    std::size_t offset() const noexcept { return base_ + pos_; }
    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

    std::uint8_t u8(const char* what) { return static_cast<std::uint8_t>(le(1, what)); }
    std::uint16_t u16(const char* what) { return static_cast<std::uint16_t>(le(2, what)); }
    std::uint32_t u32(const char* what) { return le(4, what); }
    std::span<const std::uint8_t> take(std::size_t n, const char* what) {
        need(n, what);
        auto s = bytes_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

private:
    void need(std::size_t n, const char* what) const {
        if (remaining() < n) throw ParseError(offset(), std::string("truncated ") + what);
    }
    std::uint32_t le(std::size_t n, const char* what) {
        need(n, what);
        std::uint32_t v = 0;
        for (std::size_t i = 0; i < n; ++i) v |= std::uint32_t{bytes_[pos_ + i]} << (8 * i);
        pos_ += n;
        return v;
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t base_;
    std::size_t pos_ = 0;
};

std::vector<std::uint8_t> pack_bits(const Bits& bits) {
    std::vector<std::uint8_t> out((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i]) out[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    }
    return out;
}

std::vector<std::uint8_t> encode_payload(const Instruction& ins) {
    ByteWriter w;
    if (const auto* wr = std::get_if<WriteInstr>(&ins)) {
        w.u16(wr->xb);
        w.u32(wr->col);
        w.u32(wr->row_offset);
        w.u32(static_cast<std::uint32_t>(wr->bits.size()));
        w.raw(pack_bits(wr->bits));
    } else if (const auto* c = std::get_if<ComputeInstr>(&ins)) {
        w.u8(static_cast<std::uint8_t>(c->gate));
        w.u16(c->xb);
        w.u16(c->layer);
        w.u32(c->unit);
        w.u32(c->input_offset);
        w.u32(c->a_col);
        w.u32(c->b_col);
        w.u32(c->out_col);
        w.u8(static_cast<std::uint8_t>(c->work.size()));
        for (std::uint32_t col : c->work) w.u32(col);
        w.u32(c->row_offset);
        w.u32(c->length);
    } else {
        const auto& r = std::get<ReadInstr>(ins);
        w.u16(r.xb);
        w.u32(r.col);
        w.u32(r.row_offset);
        w.u32(r.length);
    }
    return std::move(w.bytes());
}

Opcode opcode_of(const Instruction& ins) {
    if (std::holds_alternative<WriteInstr>(ins)) return Opcode::Write;
    if (std::holds_alternative<ComputeInstr>(ins)) return Opcode::Compute;
    return Opcode::Read;
}

}  // namespace

std::vector<std::uint8_t> serialize(const InstructionStream& stream) {
    ByteWriter w;
    for (char ch : kStreamMagic) w.u8(static_cast<std::uint8_t>(ch));
    w.u16(kStreamVersion);
    w.u32(stream.header.rows);
    w.u32(stream.header.cols);
    w.u8(static_cast<std::uint8_t>(stream.header.family));
    w.u16(stream.header.crossbar_count);
    for (const Instruction& ins : stream.records) {
        if (const auto* c = std::get_if<ComputeInstr>(&ins); c && c->work.size() > 255) {
            throw MappingError("COMPUTE with more than 255 work columns");
        }
        const std::vector<std::uint8_t> payload = encode_payload(ins);
        w.u8(static_cast<std::uint8_t>(opcode_of(ins)));
        w.u32(static_cast<std::uint32_t>(payload.size()));
        w.raw(payload);
    }
    w.u8(static_cast<std::uint8_t>(Opcode::End));
    w.u32(0);
    return std::move(w.bytes());
}

InstructionStream parse_stream(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes, 0);
    const auto magic = r.take(4, "magic");
    if (!std::equal(magic.begin(), magic.end(), kStreamMagic.begin(),
                    [](std::uint8_t b, char c) { return b == static_cast<std::uint8_t>(c); })) {
        throw ParseError(0, "bad magic");
    }
    const std::size_t version_at = r.offset();
    if (r.u16("version") != kStreamVersion) throw ParseError(version_at, "unsupported version");

    InstructionStream s;
    s.header.rows = r.u32("header");
    s.header.cols = r.u32("header");
    const std::size_t family_at = r.offset();
    const std::uint8_t family = r.u8("header");
    if (family > static_cast<std::uint8_t>(Family::Magic)) throw ParseError(family_at, "unknown family");
    s.header.family = static_cast<Family>(family);
    s.header.crossbar_count = r.u16("header");

    for (;;) {
        const std::size_t record_at = r.offset();
        const std::uint8_t op = r.u8("record opcode");
        const std::uint32_t len = r.u32("record length");
        const std::size_t payload_at = r.offset();
        if (len > r.remaining()) throw ParseError(payload_at, "record length exceeds stream");
        ByteReader p(r.take(len, "payload"), payload_at);

        switch (static_cast<Opcode>(op)) {
            case Opcode::End:
                if (len != 0) throw ParseError(payload_at, "END carries a payload");
                if (r.remaining() != 0) throw ParseError(r.offset(), "trailing bytes after END");
                return s;
            case Opcode::Write: {
                WriteInstr w;
                w.xb = p.u16("WRITE");
                w.col = p.u32("WRITE");
                w.row_offset = p.u32("WRITE");
                const std::size_t n_at = p.offset();
                const std::uint32_t n = p.u32("WRITE");
                if (n == 0) throw ParseError(n_at, "empty WRITE");
                const auto packed = p.take((std::size_t{n} + 7) / 8, "WRITE bits");
                w.bits.resize(n);
                for (std::size_t i = 0; i < n; ++i) w.bits[i] = (packed[i / 8] >> (i % 8)) & 1;
                if (n % 8 != 0 && (packed.back() >> (n % 8)) != 0) {
                    throw ParseError(p.offset() - 1, "nonzero padding bits");
                }
                s.records.emplace_back(std::move(w));
                break;
            }
            case Opcode::Compute: {
                ComputeInstr c;
                const std::size_t gate_at = p.offset();
                const std::uint8_t gate = p.u8("COMPUTE");
                if (gate >= kAllGates.size()) throw ParseError(gate_at, "unknown gate");
                c.gate = static_cast<GateKind>(gate);
                c.xb = p.u16("COMPUTE");
                c.layer = p.u16("COMPUTE");
                c.unit = p.u32("COMPUTE");
                c.input_offset = p.u32("COMPUTE");
                c.a_col = p.u32("COMPUTE");
                c.b_col = p.u32("COMPUTE");
                c.out_col = p.u32("COMPUTE");
                const std::uint8_t work = p.u8("COMPUTE");
                for (std::uint8_t i = 0; i < work; ++i) c.work.push_back(p.u32("COMPUTE work"));
                c.row_offset = p.u32("COMPUTE");
                const std::size_t len_at = p.offset();
                c.length = p.u32("COMPUTE");
                if (c.length == 0) throw ParseError(len_at, "empty COMPUTE");
                s.records.emplace_back(std::move(c));
                break;
            }
            case Opcode::Read: {
                ReadInstr rd;
                rd.xb = p.u16("READ");
                rd.col = p.u32("READ");
                rd.row_offset = p.u32("READ");
                const std::size_t len_at = p.offset();
                rd.length = p.u32("READ");
                if (rd.length == 0) throw ParseError(len_at, "empty READ");
                s.records.emplace_back(rd);
                break;
            }
            default: throw ParseError(record_at, "unknown opcode " + std::to_string(op));
        }
        if (p.remaining() != 0) throw ParseError(p.offset(), "payload longer than its record");
    }
}

// ---------------------------------------------------------------------------
// Text listing

namespace {

std::string rows_token(std::size_t offset, std::size_t length) {
    return "rows" + std::to_string(offset) + ".." + std::to_string(offset + length - 1);
}

class LineParser {
public:
    LineParser(std::string_view line, std::size_t line_no) : line_no_(line_no) {
        std::istringstream is{std::string(line)};
        std::string tok;
        while (is >> tok) tokens_.push_back(tok);
    }

    bool empty() const { return tokens_.empty(); }
    std::size_t size() const { return tokens_.size(); }
    [[noreturn]] void fail(const std::string& what) const { throw ParseError(line_no_, what); }

    const std::string& word(std::size_t i) const {
        if (i >= tokens_.size()) fail("missing field " + std::to_string(i));
        return tokens_[i];
    }

    void expect_count(std::size_t n) const {
        if (tokens_.size() != n) fail("expected " + std::to_string(n) + " fields, got " + std::to_string(tokens_.size()));
    }

    std::uint64_t number(std::string_view text) const {
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
            fail("bad number '" + std::string(text) + "'");
        }
        return v;
    }

    template <typename T>
    T prefixed(std::size_t i, std::string_view prefix) const {
        const std::string& tok = word(i);
        if (tok.rfind(prefix, 0) != 0) fail("expected " + std::string(prefix) + "<n>, got '" + tok + "'");
        const std::uint64_t v = number(std::string_view(tok).substr(prefix.size()));
        if (v > std::numeric_limits<T>::max()) fail("value out of range in '" + tok + "'");
        return static_cast<T>(v);
    }

    // "rowsA..B" -> (A, B - A + 1)
    std::pair<std::uint32_t, std::uint32_t> rows(std::size_t i) const {
        const std::string& tok = word(i);
        const auto dots = tok.find("..");
        if (tok.rfind("rows", 0) != 0 || dots == std::string::npos) fail("expected rowsA..B, got '" + tok + "'");
        const std::uint64_t a = number(std::string_view(tok).substr(4, dots - 4));
        const std::uint64_t b = number(std::string_view(tok).substr(dots + 2));
        if (b < a || b > std::numeric_limits<std::uint32_t>::max()) fail("bad row range '" + tok + "'");
        return {static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b - a + 1)};
    }

private:
    std::size_t line_no_;
    std::vector<std::string> tokens_;
};

}  // namespace

std::string disassemble(const InstructionStream& stream) {
    std::ostringstream os;
    const StreamHeader& h = stream.header;
    os << "XFLT v" << kStreamVersion << ' ' << to_string(h.family) << " rows" << h.rows << " cols" << h.cols << " xb"
       << h.crossbar_count << '\n';
    for (const Instruction& ins : stream.records) {
        if (const auto* w = std::get_if<WriteInstr>(&ins)) {
            os << "WRITE xb" << w->xb << " col" << w->col << ' ' << rows_token(w->row_offset, w->bits.size()) << ' ';
            for (std::uint8_t b : w->bits) os << (b ? '1' : '0');
        } else if (const auto* c = std::get_if<ComputeInstr>(&ins)) {
            os << "COMPUTE " << to_string(c->gate) << " xb" << c->xb << " layer" << c->layer << " unit" << c->unit
               << " in" << c->input_offset << " a" << c->a_col << " b" << c->b_col << " out" << c->out_col << " work";
            if (c->work.empty()) os << '-';
            for (std::size_t i = 0; i < c->work.size(); ++i) os << (i ? "," : "") << c->work[i];
            os << ' ' << rows_token(c->row_offset, c->length);
        } else {
            const auto& r = std::get<ReadInstr>(ins);
            os << "READ xb" << r.xb << " col" << r.col << ' ' << rows_token(r.row_offset, r.length);
        }
        os << '\n';
    }
    os << "END\n";
    return os.str();
}

InstructionStream assemble(std::string_view listing) {
    InstructionStream s;
    bool have_header = false;
    bool ended = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= listing.size()) {
        const std::size_t nl = std::min(listing.find('\n', pos), listing.size());
        std::string_view line = listing.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        LineParser lp(line, line_no);
        if (lp.empty()) continue;
        if (ended) lp.fail("content after END");

        const std::string& op = lp.word(0);
        if (!have_header) {
            if (op != "XFLT") lp.fail("listing must start with an XFLT header");
            lp.expect_count(6);
            if (lp.prefixed<std::uint16_t>(1, "v") != kStreamVersion) lp.fail("unsupported version");
            const auto fam = parse_family(lp.word(2));
            if (!fam) lp.fail("unknown family '" + lp.word(2) + "'");
            s.header.family = *fam;
            s.header.rows = lp.prefixed<std::uint32_t>(3, "rows");
            s.header.cols = lp.prefixed<std::uint32_t>(4, "cols");
            s.header.crossbar_count = lp.prefixed<std::uint16_t>(5, "xb");
            have_header = true;
        } else if (op == "WRITE") {
            lp.expect_count(5);
            WriteInstr w;
            w.xb = lp.prefixed<std::uint16_t>(1, "xb");
            w.col = lp.prefixed<std::uint32_t>(2, "col");
            const auto [offset, length] = lp.rows(3);
            w.row_offset = offset;
            const std::string& bits = lp.word(4);
            if (bits.size() != length) lp.fail("bit string length does not match the row range");
            for (char ch : bits) {
                if (ch != '0' && ch != '1') lp.fail("bits must be 0 or 1");
                w.bits.push_back(ch == '1' ? 1 : 0);
            }
            s.records.emplace_back(std::move(w));
        } else if (op == "COMPUTE") {
            lp.expect_count(11);
            ComputeInstr c;
            const auto gate = parse_gate(lp.word(1));
            if (!gate) lp.fail("unknown gate '" + lp.word(1) + "'");
            c.gate = *gate;
            c.xb = lp.prefixed<std::uint16_t>(2, "xb");
            c.layer = lp.prefixed<std::uint16_t>(3, "layer");
            c.unit = lp.prefixed<std::uint32_t>(4, "unit");
            c.input_offset = lp.prefixed<std::uint32_t>(5, "in");
            c.a_col = lp.prefixed<std::uint32_t>(6, "a");
            c.b_col = lp.prefixed<std::uint32_t>(7, "b");
            c.out_col = lp.prefixed<std::uint32_t>(8, "out");
            const std::string& work = lp.word(9);
            if (work.rfind("work", 0) != 0) lp.fail("expected work list");
            if (work != "work-") {
                std::string_view rest = std::string_view(work).substr(4);
                while (true) {
                    const auto comma = rest.find(',');
                    const std::uint64_t v = lp.number(rest.substr(0, comma));
                    if (v > std::numeric_limits<std::uint32_t>::max()) lp.fail("work column out of range");
                    c.work.push_back(static_cast<std::uint32_t>(v));
                    if (comma == std::string_view::npos) break;
                    rest = rest.substr(comma + 1);
                }
            }
            std::tie(c.row_offset, c.length) = lp.rows(10);
            s.records.emplace_back(std::move(c));
        } else if (op == "READ") {
            lp.expect_count(4);
            ReadInstr r;
            r.xb = lp.prefixed<std::uint16_t>(1, "xb");
            r.col = lp.prefixed<std::uint32_t>(2, "col");
            std::tie(r.row_offset, r.length) = lp.rows(3);
            s.records.emplace_back(r);
        } else if (op == "END") {
            lp.expect_count(1);
            ended = true;
        } else {
            lp.fail("unknown mnemonic '" + op + "'");
        }
    }
    if (!have_header) throw ParseError(line_no, "empty listing");
    if (!ended) throw ParseError(line_no, "missing END");
    return s;
}

// ---------------------------------------------------------------------------
// Validation

void validate_stream(const InstructionStream& stream) {
    const StreamHeader& h = stream.header;
    if (h.rows == 0 || h.cols == 0) throw ValidationError("header", "crossbar dimensions must be positive");
    if (h.crossbar_count == 0) throw ValidationError("header", "at least one crossbar is required");
    const std::size_t reserved = reserved_columns(h.family);

    // written[xb][col * rows + row]
    std::vector<std::vector<std::uint8_t>> written(h.crossbar_count,
                                                   std::vector<std::uint8_t>(std::size_t{h.rows} * h.cols, 0));
    auto path = [](std::size_t i) { return "records[" + std::to_string(i) + "]"; };
    auto check_range = [&](std::size_t i, std::uint16_t xb, std::uint32_t col, std::uint32_t off, std::size_t len) {
        if (xb >= h.crossbar_count) throw ValidationError(path(i), "crossbar " + std::to_string(xb) + " out of range");
        if (col >= h.cols) throw ValidationError(path(i), "column " + std::to_string(col) + " out of range");
        if (len == 0 || std::size_t{off} + len > h.rows) throw ValidationError(path(i), "row range out of bounds");
    };

    for (std::size_t i = 0; i < stream.records.size(); ++i) {
        const Instruction& ins = stream.records[i];
        if (const auto* w = std::get_if<WriteInstr>(&ins)) {
            check_range(i, w->xb, w->col, w->row_offset, w->bits.size());
            if (w->col < reserved) throw ValidationError(path(i), "kernel write into a reserved column");
            for (std::size_t r = w->row_offset; r < w->row_offset + w->bits.size(); ++r) {
                auto& cell = written[w->xb][std::size_t{w->col} * h.rows + r];
                if (cell) throw ValidationError(path(i), "overlaps an earlier kernel placement at row " + std::to_string(r));
                cell = 1;
            }
        } else if (const auto* c = std::get_if<ComputeInstr>(&ins)) {
            check_range(i, c->xb, c->a_col, c->row_offset, c->length);
            if (!is_supported(h.family, c->gate)) throw ValidationError(path(i), "gate not offered by the family");
            const GateMicroprogram& prog = microprogram(h.family, c->gate);
            if (c->work.size() != prog.mem_count - 3) {
                throw ValidationError(path(i), "expected " + std::to_string(prog.mem_count - 3) + " work columns");
            }
            std::vector<std::uint32_t> cols = {c->a_col, c->b_col, c->out_col};
            cols.insert(cols.end(), c->work.begin(), c->work.end());
            for (std::size_t k = 0; k < cols.size(); ++k) {
                if (cols[k] >= h.cols) throw ValidationError(path(i), "column " + std::to_string(cols[k]) + " out of range");
                if (std::find(cols.begin(), cols.begin() + static_cast<std::ptrdiff_t>(k), cols[k]) !=
                    cols.begin() + static_cast<std::ptrdiff_t>(k)) {
                    throw ValidationError(path(i), "operand columns must be distinct");
                }
            }
            if (c->b_col != kInputColumn) throw ValidationError(path(i), "operand b must be the input column");
            for (std::size_t r = c->row_offset; r < c->row_offset + c->length; ++r) {
                if (!written[c->xb][std::size_t{c->a_col} * h.rows + r]) {
                    throw ValidationError(path(i), "operand a reads row " + std::to_string(r) + " of column " +
                                                       std::to_string(c->a_col) + " before it is written");
                }
            }
            const auto* next = i + 1 < stream.records.size() ? std::get_if<ReadInstr>(&stream.records[i + 1]) : nullptr;
            if (!next || next->xb != c->xb || next->col != c->out_col || next->row_offset != c->row_offset ||
                next->length != c->length) {
                throw ValidationError(path(i), "COMPUTE must be followed by the READ of its output rows");
            }
        } else {
            const auto& r = std::get<ReadInstr>(ins);
            check_range(i, r.xb, r.col, r.row_offset, r.length);
            if (i == 0 || !std::holds_alternative<ComputeInstr>(stream.records[i - 1])) {
                throw ValidationError(path(i), "READ without a preceding COMPUTE");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Placement

FreeMap empty_free_map(std::size_t rows, std::size_t cols) {
    return FreeMap(cols, std::vector<RowRange>{{0, rows}});
}

void occupy(FreeMap& free_map, std::size_t col, std::size_t row_offset, std::size_t length) {
    if (col >= free_map.size()) throw AddressError("column " + std::to_string(col) + " out of range");
    const std::size_t end = row_offset + length;
    auto& ranges = free_map[col];
    for (auto it = ranges.begin(); it != ranges.end(); ++it) {
        if (it->begin <= row_offset && end <= it->end) {
            const RowRange before{it->begin, row_offset};
            const RowRange after{end, it->end};
            it = ranges.erase(it);
            if (after.size() > 0) it = ranges.insert(it, after);
            if (before.size() > 0) ranges.insert(it, before);
            return;
        }
    }
    throw StateError("rows " + std::to_string(row_offset) + ".." + std::to_string(end) + " of column " +
                     std::to_string(col) + " are not free");
}

std::optional<Placement> pack_partial(const FreeMap& free_map, std::size_t kernel_len) {
    if (kernel_len == 0) throw DomainError("kernel length must be positive");
    for (std::size_t col = 0; col < free_map.size(); ++col) {
        for (const RowRange& r : free_map[col]) {
            if (r.size() >= kernel_len) {
                Placement p;
                p.column = col;
                p.row_offset = r.begin;
                p.length = kernel_len;
                return p;
            }
        }
    }
    return std::nullopt;
}

namespace {

std::optional<Placement> first_empty_column(const FreeMap& free_map, std::size_t rows, std::size_t len) {
    for (std::size_t col = 0; col < free_map.size(); ++col) {
        const auto& r = free_map[col];
        if (r.size() == 1 && r.front() == RowRange{0, rows} && len <= rows) {
            Placement p;
            p.column = col;
            p.row_offset = 0;
            p.length = len;
            return p;
        }
    }
    return std::nullopt;
}

}  // namespace

InstructionStream map_model(const BnnModel& model, std::size_t rows, std::size_t cols, Family family,
                            Packing packing) {
    const std::size_t reserved = reserved_columns(family);
    if (rows == 0 || rows > std::numeric_limits<std::uint32_t>::max() || cols > std::numeric_limits<std::uint32_t>::max()) {
        throw CapacityError("unsupported crossbar row count");
    }
    if (cols <= reserved) {
        throw CapacityError("a crossbar needs more than " + std::to_string(reserved) +
                            " columns to hold kernels next to the input, output and work columns");
    }

    InstructionStream s;
    s.header = {static_cast<std::uint32_t>(rows), static_cast<std::uint32_t>(cols), family, 1};
    if (model.layers.empty()) return s;
    validate_model(model);

    std::vector<FreeMap> maps;
    auto add_crossbar = [&] {
        if (maps.size() == std::numeric_limits<std::uint16_t>::max()) {
            throw CapacityError("model needs more than 65535 crossbars");
        }
        FreeMap m = empty_free_map(rows, cols);
        for (std::size_t c = 0; c < reserved; ++c) occupy(m, c, 0, rows);
        maps.push_back(std::move(m));
    };
    add_crossbar();

    std::vector<Instruction> templates;
    std::vector<std::uint32_t> work;
    for (std::size_t w = 0; w < reserved - kFirstWorkColumn; ++w) {
        work.push_back(static_cast<std::uint32_t>(kFirstWorkColumn + w));
    }

    for (std::size_t li = 0; li < model.layers.size(); ++li) {
        const Layer& layer = model.layers[li];
        if (!is_xnor_layer(layer)) continue;
        if (li > std::numeric_limits<std::uint16_t>::max()) throw MappingError("too many layers");
        const auto& kernel = layer_kernel(layer);
        const std::size_t n = fan_in(layer);
        for (std::size_t unit = 0; unit < kernel.size(); ++unit) {
            for (std::size_t off = 0; off < n; off += rows) {
                const std::size_t len = std::min(rows, n - off);
                std::optional<Placement> p;
                std::size_t xb = 0;
                for (; xb < maps.size() && !p; ++xb) {
                    p = packing == Packing::FirstFit ? pack_partial(maps[xb], len)
                                                     : first_empty_column(maps[xb], rows, len);
                }
                if (!p) {
                    add_crossbar();
                    xb = maps.size();
                    p = packing == Packing::FirstFit ? pack_partial(maps.back(), len)
                                                     : first_empty_column(maps.back(), rows, len);
                }
                --xb;
                occupy(maps[xb], p->column, p->row_offset, len);

                WriteInstr w;
                w.xb = static_cast<std::uint16_t>(xb);
                w.col = static_cast<std::uint32_t>(p->column);
                w.row_offset = static_cast<std::uint32_t>(p->row_offset);
                w.bits.assign(kernel[unit].begin() + static_cast<std::ptrdiff_t>(off),
                              kernel[unit].begin() + static_cast<std::ptrdiff_t>(off + len));
                s.records.emplace_back(std::move(w));

                ComputeInstr c;
                c.gate = GateKind::Xnor;
                c.xb = static_cast<std::uint16_t>(xb);
                c.layer = static_cast<std::uint16_t>(li);
                c.unit = static_cast<std::uint32_t>(unit);
                c.input_offset = static_cast<std::uint32_t>(off);
                c.a_col = static_cast<std::uint32_t>(p->column);
                c.b_col = static_cast<std::uint32_t>(kInputColumn);
                c.out_col = static_cast<std::uint32_t>(kOutputColumn);
                c.work = work;
                c.row_offset = static_cast<std::uint32_t>(p->row_offset);
                c.length = static_cast<std::uint32_t>(len);
                templates.emplace_back(c);
                templates.emplace_back(ReadInstr{c.xb, c.out_col, c.row_offset, c.length});
            }
        }
    }
    s.header.crossbar_count = static_cast<std::uint16_t>(maps.size());
    s.records.insert(s.records.end(), std::make_move_iterator(templates.begin()),
                     std::make_move_iterator(templates.end()));
    return s;
}

std::vector<Placement> placements(const InstructionStream& stream) {
    std::vector<Placement> out;
    for (const Instruction& ins : stream.records) {
        if (const auto* c = std::get_if<ComputeInstr>(&ins)) {
            out.push_back({c->layer, c->unit, c->xb, c->a_col, c->row_offset, c->length});
        }
    }
    return out;
}

MappingStats mapping_stats(const InstructionStream& stream) {
    MappingStats st;
    std::set<std::pair<std::size_t, std::size_t>> columns;
    for (const Instruction& ins : stream.records) {
        if (const auto* w = std::get_if<WriteInstr>(&ins)) {
            ++st.write_records;
            st.written_cells += w->bits.size();
            columns.emplace(w->xb, w->col);
        }
    }
    st.columns_used = columns.size();
    st.crossbars = stream.header.crossbar_count;
    return st;
}

}  // namespace limsim
