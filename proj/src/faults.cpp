#include "limsim/faults.hpp"

#include <cctype>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "limsim/error.hpp"

namespace limsim {

std::string_view to_string(FaultType fault) {
    switch (fault) {
        case FaultType::SAF: return "SAF";
        case FaultType::RDF: return "RDF";
        case FaultType::DRDF: return "DRDF";
        case FaultType::IRF: return "IRF";
        case FaultType::SwfSet: return "SWF_SET";
        case FaultType::SwfReset: return "SWF_RESET";
    }
    return "?";
}

std::optional<FaultType> parse_fault_type(std::string_view name) {
    std::string lower(name);
    for (char& ch : lower) {
        ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        if (ch == '-') ch = '_';
    }
    if (lower == "saf") return FaultType::SAF;
    if (lower == "rdf") return FaultType::RDF;
    if (lower == "drdf") return FaultType::DRDF;
    if (lower == "irf") return FaultType::IRF;
    if (lower == "swf_set" || lower == "swfset") return FaultType::SwfSet;
    if (lower == "swf_reset" || lower == "swfreset") return FaultType::SwfReset;
    return std::nullopt;
}

ReadOutcome apply_on_read(FaultTag tag, bool stored) {
    switch (tag) {
        case FaultTag::SA0: return {false, stored};
        case FaultTag::SA1: return {true, stored};
        case FaultTag::RDF: return {stored, !stored};
        case FaultTag::DRDF: return {!stored, !stored};
        case FaultTag::IRF: return {!stored, stored};
        case FaultTag::None:
        case FaultTag::SwfSet:
        case FaultTag::SwfReset: break;
    }
    return {stored, stored};
}

bool apply_on_write(FaultTag tag, bool stored, bool target) {
    switch (tag) {
        case FaultTag::SA0:
        case FaultTag::SA1: return stored;
        case FaultTag::SwfSet: return (!stored && target) ? stored : target;
        case FaultTag::SwfReset: return (stored && !target) ? stored : target;
        case FaultTag::None:
        case FaultTag::RDF:
        case FaultTag::DRDF:
        case FaultTag::IRF: break;
    }
    return target;
}

std::size_t injection_count(double rate, std::size_t cells) {
    if (!(rate >= 0.0 && rate <= 1.0)) {
        throw DomainError("injection rate must lie in [0, 1], got " + std::to_string(rate));
    }
    return static_cast<std::size_t>(std::llround(rate * static_cast<double>(cells)));
}

std::size_t inject(Crossbar& xbar, const InjectionConfig& cfg) {
    if (xbar.fault_count() != 0) {
        throw StateError("crossbar already carries " + std::to_string(xbar.fault_count()) + " faults");
    }
    const std::size_t cells = xbar.rows() * xbar.cols();
    const std::size_t count = injection_count(cfg.rate, cells);

    std::mt19937_64 gen(cfg.seed);
    std::vector<std::size_t> order(cells);
    std::iota(order.begin(), order.end(), std::size_t{0});

    // Partial Fisher-Yates: the first `count` slots become a uniform sample.
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, cells - 1);
        std::swap(order[i], order[pick(gen)]);
        const std::size_t cell = order[i];

        FaultTag tag = FaultTag::None;
        switch (cfg.fault) {
            case FaultType::SAF: tag = (gen() >> 63) != 0 ? FaultTag::SA1 : FaultTag::SA0; break;
            case FaultType::RDF: tag = FaultTag::RDF; break;
            case FaultType::DRDF: tag = FaultTag::DRDF; break;
            case FaultType::IRF: tag = FaultTag::IRF; break;
            case FaultType::SwfSet: tag = FaultTag::SwfSet; break;
            case FaultType::SwfReset: tag = FaultTag::SwfReset; break;
        }
        xbar.set_tag(cell / xbar.cols(), cell % xbar.cols(), tag);
    }
    return count;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) { return mix64(mix64(master) ^ index); }

}  // namespace limsim
