#include "limsim/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "limsim/error.hpp"

namespace limsim {

std::vector<FaultTag> fault_polarities(FaultType fault) {
    switch (fault) {
        case FaultType::SAF: return {FaultTag::SA0, FaultTag::SA1};
        case FaultType::RDF: return {FaultTag::RDF};
        case FaultType::DRDF: return {FaultTag::DRDF};
        case FaultType::IRF: return {FaultTag::IRF};
        case FaultType::SwfSet: return {FaultTag::SwfSet};
        case FaultType::SwfReset: return {FaultTag::SwfReset};
    }
    return {};
}

bool fault_applicable(const GateMicroprogram& prog, FaultType fault) {
    if (fault != FaultType::SwfSet && fault != FaultType::SwfReset) return true;
    const bool want_set = fault == FaultType::SwfSet;
    bool sets = prog.preset && prog.preset->value;
    bool resets = prog.preset && !prog.preset->value;
    for (const Cycle& cycle : prog.cycles) {
        for (const Step& step : cycle) {
            if (const auto* s = std::get_if<InitStep>(&step)) {
                (s->value ? sets : resets) = true;
            } else if (std::holds_alternative<ImplyStep>(step)) {
                sets = true;
            } else {
                const auto& m = std::get<MagicStep>(step);
                (m.op == MagicOp::Nor ? resets : sets) = true;
            }
        }
    }
    return want_set ? sets : resets;
}

namespace {

struct Tally {
    std::uint64_t lambda = 0;
    std::uint64_t omega = 0;
};

// `tags` empty means a fault-free control run.
Tally enumerate(const GateMicroprogram& prog, const std::vector<FaultTag>& tags) {
    const std::size_t n = prog.mem_count;
    std::vector<Coord> binding(n);
    for (std::size_t i = 0; i < n; ++i) binding[i] = {0, i};

    const std::size_t input_combos = std::size_t{1} << prog.input_count;
    const std::size_t init_patterns = std::size_t{1} << n;
    const std::size_t placements = tags.empty() ? 1 : n;
    const std::size_t polarities = tags.empty() ? 1 : tags.size();

    Tally t;
    bool in[2] = {false, false};
    for (std::size_t combo = 0; combo < input_combos; ++combo) {
        in[0] = (combo & 1) != 0;
        in[1] = (combo & 2) != 0;
        const bool expected = gate_truth(prog.gate, in[0], in[1]);
        for (std::size_t pattern = 0; pattern < init_patterns; ++pattern) {
            for (std::size_t pos = 0; pos < placements; ++pos) {
                for (std::size_t k = 0; k < polarities; ++k) {
                    Crossbar xbar(1, n);
                    for (std::size_t c = 0; c < n; ++c) xbar.preset(0, c, ((pattern >> c) & 1) != 0);
                    if (!tags.empty()) xbar.set_tag(0, pos, tags[k]);
                    const bool got =
                        execute_gate(xbar, prog, binding, std::span<const bool>(in, prog.input_count));
                    ++t.omega;
                    if (got != expected) ++t.lambda;
                }
            }
        }
    }
    return t;
}

}  // namespace

CharacterizationCell characterize_gate(Family family, GateKind gate, FaultType fault) {
    const GateMicroprogram& prog = microprogram(family, gate);
    const Tally t = enumerate(prog, fault_polarities(fault));
    return {family, gate, fault, t.lambda, t.omega};
}

std::uint64_t fault_free_mismatches(Family family, GateKind gate) {
    return enumerate(microprogram(family, gate), {}).lambda;
}

double mean_percentage(std::span<const double> fractions) {
    if (fractions.empty()) throw DomainError("mean over an empty set");
    return std::accumulate(fractions.begin(), fractions.end(), 0.0) / static_cast<double>(fractions.size());
}

double qol(std::span<const CharacterizationCell> cells, FaultType fault) {
    std::vector<double> f;
    for (const auto& c : cells) {
        if (c.fault == fault) f.push_back(c.fraction());
    }
    if (f.empty()) throw DomainError("no gate characterized for " + std::string(to_string(fault)));
    return mean_percentage(f);
}

double iof(std::span<const CharacterizationCell> cells, GateKind gate) {
    std::vector<double> f;
    for (const auto& c : cells) {
        if (c.gate == gate) f.push_back(c.fraction());
    }
    if (f.empty()) throw DomainError("no fault characterized for " + std::string(to_string(gate)));
    return mean_percentage(f);
}

std::vector<CharacterizationCell> CharacterizationReport::cells() const {
    std::vector<CharacterizationCell> out;
    for (const auto& c : matrix) {
        if (c) out.push_back(*c);
    }
    return out;
}

CharacterizationReport characterize_family(Family family, std::span<const GateKind> gates,
                                           std::span<const FaultType> faults) {
    CharacterizationReport r{family, {gates.begin(), gates.end()}, {faults.begin(), faults.end()}, {}, {}, {}};
    for (GateKind g : gates) {
        const GateMicroprogram& prog = microprogram(family, g);
        for (FaultType f : faults) {
            if (fault_applicable(prog, f)) {
                r.matrix.emplace_back(characterize_gate(family, g, f));
            } else {
                r.matrix.emplace_back(std::nullopt);
            }
        }
    }
    const std::vector<CharacterizationCell> cells = r.cells();
    for (std::size_t f = 0; f < r.f_count(); ++f) {
        bool any = false;
        for (std::size_t g = 0; g < r.g_count(); ++g) any |= r.at(g, f).has_value();
        r.qol.push_back(any ? std::optional(qol(cells, r.faults[f])) : std::nullopt);
    }
    for (std::size_t g = 0; g < r.g_count(); ++g) {
        bool any = false;
        for (std::size_t f = 0; f < r.f_count(); ++f) any |= r.at(g, f).has_value();
        r.iof.push_back(any ? std::optional(iof(cells, r.gates[g])) : std::nullopt);
    }
    return r;
}

std::string report_csv(const CharacterizationReport& report) {
    std::ostringstream os;
    os << "gate,fault,lambda,omega,fraction\n";
    char buf[32];
    for (const auto& c : report.cells()) {
        std::snprintf(buf, sizeof buf, "%.4f", c.fraction());
        os << to_string(c.gate) << ',' << to_string(c.fault) << ',' << c.lambda << ',' << c.omega << ',' << buf
           << '\n';
    }
    return os.str();
}

std::string report_table(const CharacterizationReport& report) {
    std::ostringstream os;
    char buf[64];
    os << to_string(report.family) << '\n';
    std::snprintf(buf, sizeof buf, "%-6s", "");
    os << buf;
    for (FaultType f : report.faults) {
        std::snprintf(buf, sizeof buf, " %9s", std::string(to_string(f)).c_str());
        os << buf;
    }
    os << " |       IoF\n";
    for (std::size_t g = 0; g < report.g_count(); ++g) {
        std::snprintf(buf, sizeof buf, "%-6s", std::string(to_string(report.gates[g])).c_str());
        os << buf;
        for (std::size_t f = 0; f < report.f_count(); ++f) {
            if (const auto& c = report.at(g, f)) {
                std::snprintf(buf, sizeof buf, " %8.0f%%", c->fraction());
            } else {
                std::snprintf(buf, sizeof buf, " %9s", "-");
            }
            os << buf;
        }
        if (report.iof[g]) {
            std::snprintf(buf, sizeof buf, " | %8.0f%%\n", *report.iof[g]);
        } else {
            std::snprintf(buf, sizeof buf, " | %9s\n", "-");
        }
        os << buf;
    }
    std::snprintf(buf, sizeof buf, "%-6s", "QoL");
    os << buf;
    for (const auto& q : report.qol) {
        if (q) {
            std::snprintf(buf, sizeof buf, " %8.0f%%", *q);
        } else {
            std::snprintf(buf, sizeof buf, " %9s", "-");
        }
        os << buf;
    }
    os << '\n';
    return os.str();
}

}  // namespace limsim
