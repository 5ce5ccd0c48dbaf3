#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "limsim/error.hpp"
#include "limsim/metrics.hpp"
#include "oracle/naive_characterizer.hpp"
#include "published_tables.hpp"

using namespace limsim;

TEST_CASE("characterization equals the brute-force oracle") {
    for (Family f : {Family::Imply, Family::Magic}) {
        for (GateKind g : family_gates(f)) {
            for (FaultType t : kAllFaultTypes) {
                const CharacterizationCell cell = characterize_gate(f, g, t);
                const oracle::Tally o = oracle::characterize(f, g, t);
                CAPTURE(to_string(f));
                CAPTURE(to_string(g));
                CAPTURE(to_string(t));
                CHECK(cell.lambda == o.lambda);
                CHECK(cell.omega == o.omega);
            }
        }
    }
}

TEST_CASE("enumeration size") {
    for (Family f : {Family::Imply, Family::Magic}) {
        for (GateKind g : family_gates(f)) {
            const auto& prog = microprogram(f, g);
            for (FaultType t : kAllFaultTypes) {
                const std::uint64_t polarities = t == FaultType::SAF ? 2 : 1;
                const std::uint64_t expected =
                    (1ull << prog.input_count) * (1ull << prog.mem_count) * prog.mem_count * polarities;
                CHECK(characterize_gate(f, g, t).omega == expected);
            }
        }
    }
}

TEST_CASE("fault-free control run has no mismatches") {
    for (Family f : {Family::Imply, Family::Magic}) {
        for (GateKind g : family_gates(f)) CHECK(fault_free_mismatches(f, g) == 0);
    }
}

TEST_CASE("QoL reproduces the published rows from the published fractions") {
    for (const auto& table : published::kTables) {
        for (std::size_t fi = 0; fi < 4; ++fi) {
            std::vector<CharacterizationCell> cells;
            for (std::size_t g = 0; g < 7; ++g) {
                // 100 cases per cell so the fraction equals the printed percentage.
                cells.push_back({table.family, table.gates[g], kTableFaultTypes[fi],
                                 static_cast<std::uint64_t>(table.fractions[g][fi]), 100});
            }
            CHECK(std::abs(qol(cells, kTableFaultTypes[fi]) - table.qol[fi]) <= 1.0);
        }
    }
}

TEST_CASE("mean aggregation") {
    const double four[] = {33, 25, 42, 42};
    CHECK(mean_percentage(four) == doctest::Approx(35.5));
    const double one[] = {50};
    CHECK(mean_percentage(one) == 50);
    const double hundred[] = {100, 100, 100};
    CHECK(mean_percentage(hundred) == 100);
    const double zeros[] = {0, 0};
    CHECK(mean_percentage(zeros) == 0);
    CHECK_THROWS_AS(mean_percentage(std::span<const double>{}), DomainError);

    std::vector<double> v = {42, 38, 33, 42, 50, 33, 44};
    const double m = mean_percentage(v);
    CHECK(std::lround(m) == 40);
    std::reverse(v.begin(), v.end());
    CHECK(mean_percentage(v) == doctest::Approx(m));

    std::vector<CharacterizationCell> cells = {{Family::Imply, GateKind::Or, FaultType::SAF, 33, 100},
                                               {Family::Imply, GateKind::Or, FaultType::RDF, 25, 100},
                                               {Family::Imply, GateKind::Or, FaultType::DRDF, 42, 100},
                                               {Family::Imply, GateKind::Or, FaultType::IRF, 42, 100}};
    CHECK(iof(cells, GateKind::Or) == doctest::Approx(35.5));
    CHECK_THROWS_AS(iof(cells, GateKind::And), DomainError);
    CHECK_THROWS_AS(qol(cells, FaultType::SwfSet), DomainError);
}

TEST_CASE("a faulty case never lowers the fraction") {
    CharacterizationCell c{Family::Imply, GateKind::And, FaultType::SAF, 3, 10};
    for (int i = 0; i < 20; ++i) {
        const double before = c.fraction();
        ++c.lambda;
        ++c.omega;
        CHECK(c.fraction() >= before);
    }
}

TEST_CASE("slow-write applicability") {
    // IMPLY IMP only ever sets its output.
    CHECK(fault_applicable(microprogram(Family::Imply, GateKind::Imp), FaultType::SwfSet));
    CHECK_FALSE(fault_applicable(microprogram(Family::Imply, GateKind::Imp), FaultType::SwfReset));
    CHECK(fault_applicable(microprogram(Family::Imply, GateKind::Nand), FaultType::SwfReset));
    for (FaultType t : kTableFaultTypes) CHECK(fault_applicable(microprogram(Family::Magic, GateKind::Nor), t));
}

TEST_CASE("family report") {
    const auto gates = characterized_gates(Family::Imply);
    const CharacterizationReport r = characterize_family(Family::Imply, gates, kTableFaultTypes);
    CHECK(r.g_count() == 7);
    CHECK(r.f_count() == 4);
    CHECK(r.cells().size() == 28);
    for (const auto& q : r.qol) {
        REQUIRE(q.has_value());
        CHECK(*q >= 0);
        CHECK(*q <= 100);
    }
    for (std::size_t f = 0; f < 4; ++f) {
        std::vector<CharacterizationCell> col;
        for (std::size_t g = 0; g < 7; ++g) col.push_back(*r.at(g, f));
        CHECK(*r.qol[f] == doctest::Approx(qol(col, r.faults[f])));
    }

    const std::string csv = report_csv(r);
    CHECK(csv.rfind("gate,fault,lambda,omega,fraction\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 29);
    const std::string table = report_table(r);
    CHECK(table.find("QoL") != std::string::npos);
    CHECK(table.find("IoF") != std::string::npos);
    CHECK(table.find("XNOR") != std::string::npos);

    const FaultType swf[] = {FaultType::SwfReset};
    const auto imp_only = std::vector<GateKind>{GateKind::Imp, GateKind::Nand};
    const CharacterizationReport s = characterize_family(Family::Imply, imp_only, swf);
    CHECK_FALSE(s.at(0, 0).has_value());
    CHECK(s.at(1, 0).has_value());
    CHECK_FALSE(s.iof[0].has_value());
    CHECK(s.iof[1].has_value());
    CHECK(s.qol[0].has_value());
    CHECK(report_table(s).find(" -") != std::string::npos);
}
