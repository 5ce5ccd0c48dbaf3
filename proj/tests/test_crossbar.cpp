#include <doctest.h>

#include "limsim/crossbar.hpp"
#include "limsim/error.hpp"

using namespace limsim;

TEST_CASE("new crossbar is pristine") {
    Crossbar x(2, 2);
    CHECK(x.rows() == 2);
    CHECK(x.cols() == 2);
    CHECK(x.fault_count() == 0);
    CHECK(x.snapshot() == BitGrid(2, 2));

    Crossbar one(1, 1, kLrs);
    CHECK(one.read_cell(0, 0));

    Crossbar big(64, 64);
    for (std::size_t i = 0; i < 64; ++i) {
        CHECK(big.row_pulses(i) == PulseCounters{});
        CHECK(big.col_pulses(i) == PulseCounters{});
    }
    CHECK_THROWS_AS(Crossbar(0, 3), ConstructionError);
    CHECK_THROWS_AS(Crossbar(3, 0), ConstructionError);
}

TEST_CASE("write and read apply fault semantics") {
    Crossbar x(1, 1);
    x.write_cell(0, 0, true);
    CHECK(x.read_cell(0, 0));

    Crossbar swf(1, 1);
    swf.set_tag(0, 0, FaultTag::SwfSet);
    swf.write_cell(0, 0, true);
    CHECK_FALSE(swf.read_cell(0, 0));

    Crossbar sa0(1, 1);
    sa0.set_tag(0, 0, FaultTag::SA0);
    sa0.write_cell(0, 0, true);
    CHECK_FALSE(sa0.read_cell(0, 0));

    Crossbar rdf(1, 1, kLrs);
    rdf.set_tag(0, 0, FaultTag::RDF);
    CHECK(rdf.read_cell(0, 0));
    CHECK_FALSE(rdf.snapshot().at(0, 0));

    Crossbar irf(1, 1);
    irf.set_tag(0, 0, FaultTag::IRF);
    CHECK(irf.read_cell(0, 0));
    CHECK_FALSE(irf.snapshot().at(0, 0));
}

TEST_CASE("out-of-bounds access throws") {
    Crossbar x(2, 3);
    CHECK_THROWS_AS(x.write_cell(2, 0, true), AddressError);
    CHECK_THROWS_AS(x.read_cell(0, 3), AddressError);
    CHECK_THROWS_AS(x.set_tag(5, 5, FaultTag::SA0), AddressError);
    CHECK_THROWS_AS(x.preset(2, 0, true), AddressError);
}

TEST_CASE("snapshot shows pinned levels and is side-effect free") {
    Crossbar x(2, 2);
    x.write_cell(0, 1, kLrs);
    BitGrid expected(2, 2);
    expected.set(0, 1, true);
    CHECK(x.snapshot() == expected);

    x.set_tag(1, 0, FaultTag::SA1);
    x.set_tag(0, 1, FaultTag::RDF);
    const auto before_rows = x.total_row_pulses();
    const BitGrid s1 = x.snapshot();
    const BitGrid s2 = x.snapshot();
    CHECK(s1 == s2);
    CHECK(s1.at(1, 0));
    CHECK(s1.at(0, 1));
    CHECK(x.total_row_pulses() == before_rows);
}

TEST_CASE("fault-free round trip for every prior state and target") {
    for (bool prior : {false, true}) {
        for (bool target : {false, true}) {
            Crossbar x(1, 1, prior);
            x.write_cell(0, 0, target);
            CHECK(x.read_cell(0, 0) == target);
        }
    }
}

TEST_CASE("read-fault sequences") {
    for (bool v : {false, true}) {
        Crossbar rdf(1, 1, v);
        rdf.set_tag(0, 0, FaultTag::RDF);
        CHECK(rdf.read_cell(0, 0) == v);
        CHECK(rdf.read_cell(0, 0) == !v);

        Crossbar drdf(1, 1, v);
        drdf.set_tag(0, 0, FaultTag::DRDF);
        CHECK(drdf.read_cell(0, 0) == !v);
        CHECK(drdf.snapshot().at(0, 0) == !v);

        Crossbar irf(1, 1, v);
        irf.set_tag(0, 0, FaultTag::IRF);
        for (int i = 0; i < 5; ++i) CHECK(irf.read_cell(0, 0) == !v);
        CHECK(irf.snapshot().at(0, 0) == v);
    }
}

TEST_CASE("stuck-at cells absorb any access sequence") {
    for (FaultTag t : {FaultTag::SA0, FaultTag::SA1}) {
        const bool pinned = t == FaultTag::SA1;
        Crossbar x(1, 1, !pinned);
        x.set_tag(0, 0, t);
        const bool pattern[] = {true, false, false, true, true, false};
        for (bool v : pattern) {
            x.write_cell(0, 0, v);
            CHECK(x.read_cell(0, 0) == pinned);
            CHECK(x.read_cell(0, 0) == pinned);
        }
    }
}

TEST_CASE("pulse conservation") {
    Crossbar x(3, 4);
    x.write_cell(0, 0, true);
    x.write_cell(2, 3, true);
    x.read_cell(1, 1);
    x.read_cell(2, 3);
    x.read_cell(2, 3);
    x.log_compute(1, 2);
    const PulseCounters r = x.total_row_pulses();
    const PulseCounters c = x.total_col_pulses();
    CHECK(r == c);
    CHECK(r.reads == 3);
    CHECK(r.writes == 2);
    CHECK(r.computes == 1);
    CHECK(x.row_pulses(2).reads == 2);
    CHECK(x.col_pulses(3).writes == 1);
}

TEST_CASE("trace records events only when enabled") {
    Crossbar x(2, 2);
    x.read_cell(0, 0);
    CHECK(x.trace().empty());
    x.set_trace(true);
    x.write_cell(1, 1, true);
    REQUIRE(x.trace().size() == 1);
    CHECK(x.trace()[0].kind == PulseKind::Write);
    CHECK(x.trace()[0].cell == Coord{1, 1});
}

TEST_CASE("fault count follows tags") {
    Crossbar x(2, 2);
    x.set_tag(0, 0, FaultTag::IRF);
    x.set_tag(0, 1, FaultTag::SA0);
    CHECK(x.fault_count() == 2);
    x.set_tag(0, 0, FaultTag::RDF);
    CHECK(x.fault_count() == 2);
    x.set_tag(0, 0, FaultTag::None);
    CHECK(x.fault_count() == 1);
}
