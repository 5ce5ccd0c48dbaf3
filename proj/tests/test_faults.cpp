#include <doctest.h>

#include <cmath>
#include <set>

#include "limsim/error.hpp"
#include "limsim/faults.hpp"

using namespace limsim;

namespace {

// Reference tables written out case by case.
ReadOutcome expected_read(FaultTag t, bool s) {
    switch (t) {
        case FaultTag::SA0: return {false, s};
        case FaultTag::SA1: return {true, s};
        case FaultTag::RDF: return {s, !s};
        case FaultTag::DRDF: return {!s, !s};
        case FaultTag::IRF: return {!s, s};
        default: return {s, s};
    }
}

bool expected_write(FaultTag t, bool s, bool target) {
    switch (t) {
        case FaultTag::SA0:
        case FaultTag::SA1: return s;
        case FaultTag::SwfSet: return (!s && target) ? s : target;
        case FaultTag::SwfReset: return (s && !target) ? s : target;
        default: return target;
    }
}

constexpr FaultTag kTags[] = {FaultTag::None, FaultTag::SA0,    FaultTag::SA1,     FaultTag::RDF,
                              FaultTag::DRDF, FaultTag::IRF,    FaultTag::SwfSet,  FaultTag::SwfReset};

std::set<std::pair<std::size_t, std::size_t>> tagged(const Crossbar& x) {
    std::set<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < x.cols(); ++c) {
            if (x.tag(r, c) != FaultTag::None) out.emplace(r, c);
        }
    }
    return out;
}

}  // namespace

TEST_CASE("apply_on_read matches the table exhaustively") {
    for (FaultTag t : kTags) {
        for (bool s : {false, true}) CHECK(apply_on_read(t, s) == expected_read(t, s));
    }
    CHECK(apply_on_read(FaultTag::DRDF, true) == ReadOutcome{false, false});
    CHECK(apply_on_read(FaultTag::None, false) == ReadOutcome{false, false});
    CHECK(apply_on_read(FaultTag::SA1, false).returned);
}

TEST_CASE("apply_on_write matches the table exhaustively") {
    for (FaultTag t : kTags) {
        for (bool s : {false, true}) {
            for (bool target : {false, true}) CHECK(apply_on_write(t, s, target) == expected_write(t, s, target));
        }
    }
    CHECK(apply_on_write(FaultTag::SwfReset, true, false));
    CHECK_FALSE(apply_on_write(FaultTag::SwfSet, true, false));
    CHECK(apply_on_write(FaultTag::None, false, true));
}

TEST_CASE("injection count is round(rate * N)") {
    CHECK(injection_count(0.0, 100) == 0);
    CHECK(injection_count(1.0, 16) == 16);
    CHECK(injection_count(0.1, 100) == 10);
    CHECK(injection_count(0.005, 100) == 1);  // half rounds away from zero
    CHECK_THROWS_AS(injection_count(-0.1, 10), DomainError);
    CHECK_THROWS_AS(injection_count(1.5, 10), DomainError);

    for (int k = 0; k <= 50; ++k) {
        const double rate = k / 100.0;
        Crossbar x(20, 30);
        const std::size_t n = inject(x, {FaultType::IRF, rate, 7});
        CHECK(n == static_cast<std::size_t>(std::llround(rate * 600)));
        CHECK(x.fault_count() == n);
        CHECK(tagged(x).size() == n);
    }
}

TEST_CASE("inject edge cases") {
    Crossbar zero(4, 4);
    CHECK(inject(zero, {FaultType::SAF, 0.0, 1}) == 0);
    CHECK(zero.fault_count() == 0);

    Crossbar full(4, 4);
    CHECK(inject(full, {FaultType::RDF, 1.0, 1}) == 16);
    CHECK(tagged(full).size() == 16);

    CHECK_THROWS_AS(inject(full, {FaultType::RDF, 0.5, 2}), StateError);
}

TEST_CASE("injection is seed-deterministic") {
    Crossbar a(10, 10), b(10, 10);
    inject(a, {FaultType::SAF, 0.1, 42});
    inject(b, {FaultType::SAF, 0.1, 42});
    CHECK(tagged(a).size() == 10);
    for (std::size_t r = 0; r < 10; ++r) {
        for (std::size_t c = 0; c < 10; ++c) CHECK(a.tag(r, c) == b.tag(r, c));
    }

    Crossbar big1(64, 64), big2(64, 64);
    inject(big1, {FaultType::IRF, 0.05, 1});
    inject(big2, {FaultType::IRF, 0.05, 2});
    CHECK(tagged(big1) != tagged(big2));
}

TEST_CASE("SAF injection splits polarities") {
    Crossbar x(64, 64);
    inject(x, {FaultType::SAF, 0.5, 3});
    std::size_t sa0 = 0, sa1 = 0;
    for (std::size_t r = 0; r < 64; ++r) {
        for (std::size_t c = 0; c < 64; ++c) {
            sa0 += x.tag(r, c) == FaultTag::SA0;
            sa1 += x.tag(r, c) == FaultTag::SA1;
        }
    }
    CHECK(sa0 + sa1 == 2048);
    CHECK(sa0 > 900);
    CHECK(sa1 > 900);
}

TEST_CASE("non-SAF injection uses the matching tag") {
    const std::pair<FaultType, FaultTag> cases[] = {{FaultType::RDF, FaultTag::RDF},
                                                     {FaultType::DRDF, FaultTag::DRDF},
                                                     {FaultType::IRF, FaultTag::IRF},
                                                     {FaultType::SwfSet, FaultTag::SwfSet},
                                                     {FaultType::SwfReset, FaultTag::SwfReset}};
    for (auto [type, tag] : cases) {
        Crossbar x(5, 5);
        inject(x, {type, 0.4, 9});
        for (auto [r, c] : tagged(x)) CHECK(x.tag(r, c) == tag);
    }
}

TEST_CASE("fault type names round-trip") {
    for (FaultType f : kAllFaultTypes) CHECK(parse_fault_type(to_string(f)) == f);
    CHECK(parse_fault_type("saf") == FaultType::SAF);
    CHECK(parse_fault_type("swf_set") == FaultType::SwfSet);
    CHECK_FALSE(parse_fault_type("coupling").has_value());
}

TEST_CASE("derived seeds differ per index and are stable") {
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    CHECK(derive_seed(5, 3) == derive_seed(5, 3));
}
