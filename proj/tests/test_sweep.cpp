#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "limsim/error.hpp"
#include "limsim/sweep.hpp"

using namespace limsim;

namespace {

struct Fixture {
    BnnModel model;
    Dataset data;
};

const Fixture& fixture() {
    static const Fixture f = [] {
        const auto dir = std::filesystem::path(LIMSIM_DATA_DIR);
        return Fixture{load_model_file(dir / "fixture-model.json"),
                       load_idx(dir / "fixture-images.idx", dir / "fixture-labels.idx")};
    }();
    return f;
}

SweepConfig small_config() {
    SweepConfig cfg;
    cfg.faults = {FaultType::SAF, FaultType::IRF};
    cfg.rates = {0.0, 0.05};
    cfg.trials = 3;
    cfg.samples = 30;
    cfg.seed = 11;
    return cfg;
}

}  // namespace

TEST_CASE("zero rate reproduces host accuracy") {
    SweepConfig cfg = small_config();
    cfg.rates = {0.0};
    cfg.faults = {kAllFaultTypes.begin(), kAllFaultTypes.end()};
    cfg.trials = 2;
    const double host = host_accuracy(fixture().model, fixture().data, cfg.samples);
    CHECK(host == doctest::Approx(1.0));
    for (const TrialResult& r : run_sweep(cfg, fixture().model, fixture().data)) {
        CHECK(r.total == 30);
        CHECK(r.accuracy() == doctest::Approx(host));
    }
}

TEST_CASE("results are ordered and seeded per trial") {
    const SweepConfig cfg = small_config();
    const auto results = run_sweep(cfg, fixture().model, fixture().data);
    REQUIRE(results.size() == 2 * 2 * 3);
    std::size_t i = 0;
    for (FaultType f : cfg.faults) {
        for (double rate : cfg.rates) {
            for (std::size_t t = 0; t < cfg.trials; ++t, ++i) {
                CHECK(results[i].fault == f);
                CHECK(results[i].rate == rate);
                CHECK(results[i].trial == t);
                CHECK(results[i].seed == trial_seed(cfg.seed, t));
            }
        }
    }
    CHECK(trial_seed(1, 0) != trial_seed(1, 1));
    CHECK(trial_seed(1, 0) != trial_seed(2, 0));
}

TEST_CASE("sweeps are deterministic and independent of the job count") {
    SweepConfig cfg = small_config();
    const std::string serial = sweep_csv(run_sweep(cfg, fixture().model, fixture().data));
    CHECK(serial == sweep_csv(run_sweep(cfg, fixture().model, fixture().data)));
    cfg.jobs = 4;
    CHECK(serial == sweep_csv(run_sweep(cfg, fixture().model, fixture().data)));
    cfg.seed = 12;
    CHECK(serial != sweep_csv(run_sweep(cfg, fixture().model, fixture().data)));
}

TEST_CASE("csv and summary formats") {
    const std::vector<TrialResult> results = {
        {FaultType::SAF, 0.0, 0, 5, 10, 10},  {FaultType::SAF, 0.0, 1, 6, 8, 10},
        {FaultType::SAF, 0.1, 0, 5, 5, 10},   {FaultType::SAF, 0.1, 1, 6, 6, 10},
        {FaultType::SwfReset, 0.1, 0, 5, 1, 4},
    };
    const std::string csv = sweep_csv(results);
    CHECK(csv.rfind("fault,rate,trial,seed,accuracy\n", 0) == 0);
    CHECK(csv.find("SAF,0.1000,1,6,0.6000\n") != std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);

    const auto points = summarize(results);
    REQUIRE(points.size() == 3);
    CHECK(points[0].mean_accuracy == doctest::Approx(0.9));
    CHECK(points[1].mean_accuracy == doctest::Approx(0.55));
    CHECK(points[1].trials == 2);
    CHECK(points[2].fault == FaultType::SwfReset);
    CHECK(points[2].mean_accuracy == doctest::Approx(0.25));

    const std::string summary = summary_csv(points);
    CHECK(summary.rfind("fault,rate,trials,mean_accuracy\n", 0) == 0);
    CHECK(summary.find("SAF,0.0000,2,0.9000\n") != std::string::npos);

    const std::string svg = render_svg(points);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(std::count(svg.begin(), svg.end(), '\n') > 3);
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);

    CHECK(summarize({}).empty());
    CHECK(TrialResult{FaultType::SAF, 0.0, 0, 0, 0, 0}.accuracy() == 0.0);
}

TEST_CASE("sweep configuration is checked") {
    SweepConfig cfg = small_config();
    cfg.trials = 0;
    CHECK_THROWS_AS(validate_sweep(cfg), DomainError);
    cfg = small_config();
    cfg.rates = {0.2, 1.5};
    CHECK_THROWS_AS(validate_sweep(cfg), DomainError);
    cfg.rates = {-0.1};
    CHECK_THROWS_AS(validate_sweep(cfg), DomainError);
    cfg = small_config();
    cfg.faults.clear();
    CHECK_THROWS_AS(run_sweep(cfg, fixture().model, fixture().data), DomainError);
    cfg = small_config();
    cfg.rates.clear();
    CHECK_THROWS_AS(validate_sweep(cfg), DomainError);
    cfg = small_config();
    cfg.jobs = 0;
    CHECK_THROWS_AS(validate_sweep(cfg), DomainError);
    cfg = small_config();
    cfg.cols = 2;
    CHECK_THROWS_AS(run_sweep(cfg, fixture().model, fixture().data), CapacityError);
}

TEST_CASE("heavy faults degrade accuracy") {
    SweepConfig cfg = small_config();
    cfg.faults = {FaultType::DRDF};
    cfg.rates = {0.0, 0.5};
    cfg.trials = 2;
    const auto points = summarize(run_sweep(cfg, fixture().model, fixture().data));
    REQUIRE(points.size() == 2);
    CHECK(points[1].mean_accuracy < points[0].mean_accuracy);
}
