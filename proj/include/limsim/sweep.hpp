#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "limsim/bnn.hpp"
#include "limsim/faults.hpp"
#include "limsim/logic.hpp"

namespace limsim {

struct SweepConfig {
    Family family = Family::Imply;
    std::vector<FaultType> faults{kAllFaultTypes.begin(), kAllFaultTypes.end()};
    std::vector<double> rates{0.0, 0.01, 0.05, 0.10, 0.15, 0.20, 0.30, 0.50};
    std::size_t trials = 20;
    std::uint64_t seed = 1;
    std::size_t samples = 100;
    std::size_t rows = 64;
    std::size_t cols = 64;
    std::size_t jobs = 1;
};

/// Throws DomainError on zero trials, empty lists or rates outside [0, 1].
void validate_sweep(const SweepConfig& cfg);

struct TrialResult {
    FaultType fault;
    double rate;
    std::size_t trial;
    std::uint64_t seed;
    std::size_t correct;
    std::size_t total;

    double accuracy() const noexcept { return total == 0 ? 0.0 : static_cast<double>(correct) / total; }
};

/// Seed of trial `trial`; shared by every (fault, rate) point so that points
/// differ only in the swept parameter.
std::uint64_t trial_seed(std::uint64_t master, std::size_t trial);

/// Maps the model once, then for every (fault, rate, trial) loads a fresh
/// context with injected faults and classifies the first `cfg.samples`
/// samples. Kernel corruption persists across the samples of one trial.
/// Results come back ordered by fault, rate, trial regardless of `cfg.jobs`.
std::vector<TrialResult> run_sweep(const SweepConfig& cfg, const BnnModel& model, const Dataset& data);

/// Accuracy of the host forward pass over the first `samples` samples.
double host_accuracy(const BnnModel& model, const Dataset& data, std::size_t samples);

/// Header `fault,rate,trial,seed,accuracy`.
std::string sweep_csv(const std::vector<TrialResult>& results);

struct SweepPoint {
    FaultType fault;
    double rate;
    std::size_t trials;
    double mean_accuracy;
};

/// Mean accuracy per (fault, rate), in result order.
std::vector<SweepPoint> summarize(const std::vector<TrialResult>& results);

/// Header `fault,rate,trials,mean_accuracy`.
std::string summary_csv(const std::vector<SweepPoint>& points);

/// Mean accuracy against injection rate, one polyline per fault type.
std::string render_svg(const std::vector<SweepPoint>& points);

}  // namespace limsim
