#include "limsim/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "limsim/engine.hpp"
#include "limsim/error.hpp"
#include "limsim/mapper.hpp"

namespace limsim {

void validate_sweep(const SweepConfig& cfg) {
    if (cfg.trials == 0) throw DomainError("trials must be at least 1");
    if (cfg.faults.empty()) throw DomainError("fault list is empty");
    if (cfg.rates.empty()) throw DomainError("rate list is empty");
    for (double r : cfg.rates) {
        if (!(r >= 0.0 && r <= 1.0)) throw DomainError("rate " + std::to_string(r) + " outside [0, 1]");
    }
    if (cfg.jobs == 0) throw DomainError("jobs must be at least 1");
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t trial) { return derive_seed(master, trial); }

double host_accuracy(const BnnModel& model, const Dataset& data, std::size_t samples) {
    const std::size_t n = std::min(samples, data.size());
    if (n == 0) return 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (host_forward(model, data.samples[i]).predicted == data.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(n);
}

std::vector<TrialResult> run_sweep(const SweepConfig& cfg, const BnnModel& model, const Dataset& data) {
    validate_sweep(cfg);
    const InstructionStream stream = map_model(model, cfg.rows, cfg.cols, cfg.family);
    check_linkage(stream, model);
    const std::size_t n = std::min(cfg.samples, data.size());

    std::vector<TrialResult> results;
    for (FaultType f : cfg.faults) {
        for (double r : cfg.rates) {
            for (std::size_t t = 0; t < cfg.trials; ++t) results.push_back({f, r, t, trial_seed(cfg.seed, t), 0, n});
        }
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < results.size(); i = next++) {
            try {
                TrialResult& res = results[i];
                ExecutionContext ctx = load(stream, InjectionConfig{res.fault, res.rate, res.seed});
                for (std::size_t s = 0; s < n; ++s) {
                    if (run_inference(ctx, model, data.samples[s]).predicted == data.labels[s]) ++res.correct;
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = results.size();
            }
        }
    };
    const std::size_t jobs = std::min(cfg.jobs, results.size());
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return results;
}

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

}  // namespace

std::string sweep_csv(const std::vector<TrialResult>& results) {
    std::ostringstream os;
    os << "fault,rate,trial,seed,accuracy\n";
    for (const auto& r : results) {
        os << to_string(r.fault) << ',' << fmt("%.4f", r.rate) << ',' << r.trial << ',' << r.seed << ','
           << fmt("%.4f", r.accuracy()) << '\n';
    }
    return os.str();
}

std::vector<SweepPoint> summarize(const std::vector<TrialResult>& results) {
    std::vector<SweepPoint> points;
    for (const auto& r : results) {
        if (points.empty() || points.back().fault != r.fault || points.back().rate != r.rate) {
            points.push_back({r.fault, r.rate, 0, 0.0});
        }
        SweepPoint& p = points.back();
        p.mean_accuracy += r.accuracy();
        ++p.trials;
    }
    for (auto& p : points) p.mean_accuracy /= static_cast<double>(p.trials);
    return points;
}

std::string summary_csv(const std::vector<SweepPoint>& points) {
    std::ostringstream os;
    os << "fault,rate,trials,mean_accuracy\n";
    for (const auto& p : points) {
        os << to_string(p.fault) << ',' << fmt("%.4f", p.rate) << ',' << p.trials << ',' << fmt("%.4f", p.mean_accuracy)
           << '\n';
    }
    return os.str();
}

std::string render_svg(const std::vector<SweepPoint>& points) {
    constexpr double kWidth = 640, kHeight = 400, kLeft = 60, kRight = 140, kTop = 20, kBottom = 50;
    constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    double max_rate = 0.0;
    for (const auto& p : points) max_rate = std::max(max_rate, p.rate);
    if (max_rate <= 0.0) max_rate = 1.0;
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto x = [&](double rate) { return kLeft + pw * rate / max_rate; };
    auto y = [&](double acc) { return kTop + ph * (1.0 - acc); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<line x1=\"" << kLeft << "\" y1=\"" << y(0) << "\" x2=\"" << kLeft + pw << "\" y2=\"" << y(0)
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << kLeft << "\" y1=\"" << y(0) << "\" x2=\"" << kLeft << "\" y2=\"" << y(1)
       << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double a = i / 4.0;
        os << "<text x=\"" << kLeft - 8 << "\" y=\"" << y(a) + 4 << "\" text-anchor=\"end\">" << fmt("%.0f%%", 100 * a)
           << "</text>\n";
        const double r = max_rate * a;
        os << "<text x=\"" << x(r) << "\" y=\"" << y(0) + 18 << "\" text-anchor=\"middle\">" << fmt("%.0f%%", 100 * r)
           << "</text>\n";
    }
    os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\">injection rate</text>\n";
    os << "<text x=\"15\" y=\"" << kTop + ph / 2 << "\" transform=\"rotate(-90 15 " << kTop + ph / 2
       << ")\" text-anchor=\"middle\">mean accuracy</text>\n";

    std::vector<FaultType> order;
    for (const auto& p : points) {
        if (std::find(order.begin(), order.end(), p.fault) == order.end()) order.push_back(p.fault);
    }
    for (std::size_t k = 0; k < order.size(); ++k) {
        const char* color = kColors[k % std::size(kColors)];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const auto& p : points) {
            if (p.fault == order[k]) os << fmt("%.1f", x(p.rate)) << ',' << fmt("%.1f", y(p.mean_accuracy)) << ' ';
        }
        os << "\"/>\n";
        const double ly = kTop + 10 + 18.0 * static_cast<double>(k);
        os << "<line x1=\"" << kLeft + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + pw + 35 << "\" y2=\"" << ly
           << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << kLeft + pw + 40 << "\" y=\"" << ly + 4 << "\">" << to_string(order[k]) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace limsim
