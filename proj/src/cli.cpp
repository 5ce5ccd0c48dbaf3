#include "limsim/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "limsim/bnn.hpp"
#include "limsim/engine.hpp"
#include "limsim/error.hpp"
#include "limsim/mapper.hpp"
#include "limsim/metrics.hpp"
#include "limsim/sweep.hpp"

namespace limsim {

namespace fs = std::filesystem;

namespace {

/// Bad flag value detected after CLI11 parsing.
class UsageError : public Error {
public:
    using Error::Error;
};

Family family_arg(const std::string& name) {
    const auto f = parse_family(name);
    if (!f) throw UsageError("unknown family '" + name + "' (expected imply or magic)");
    return *f;
}

std::vector<FaultType> fault_args(const std::vector<std::string>& names, std::span<const FaultType> fallback) {
    if (names.empty()) return {fallback.begin(), fallback.end()};
    std::vector<FaultType> out;
    for (const auto& n : names) {
        if (n == "all") {
            out.assign(kAllFaultTypes.begin(), kAllFaultTypes.end());
            continue;
        }
        const auto f = parse_fault_type(n);
        if (!f) throw UsageError("unknown fault type '" + n + "'");
        if (std::find(out.begin(), out.end(), *f) == out.end()) out.push_back(*f);
    }
    return out;
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text(const fs::path& path) {
    const auto bytes = read_bytes(path);
    return {bytes.begin(), bytes.end()};
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_file(const fs::path& path, const std::string& text) {
    write_file(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

struct DataArgs {
    std::string model;
    std::string images;
    std::string labels;
};

void add_data_options(CLI::App* cmd, DataArgs& d, bool need_data) {
    cmd->add_option("--model", d.model, "Model file")->required();
    auto* img = cmd->add_option("--images", d.images, "IDX image file");
    auto* lab = cmd->add_option("--labels", d.labels, "IDX label file");
    if (need_data) {
        img->required();
        lab->required();
    }
}

struct MapArgs {
    std::string family = "imply";
    std::size_t rows = 64;
    std::size_t cols = 64;
};

void add_map_options(CLI::App* cmd, MapArgs& m) {
    cmd->add_option("--family", m.family, "Logic family: imply or magic")->capture_default_str();
    cmd->add_option("--rows", m.rows, "Crossbar rows")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--cols", m.cols, "Crossbar columns")->capture_default_str()->check(CLI::PositiveNumber);
}

// --- characterize ----------------------------------------------------------

struct CharacterizeArgs {
    std::string family;
    std::vector<std::string> faults;
    bool all_gates = false;
    std::string csv;
    std::string table;
};

int cmd_characterize(const CharacterizeArgs& a, std::ostream& out) {
    const Family family = family_arg(a.family);
    const auto faults = fault_args(a.faults, kTableFaultTypes);
    const auto gates = a.all_gates ? family_gates(family) : characterized_gates(family);
    const CharacterizationReport report = characterize_family(family, gates, faults);
    const std::string table = report_table(report);
    if (!a.csv.empty()) write_file(a.csv, report_csv(report));
    if (!a.table.empty()) write_file(a.table, table);
    if (a.csv.empty() && a.table.empty()) out << table;
    return kExitOk;
}

// --- map -------------------------------------------------------------------

struct MapCmdArgs {
    std::string model;
    MapArgs map;
    std::string output;
    std::string listing;
    bool naive = false;
};

int cmd_map(const MapCmdArgs& a, std::ostream& out) {
    const BnnModel model = load_model_file(a.model);
    const InstructionStream stream = map_model(model, a.map.rows, a.map.cols, family_arg(a.map.family),
                                               a.naive ? Packing::OnePerColumn : Packing::FirstFit);
    validate_stream(stream);
    if (!a.output.empty()) write_file(a.output, serialize(stream));
    if (!a.listing.empty()) write_file(a.listing, disassemble(stream));
    const MappingStats st = mapping_stats(stream);
    out << "crossbars " << st.crossbars << ", kernel writes " << st.write_records << ", cells " << st.written_cells
        << ", columns " << st.columns_used << ", records " << stream.records.size() << '\n';
    if (a.output.empty() && a.listing.empty()) out << disassemble(stream);
    return kExitOk;
}

// --- run -------------------------------------------------------------------

struct RunArgs {
    DataArgs data;
    MapArgs map;
    std::string stream;
    std::size_t index = 0;
    std::string fault;
    double rate = 0.0;
    std::uint64_t seed = 1;
};

InstructionStream stream_for(const std::string& path, const BnnModel& model, const MapArgs& m) {
    if (!path.empty()) return parse_stream(read_bytes(path));
    return map_model(model, m.rows, m.cols, family_arg(m.family));
}

int cmd_run(const RunArgs& a, std::ostream& out) {
    const BnnModel model = load_model_file(a.data.model);
    const Dataset data = load_idx(a.data.images, a.data.labels, a.index + 1);
    if (a.index >= data.size()) throw UsageError("sample index " + std::to_string(a.index) + " out of range");
    std::optional<InjectionConfig> inj;
    if (!a.fault.empty()) {
        const auto f = parse_fault_type(a.fault);
        if (!f) throw UsageError("unknown fault type '" + a.fault + "'");
        if (!(a.rate >= 0.0 && a.rate <= 1.0)) throw UsageError("rate must lie in [0, 1]");
        inj = InjectionConfig{*f, a.rate, a.seed};
    }
    ExecutionContext ctx = load(stream_for(a.stream, model, a.map), inj);
    const ForwardTrace t = run_inference(ctx, model, data.samples[a.index]);
    out << "sample " << a.index << " label " << int{data.labels[a.index]} << " predicted " << t.predicted << '\n';
    out << "scores";
    for (auto s : t.scores) out << ' ' << s;
    out << '\n';
    out << "faults " << ctx.injected_faults() << ", cycles " << ctx.cycles().total() << " (compute "
        << ctx.cycles().compute << ", write " << ctx.cycles().write << ", read " << ctx.cycles().read << ")\n";
    return kExitOk;
}

// --- sweep -----------------------------------------------------------------

struct SweepArgs {
    std::string config;
    DataArgs data;
    std::string family;
    std::vector<std::string> faults;
    std::vector<double> rates;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t jobs = 0;
    std::string out;
    std::string summary;
    std::string plot;
};

struct SweepFlags {
    CLI::Option* model;
    CLI::Option* images;
    CLI::Option* labels;
    CLI::Option* family;
    CLI::Option* faults;
    CLI::Option* rates;
    CLI::Option* trials;
    CLI::Option* seed;
    CLI::Option* samples;
    CLI::Option* rows;
    CLI::Option* cols;
    CLI::Option* jobs;
    CLI::Option* out;
    CLI::Option* summary;
    CLI::Option* plot;
};

// Config-file keys; flags given on the command line take precedence.
void apply_config(const fs::path& path, SweepArgs& a, const SweepFlags& f, SweepConfig& cfg) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path.string(), e.what());
    }
    if (!doc.is_object()) throw ValidationError(path.string(), "expected an object");
    const fs::path base = path.parent_path();
    auto rel = [&](const nlohmann::json& v) { return (base / v.get<std::string>()).string(); };
    try {
        for (const auto& [key, v] : doc.items()) {
            if (key == "model") {
                if (!f.model->count()) a.data.model = rel(v);
            } else if (key == "images") {
                if (!f.images->count()) a.data.images = rel(v);
            } else if (key == "labels") {
                if (!f.labels->count()) a.data.labels = rel(v);
            } else if (key == "family") {
                if (!f.family->count()) a.family = v.get<std::string>();
            } else if (key == "faults") {
                if (!f.faults->count()) a.faults = v.get<std::vector<std::string>>();
            } else if (key == "rates") {
                if (!f.rates->count()) cfg.rates = v.get<std::vector<double>>();
            } else if (key == "trials") {
                if (!f.trials->count()) cfg.trials = v.get<std::size_t>();
            } else if (key == "seed") {
                if (!f.seed->count()) cfg.seed = v.get<std::uint64_t>();
            } else if (key == "samples") {
                if (!f.samples->count()) cfg.samples = v.get<std::size_t>();
            } else if (key == "rows") {
                if (!f.rows->count()) cfg.rows = v.get<std::size_t>();
            } else if (key == "cols") {
                if (!f.cols->count()) cfg.cols = v.get<std::size_t>();
            } else if (key == "jobs") {
                if (!f.jobs->count()) cfg.jobs = v.get<std::size_t>();
            } else if (key == "out") {
                if (!f.out->count()) a.out = rel(v);
            } else if (key == "summary") {
                if (!f.summary->count()) a.summary = rel(v);
            } else if (key == "plot") {
                if (!f.plot->count()) a.plot = rel(v);
            } else {
                throw ValidationError(key, "unknown sweep setting");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path.string(), e.what());
    }
}

int cmd_sweep(SweepArgs a, const SweepFlags& f, std::ostream& out, std::ostream& err) {
    SweepConfig cfg;
    if (!a.config.empty()) apply_config(a.config, a, f, cfg);
    if (f.rates->count()) cfg.rates = a.rates;
    if (f.trials->count()) cfg.trials = a.trials;
    if (f.seed->count()) cfg.seed = a.seed;
    if (f.samples->count()) cfg.samples = a.samples;
    if (f.rows->count()) cfg.rows = a.rows;
    if (f.cols->count()) cfg.cols = a.cols;
    if (f.jobs->count()) cfg.jobs = a.jobs;
    if (!a.family.empty()) cfg.family = family_arg(a.family);
    cfg.faults = fault_args(a.faults, kAllFaultTypes);
    if (a.data.model.empty() || a.data.images.empty() || a.data.labels.empty()) {
        throw UsageError("sweep needs --model, --images and --labels (flags or config file)");
    }
    try {
        validate_sweep(cfg);
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }

    const BnnModel model = load_model_file(a.data.model);
    const Dataset data = load_idx(a.data.images, a.data.labels, cfg.samples);
    const auto results = run_sweep(cfg, model, data);
    const auto points = summarize(results);

    const std::string csv = sweep_csv(results);
    if (a.out.empty() || a.out == "-") {
        out << csv;
    } else {
        write_file(a.out, csv);
    }
    if (!a.summary.empty()) write_file(a.summary, summary_csv(points));
    if (!a.plot.empty()) write_file(a.plot, render_svg(points));
    err << "host accuracy " << host_accuracy(model, data, cfg.samples) << " on " << data.size() << " samples\n"
        << summary_csv(points);
    return kExitOk;
}

// --- verify ----------------------------------------------------------------

struct VerifyArgs {
    DataArgs data;
    MapArgs map;
    std::string stream;
    std::size_t samples = 100;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
    const BnnModel model = load_model_file(a.data.model);
    const Dataset data = a.samples == 0 ? Dataset{} : load_idx(a.data.images, a.data.labels, a.samples);
    const std::size_t n = std::min(a.samples, data.size());
    ExecutionContext ctx = load(stream_for(a.stream, model, a.map), std::nullopt);
    try {
        check_linkage(ctx.stream(), model);
    } catch (const LinkageError& e) {
        out << "LINKAGE " << e.what() << '\n';
        return kExitFailure;
    }

    std::vector<std::size_t> xnor_layers;
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        if (is_xnor_layer(model.layers[i])) xnor_layers.push_back(i);
    }
    for (std::size_t s = 0; s < n; ++s) {
        const ForwardTrace host = host_forward(model, data.samples[s]);
        const ForwardTrace xbar = run_inference(ctx, model, data.samples[s]);
        for (std::size_t k = 0; k < host.popcounts.size(); ++k) {
            const auto& h = host.popcounts[k];
            const auto& x = xbar.popcounts[k];
            for (std::size_t i = 0; i < h.size(); ++i) {
                if (h[i] != x[i]) {
                    const std::size_t units = unit_count(model.layers[xnor_layers[k]]);
                    out << "DIVERGENCE sample " << s << " layer " << xnor_layers[k] << " unit " << i % units
                        << " position " << i / units << ": crossbar popcount " << x[i] << ", host " << h[i] << '\n';
                    return kExitFailure;
                }
            }
        }
        if (host.predicted != xbar.predicted) {
            out << "DIVERGENCE sample " << s << ": crossbar class " << xbar.predicted << ", host " << host.predicted
                << '\n';
            return kExitFailure;
        }
    }
    out << "OK " << n << '/' << n << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Logic-in-memory crossbar fault simulator", "limsim"};
    app.require_subcommand(1);

    CharacterizeArgs ch;
    auto* c_ch = app.add_subcommand("characterize", "Exhaustive per-gate fault characterization");
    c_ch->add_option("--family", ch.family, "imply or magic")->required();
    c_ch->add_option("--faults", ch.faults, "Fault types (saf rdf drdf irf swf_set swf_reset, or all)")
        ->delimiter(',');
    c_ch->add_flag("--all-gates", ch.all_gates, "Include every gate the family offers");
    c_ch->add_option("--csv", ch.csv, "Write the per-cell CSV here");
    c_ch->add_option("--table", ch.table, "Write the text table here");

    MapCmdArgs mp;
    auto* c_map = app.add_subcommand("map", "Compile a model into an XFLT instruction stream");
    c_map->add_option("--model", mp.model, "Model file")->required();
    add_map_options(c_map, mp.map);
    c_map->add_option("-o,--output", mp.output, "XFLT output file");
    c_map->add_option("--listing", mp.listing, "Disassembly output file");
    c_map->add_flag("--naive", mp.naive, "One kernel chunk per column");

    RunArgs rn;
    auto* c_run = app.add_subcommand("run", "Classify one sample on the crossbar");
    add_data_options(c_run, rn.data, true);
    add_map_options(c_run, rn.map);
    c_run->add_option("--stream", rn.stream, "Use this XFLT file instead of mapping the model");
    c_run->add_option("--index", rn.index, "Sample index")->capture_default_str();
    c_run->add_option("--fault", rn.fault, "Fault type to inject");
    c_run->add_option("--rate", rn.rate, "Injection rate in [0, 1]")->capture_default_str();
    c_run->add_option("--seed", rn.seed, "Injection seed")->capture_default_str();

    SweepArgs sw;
    SweepFlags sf{};
    auto* c_sw = app.add_subcommand("sweep", "Accuracy against injection rate");
    c_sw->add_option("--config", sw.config, "JSON sweep settings; flags override them");
    sf.model = c_sw->add_option("--model", sw.data.model, "Model file");
    sf.images = c_sw->add_option("--images", sw.data.images, "IDX image file");
    sf.labels = c_sw->add_option("--labels", sw.data.labels, "IDX label file");
    sf.family = c_sw->add_option("--family", sw.family, "imply or magic (default imply)");
    sf.faults = c_sw->add_option("--faults", sw.faults, "Fault types (default all six)")->delimiter(',');
    sf.rates = c_sw->add_option("--rates", sw.rates, "Injection rates")->delimiter(',');
    sf.trials = c_sw->add_option("--trials", sw.trials, "Trials per point (default 20)");
    sf.seed = c_sw->add_option("--seed", sw.seed, "Master seed (default 1)");
    sf.samples = c_sw->add_option("--samples", sw.samples, "Samples per trial (default 100)");
    sf.rows = c_sw->add_option("--rows", sw.rows, "Crossbar rows (default 64)");
    sf.cols = c_sw->add_option("--cols", sw.cols, "Crossbar columns (default 64)");
    sf.jobs = c_sw->add_option("--jobs", sw.jobs, "Worker threads (default 1)");
    sf.out = c_sw->add_option("-o,--out", sw.out, "CSV output file (default or - for stdout)");
    sf.summary = c_sw->add_option("--summary", sw.summary, "Mean-accuracy CSV output file");
    sf.plot = c_sw->add_option("--plot", sw.plot, "SVG plot output file");

    VerifyArgs vf;
    auto* c_vf = app.add_subcommand("verify", "Compare the fault-free crossbar with the host forward pass");
    add_data_options(c_vf, vf.data, false);
    add_map_options(c_vf, vf.map);
    c_vf->add_option("--stream", vf.stream, "Use this XFLT file instead of mapping the model");
    c_vf->add_option("--samples", vf.samples, "Number of samples")->capture_default_str();

    std::vector<const char*> argv;
    for (const auto& s : args) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (c_ch->parsed()) return cmd_characterize(ch, out);
        if (c_map->parsed()) return cmd_map(mp, out);
        if (c_run->parsed()) return cmd_run(rn, out);
        if (c_sw->parsed()) return cmd_sweep(sw, sf, out, err);
        if (c_vf->parsed()) {
            if (vf.samples > 0 && (vf.data.images.empty() || vf.data.labels.empty())) {
                throw UsageError("verify needs --images and --labels unless --samples 0");
            }
            return cmd_verify(vf, out);
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace limsim
