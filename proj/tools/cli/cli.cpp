#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "greenevo/analysis.hpp"
#include "greenevo/config.hpp"
#include "greenevo/data.hpp"
#include "greenevo/error.hpp"
#include "greenevo/evolution.hpp"
#include "greenevo/power.hpp"
#include "greenevo/serialize.hpp"

namespace greenevo::cli {

namespace fs = std::filesystem;

namespace {

std::string output_dir(const std::string& out)
{
    const char* root = std::getenv(kOutputRootEnv);
    if (root != nullptr && *root != '\0' && fs::path(out).is_relative()) {
        return (fs::path(root) / out).string();
    }
    return out;
}

int default_workers()
{
    const auto n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

struct EvolveArgs {
    std::string config;
    std::string mode = "proposed";
    std::optional<std::uint64_t> seed;
    std::string out;
    int workers = default_workers();
    bool resume = false;
};

int cmd_evolve(const EvolveArgs& a, std::ostream& out)
{
    auto cfg = load_config(a.config);
    if (a.seed) {
        cfg.evolution.seed = *a.seed;
    }
    cfg.evolution.workers = a.workers;
    const auto mode = parse_experiment_mode(a.mode);
    cfg.validate();

    const auto dir = output_dir(a.out);
    fs::create_directories(dir);
    write_text_file((fs::path(dir) / "config.snapshot").string(), config_snapshot(cfg));

    const auto grammar = load_run_grammar(cfg);
    const auto data = load_datasets(cfg.data);
    const auto result = run_experiment(cfg.evolution, mode, grammar, data, dir, a.resume);

    out << "mode " << to_string(mode) << ", " << result.runs.size() << " runs, output " << dir << "\n";
    for (const auto& run : result.runs) {
        const auto& e = *run.best.evaluation;
        out << "run " << run.run << ": best " << run.best.id << " fitness " << format_double(e.fitness.value)
            << " acc_left " << format_double(e.partitions.acc_left) << " power_left "
            << format_double(e.partitions.power_left) << " W, " << run.evaluations << " evaluations\n";
    }
    return ok;
}

struct ProbeArgs {
    std::string config;
    std::string module;
    int n_measures = 30;
    std::uint64_t seed = 0;
    int input_dim = 784;
    int classes = 10;
};

int cmd_probe(const ProbeArgs& a, std::ostream& out)
{
    RunConfig cfg;
    if (!a.config.empty()) {
        cfg = load_config(a.config);
    }
    IoShape io{a.input_dim, a.classes};
    if (cfg.data.kind == DataKind::synthetic) {
        io = {cfg.data.synthetic_dims, cfg.data.synthetic_classes};
    }
    const auto grammar = load_run_grammar(cfg);
    const auto module = read_module_document(read_text_file(a.module));
    const auto meters = make_meter_factory(cfg.evolution.meter);
    const auto result = probe_module_power(module, grammar, *meters, io, a.n_measures, a.seed);
    out << "watts " << format_double(result.watts) << "\n";
    out << "macs " << result.macs << "\n";
    return ok;
}

struct AnalyzeArgs {
    std::string baseline;
    std::string proposed;
    std::string out;
    bool final_only = false;
};

std::vector<GenerationRow> read_rows(const std::string& dir)
{
    const auto path = fs::path(dir) / "generations.csv";
    if (!fs::exists(path)) {
        throw DataError("no data: " + path.string() + " does not exist");
    }
    auto rows = parse_generation_csv(read_text_file(path.string()));
    if (rows.empty()) {
        throw DataError("no data: " + path.string() + " has no rows");
    }
    return rows;
}

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out)
{
    const auto report = analyze_experiments(read_rows(a.baseline), read_rows(a.proposed),
                                            a.final_only ? Pooling::final_generation : Pooling::all_generations);
    const auto dir = output_dir(a.out);
    write_analysis(report, dir);
    for (const auto* rows : {&report.accuracy, &report.power}) {
        for (const auto& r : *rows) {
            out << r.label << ": n " << r.n << " mean " << format_double(r.mean) << " sd " << format_double(r.sd)
                << " median " << format_double(r.median);
            if (r.diff_to_baseline) {
                out << " diff " << format_double(*r.diff_to_baseline);
            }
            out << "\n";
        }
    }
    out << "wrote " << dir << "\n";
    return ok;
}

struct DatasetArgs {
    std::string config;
    std::string images;
    std::string labels;
};

int cmd_dataset_check(const DatasetArgs& a, std::ostream& out)
{
    std::string images = a.images;
    std::string labels = a.labels;
    if (!a.config.empty()) {
        const auto cfg = load_config(a.config);
        if (images.empty()) {
            images = cfg.data.train_images;
        }
        if (labels.empty()) {
            labels = cfg.data.train_labels;
        }
    }
    if (images.empty() || labels.empty()) {
        throw ConfigError("dataset-check needs --images and --labels (or a config with data.train_images/labels)");
    }
    const auto ds = load_idx(images, labels);
    out << "examples " << ds.size() << "\n";
    out << "dims " << ds.dims << "\n";
    out << "classes " << ds.class_count << "\n";
    const auto hist = class_histogram(ds);
    for (std::size_t c = 0; c < hist.size(); ++c) {
        out << "class " << c << " " << hist[c] << "\n";
    }
    return ok;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"greenevo: grammar-based, power-aware neuroevolution"};
    app.require_subcommand(1);

    EvolveArgs evolve;
    auto* ev = app.add_subcommand("evolve", "Run a baseline or proposed experiment");
    ev->add_option("--config", evolve.config, "Run configuration file")->required();
    ev->add_option("--mode", evolve.mode, "baseline or proposed")->check(CLI::IsMember({"baseline", "proposed"}));
    ev->add_option("--seed", evolve.seed, "Override evolution.seed");
    ev->add_option("--out", evolve.out, "Output directory")->required();
    ev->add_option("--workers", evolve.workers, "Concurrent evaluations")->check(CLI::PositiveNumber);
    ev->add_flag("--resume", evolve.resume, "Continue from the latest checkpoints");

    ProbeArgs probe;
    auto* pr = app.add_subcommand("probe", "Measure the power of one module");
    pr->add_option("--config", probe.config, "Run configuration file (meter and grammar)");
    pr->add_option("--module", probe.module, "Module or single-module individual JSON")->required();
    pr->add_option("--n-measures", probe.n_measures, "Measurements averaged")->check(CLI::PositiveNumber);
    pr->add_option("--seed", probe.seed, "Probe input seed");
    pr->add_option("--input-dim", probe.input_dim, "Input width")->check(CLI::PositiveNumber);
    pr->add_option("--classes", probe.classes, "Output classes")->check(CLI::PositiveNumber);

    AnalyzeArgs analyze;
    auto* an = app.add_subcommand("analyze", "Compare a baseline and a proposed experiment");
    an->add_option("--baseline", analyze.baseline, "Baseline experiment directory")->required();
    an->add_option("--proposed", analyze.proposed, "Proposed experiment directory")->required();
    an->add_option("--out", analyze.out, "Output directory")->required();
    an->add_flag("--final-only", analyze.final_only, "Use only each run's final best individual");

    DatasetArgs dataset;
    auto* dc = app.add_subcommand("dataset-check", "Load an IDX pair and report its contents");
    dc->add_option("--config", dataset.config, "Run configuration file");
    dc->add_option("--images", dataset.images, "IDX images file");
    dc->add_option("--labels", dataset.labels, "IDX labels file");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            for (auto* sub : app.get_subcommands()) {
                out << sub->help();
            }
            return ok;
        }
        err << "error: " << e.what() << "\n";
        return config_error;
    }

    try {
        if (ev->parsed()) {
            return cmd_evolve(evolve, out);
        }
        if (pr->parsed()) {
            return cmd_probe(probe, out);
        }
        if (an->parsed()) {
            return cmd_analyze(analyze, out);
        }
        return cmd_dataset_check(dataset, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const GrammarError& e) {
        err << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return data_error;
    } catch (const InvalidGenotype& e) {
        err << "data error: " << e.what() << "\n";
        return data_error;
    } catch (const StatsError& e) {
        err << "data error: " << e.what() << "\n";
        return data_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return runtime_failure;
    }
}

} // namespace greenevo::cli
