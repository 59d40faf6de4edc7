#include "copra/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>

#include "copra/config.hpp"
#include "copra/eval.hpp"
#include "copra/report.hpp"

#ifndef COPRA_VERSION
#define COPRA_VERSION "0.0.0"
#endif

namespace copra {

namespace {

namespace fs = std::filesystem;

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<int> trials;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--config", a.config_path, "JSON config file (defaults when omitted)");
    cmd->add_option("--seed", a.seed, "Master seed (overrides the config)");
    cmd->add_option("--workers", a.workers, "Worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
    cmd->add_option("--trials", a.trials, "Monte-Carlo trials per point")->check(CLI::PositiveNumber);
}

ExperimentConfig resolve(const CommonArgs& a) {
    ExperimentConfig cfg = a.config_path.empty() ? ExperimentConfig{} : load_config(a.config_path);
    if (a.seed)
        cfg.seed = *a.seed;
    if (a.workers)
        cfg.workers = *a.workers;
    if (a.trials)
        cfg.trials = *a.trials;
    cfg.validate();
    return cfg;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    f << text;
    if (!f.flush())
        throw std::runtime_error("write to '" + path.string() + "' failed");
}

std::string read_file(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Robust MVDR beamforming simulator with COPRA regularization", "copra-beam"};
    app.set_version_flag("--version", COPRA_VERSION);
    app.require_subcommand(1);

    CommonArgs sweep_args;
    std::string kind = "snr";
    std::string out_dir = "out";
    auto* sweep = app.add_subcommand("sweep", "Run an SNR or snapshot sweep and write CSV, SVG and metadata");
    add_common(sweep, sweep_args);
    sweep->add_option("--kind", kind, "Sweep variable")->check(CLI::IsMember({"snr", "snapshots"}));
    sweep->add_option("--out", out_dir, "Output directory");

    CommonArgs trial_args;
    std::uint64_t index = 0;
    std::optional<double> snr_db;
    std::optional<int> n_snapshots;
    bool no_interferers = false;
    bool as_json = false;
    auto* trial = app.add_subcommand("trial", "Run one trial and report gammas, split and SINR");
    add_common(trial, trial_args);
    trial->add_option("--index", index, "Trial index within the seed's stream");
    trial->add_option("--snr-db", snr_db, "Input SNR in dB");
    trial->add_option("--snapshots", n_snapshots, "Number of snapshots")->check(CLI::PositiveNumber);
    trial->add_flag("--no-interferers", no_interferers, "Drop all interferers");
    trial->add_flag("--json", as_json, "Machine-readable output");

    std::string csv_path, svg_path;
    auto* plot = app.add_subcommand("plot", "Render a sweep CSV as SVG");
    plot->add_option("csv", csv_path, "Sweep CSV")->required();
    plot->add_option("--out", svg_path, "Output SVG path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*sweep) {
            const ExperimentConfig cfg = resolve(sweep_args);
            const SweepKind k = kind == "snr" ? SweepKind::Snr : SweepKind::Snapshots;
            const SweepResult result = run_sweep(cfg, SweepSpec::from_config(cfg, k), cfg.seed);
            const auto rows = sweep_rows(result);
            const fs::path dir(out_dir);
            fs::create_directories(dir);
            write_file(dir / "sweep.csv", to_csv(rows));
            write_file(dir / "sweep.svg", render_svg(rows));
            write_file(dir / "meta.json", sweep_metadata(result, COPRA_VERSION));
            out << "wrote " << (dir / "sweep.csv").string() << ", sweep.svg, meta.json ("
                << result.points.size() << " points x " << cfg.trials << " trials)\n";
        } else if (*trial) {
            ExperimentConfig cfg = resolve(trial_args);
            if (snr_db)
                cfg.snr_db = *snr_db;
            if (n_snapshots)
                cfg.n_snapshots = *n_snapshots;
            if (no_interferers)
                cfg.n_interferers = 0;
            cfg.validate();
            const TrialRecord rec = run_trial(cfg, index, cfg.seed);
            out << (as_json ? trial_json(rec, cfg, cfg.seed) : trial_text(rec, cfg, cfg.seed));
        } else if (*plot) {
            const auto rows = parse_csv(read_file(csv_path));
            write_file(svg_path, render_svg(rows));
        }
    } catch (const std::exception& e) {
        err << "copra-beam: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace copra
