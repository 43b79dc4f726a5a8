// credtopo: command-line front end for the credit-network toolkit.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "credtopo/errors.hpp"
#include "credtopo/ingest.hpp"
#include "credtopo/netstats.hpp"
#include "credtopo/pipeline.hpp"
#include "credtopo/report.hpp"
#include "credtopo/synthgen.hpp"

namespace fs = std::filesystem;
using namespace credtopo;

namespace {

struct CommonArgs {
    std::string config;
    std::string edges, firms, banks;
    std::string out;
    std::string grid;
    std::string null_models;
    std::vector<std::string> settings;
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    unsigned threads = 0;
    bool no_filter = false;
};

void add_inputs(CLI::App* app, CommonArgs& a) {
    app->add_option("--config", a.config, "flat key = value run configuration");
    app->add_option("--edges", a.edges, "edge list CSV (firm_id,bank_id,amount)");
    app->add_option("--firms", a.firms, "firm attribute CSV");
    app->add_option("--banks", a.banks, "bank attribute CSV");
    app->add_option("--out", a.out, "output directory");
    app->add_option("--set", a.settings, "extra key=value setting (repeatable), e.g. synth.seed=7");
    app->add_flag("--no-filter", a.no_filter, "skip the s_net/s_bal consistency filter");
}

void add_run_flags(CLI::App* app, CommonArgs& a) {
    app->add_option("--seed", a.seed, "master seed");
    app->add_option("--samples", a.samples, "ensemble size per null model");
    app->add_option("--threads", a.threads, "worker threads (0 = all cores)");
}

RunConfig build_config(const CommonArgs& a, const std::string& default_grid) {
    RunConfig c = a.config.empty() ? RunConfig{} : load_run_config(a.config);
    if (!a.edges.empty()) c.edges = a.edges;
    if (!a.firms.empty()) c.firms = a.firms;
    if (!a.banks.empty()) c.banks = a.banks;
    if (!a.out.empty()) c.out_dir = a.out;
    for (const auto& s : a.settings) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw InvalidArgument("--set expects key=value, got '" + s + "'");
        apply_run_setting(c, s.substr(0, eq), s.substr(eq + 1));
    }
    if (!a.grid.empty()) c.grid = parse_grid(a.grid);
    if (c.grid.empty()) c.grid = parse_grid(default_grid);
    if (!a.null_models.empty()) apply_run_setting(c, "null_models", a.null_models);
    if (a.seed) c.seed = a.seed;
    if (a.samples) c.n_samples = a.samples;
    if (a.threads) c.threads = a.threads;
    if (a.no_filter) c.apply_filter = false;
    return c;
}

int report(const RunResult& r, const RunConfig& c) {
    for (const auto& cell : r.cells)
        if (!cell.ok) std::cerr << "failed: " << cell.message << " [" << cell.error_kind << "]\n";
    std::cout << "wrote " << r.files.size() << " files to " << c.out_dir.string() << "\n";
    return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bipartite firm-bank credit network analysis"};
    app.require_subcommand(1);

    CommonArgs ingest_args, stats_args, null_args, regress_args, placebo_args, run_args, synth_args;

    auto* ingest = app.add_subcommand("ingest", "parse and filter a sample, write the cleaned CSVs");
    add_inputs(ingest, ingest_args);

    auto* stats = app.add_subcommand("stats", "summary statistics and CCDFs");
    add_inputs(stats, stats_args);

    auto* nullmodel = app.add_subcommand("nullmodel", "calibrate null models and sample ensembles");
    add_inputs(nullmodel, null_args);
    add_run_flags(nullmodel, null_args);
    nullmodel->add_option("--kind", null_args.null_models, "comma list: net, bal, bicm, random");

    auto* regress = app.add_subcommand("regress", "fit the regression grid");
    add_inputs(regress, regress_args);
    add_run_flags(regress, regress_args);
    regress->add_option("--grid", regress_args.grid, "model ids or presets (stage1, stage2, placebo, full)");

    auto* placebo = app.add_subcommand("placebo", "fit the placebo (cross-controlled) grid");
    add_inputs(placebo, placebo_args);
    add_run_flags(placebo, placebo_args);

    auto* synth = app.add_subcommand("synth", "generate a synthetic sample");
    add_inputs(synth, synth_args);
    bool calibrate = false;
    synth->add_flag("--calibrate", calibrate, "search size dispersions matching the consolidated headline statistics");
    synth->add_option("--seed", synth_args.seed, "generator seed");

    auto* runcmd = app.add_subcommand("run", "full pipeline");
    add_inputs(runcmd, run_args);
    add_run_flags(runcmd, run_args);
    runcmd->add_option("--grid", run_args.grid, "model ids or presets (default: full)");
    runcmd->add_option("--null-models", run_args.null_models, "comma list: net, bal, bicm, random");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) {
            RunConfig c = build_config(ingest_args, "s1_m1");
            const Sample s = load_sample(c);
            validate(s);
            fs::create_directories(c.out_dir);
            if (c.apply_filter) {
                FilteredSample f = apply_consistency_filter(s, c.band);
                write_sample(f.sample, c.out_dir);
                std::ofstream(c.out_dir / "filter_report.json") << to_json(f.report).dump(2) << "\n";
                std::cout << "kept " << f.report.kept_firms << " firms, dropped " << f.report.dropped_firms.size()
                          << "\n";
            } else {
                write_sample(s, c.out_dir);
            }
            return 0;
        }
        if (*stats) {
            RunConfig c = build_config(stats_args, "s1_m1");
            return report(run(c, {true, false, false}), c);
        }
        if (*nullmodel) {
            RunConfig c = build_config(null_args, "s1_m1");
            return report(run(c, {false, true, false}), c);
        }
        if (*regress) {
            RunConfig c = build_config(regress_args, "stage1,stage2");
            return report(run(c, {false, false, true}), c);
        }
        if (*placebo) {
            RunConfig c = build_config(placebo_args, "placebo");
            return report(run(c, {false, false, true}), c);
        }
        if (*synth) {
            RunConfig c = build_config(synth_args, "s1_m1");
            GenConfig g = c.synth.value_or(GenConfig{});
            if (synth_args.seed) g.seed = synth_args.seed;
            if (calibrate) {
                const TopologyFit fit = calibrate_topology(g, consolidated_targets());
                std::cout << "trials " << fit.trials << ", max relative error " << fit.max_rel_error
                          << (fit.within_tolerance ? " (within tolerance)" : " (outside tolerance)") << "\n"
                          << summary_table(fit.stats);
                g = fit.config;
            }
            const Generated gen = generate(g);
            fs::create_directories(c.out_dir);
            write_generated(gen, c.out_dir);
            std::cout << summary_table(summarize(gen.sample.network), "generated sample");
            return 0;
        }
        if (*runcmd) {
            RunConfig c = build_config(run_args, "full");
            return report(run(c), c);
        }
    } catch (const Error& e) {
        std::cerr << "error [" << e.kind() << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
