#pragma once

// End-to-end runs: ingest -> filter -> statistics -> null models -> ensembles
// -> regression grid -> placebo grid -> diagnostics -> report bundle.
//
// Every output is collected by a single emitter and written at the end,
// together with manifest.json (SHA-256 of inputs, config and outputs).
// Nothing time- or machine-dependent is written, so identical configs give
// byte-identical bundles whatever the thread count.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "credtopo/design.hpp"
#include "credtopo/ingest.hpp"
#include "credtopo/nullmodel.hpp"
#include "credtopo/report.hpp"
#include "credtopo/synthgen.hpp"

namespace credtopo {

struct RunConfig {
    // Either the three input files or a generator config.
    std::filesystem::path edges;
    std::filesystem::path firms;
    std::filesystem::path banks;
    std::optional<GenConfig> synth;

    bool apply_filter = true;
    ConsistencyBand band;

    std::vector<NullKind> null_models{NullKind::NetworkDriven, NullKind::BalanceDriven, NullKind::Bicm,
                                      NullKind::Random};
    std::size_t n_samples = 10000;
    std::uint64_t seed = 42;
    std::vector<ModelSpec> grid;
    std::size_t comparison_bins = 10;

    std::filesystem::path out_dir = "out";
    unsigned threads = 0;  // not part of the result; excluded from hashes

    void validate() const;  // throws InvalidArgument
};

// Grid syntax: comma-separated model ids ("s1_m1", "S2-M3A-FE", ...) or the
// presets "full" (every cell, alias "paper"), "stage1", "stage2", "placebo".
std::vector<ModelSpec> parse_grid(const std::string& text);

// Flat "key = value" file; '#' starts a comment. Generator settings use the
// "synth." prefix. Relative input paths resolve against the file's directory.
RunConfig load_run_config(const std::filesystem::path& path);
void apply_run_setting(RunConfig& config, const std::string& key, const std::string& value,
                       const std::filesystem::path& base_dir = {});

// Canonical JSON of everything that determines the outputs.
Json config_json(const RunConfig& config);

std::string sha256_hex(const std::string& data);

struct CellOutcome {
    std::string cell;
    bool ok = true;
    std::string error_kind;
    std::string message;
};

struct RunResult {
    std::map<std::string, std::string> files;  // relative path -> content
    std::vector<CellOutcome> cells;
    int exit_code = 0;  // 0 success, 2 partial grid failure
};

// Which stages to run; `run` uses all of them.
struct StageSelection {
    bool stats = true;
    bool null_models = true;
    bool regressions = true;
};

// Runs and writes the bundle under config.out_dir. Fatal errors propagate.
RunResult run(const RunConfig& config, StageSelection stages = {});

// Loads the sample named by the config (generating it if needed).
Sample load_sample(const RunConfig& config);

}  // namespace credtopo
