#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "credtopo/diagnostics.hpp"
#include "credtopo/errors.hpp"
#include "credtopo/pipeline.hpp"

using namespace credtopo;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("credtopo_pipe_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

RunConfig synthetic(std::size_t nf, std::size_t nb, const std::string& grid, const fs::path& out) {
    RunConfig c;
    c.synth = GenConfig{};
    c.synth->n_firms = nf;
    c.synth->n_banks = nb;
    c.synth->seed = 3;
    if (nf * nb < 1000) c.synth->target_density = 0.3;
    c.grid = parse_grid(grid);
    c.n_samples = 40;
    c.out_dir = out;
    c.threads = 1;
    return c;
}

std::size_t count_prefix(const RunResult& r, const std::string& prefix, const std::string& suffix) {
    std::size_t n = 0;
    for (const auto& [path, _] : r.files)
        if (path.rfind(prefix, 0) == 0 && path.size() >= suffix.size() &&
            path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0)
            ++n;
    return n;
}

// Direct central moments.
Moments oracle_moments(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double m2 = 0, m3 = 0, m4 = 0;
    for (double x : v) {
        const double d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    return {mean, m2, m3 / std::pow(m2, 1.5), m4 / (m2 * m2) - 3.0};
}

}  // namespace

TEST_CASE("a minimal grid gives one regression table plus statistics") {
    const auto dir = scratch("minimal");
    const auto r = run(synthetic(20, 8, "s1_m1", dir));
    CHECK(r.exit_code == 0);
    CHECK(count_prefix(r, "regressions/", ".txt") == 1);
    CHECK(r.files.count("regressions/s1_m1.txt") == 1);
    CHECK(count_prefix(r, "tables/", ".txt") == 1);
    CHECK(r.files.count("summary_stats.json") == 1);
    CHECK(r.files.count("manifest.json") == 1);
    for (const auto& [path, content] : r.files) CHECK(slurp(dir / path) == content);
    fs::remove_all(dir);
}

TEST_CASE("the replication grid has the full layout") {
    const auto dir = scratch("paper");
    const auto r = run(synthetic(113, 61, "paper", dir));
    CHECK(r.exit_code == 0);
    for (const char* s : {"s1", "s2"}) {
        for (const char* m : {"m1", "m2a", "m2b", "m3a", "m3b", "m3a_nostr", "m3a_nullnet", "m3a_nullbal"})
            CHECK(r.files.count(std::string("regressions/") + s + "_" + m + ".json") == 1);
        CHECK(r.files.count(std::string("tables/") + s + "_models.txt") == 1);
        CHECK(r.files.count(std::string("tables/") + s + "_placebo.txt") == 1);
    }
    CHECK(r.files.count("regressions/s2_m3a_fe.json") == 1);
    CHECK(r.files.count("tables/s2_fixed_effects.txt") == 1);
    CHECK(r.files.count("vif.json") == 1);
    CHECK(r.files.count("diagnostics/residuals.json") == 1);
    CHECK(r.files.count("benchmarks.json") == 1);
    for (const char* k : {"nullnet", "nullbal", "bicm", "random"}) {
        bool found = false;
        for (const auto& [path, _] : r.files) found = found || path == std::string("nullmodels/") + k + ".json";
        CHECK(found);
    }

    const auto table = nlohmann::json::parse(r.files.at("regressions/s1_m1.json"));
    CHECK(table["n_obs"].get<std::size_t>() == 113 * 61);
    const auto placebo = r.files.at("tables/s1_placebo.txt");
    for (const char* col : {"Model 3A ", "(no s_net/t_net)", "(NullNet)", "(NullBal)"})
        CHECK(placebo.find(col) != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("runs are byte-identical across thread counts") {
    const auto a = scratch("det_a"), b = scratch("det_b");
    RunConfig ca = synthetic(40, 15, "stage1,s2_m3a,placebo", a);
    RunConfig cb = ca;
    cb.out_dir = b;
    cb.threads = 4;
    const auto ra = run(ca), rb = run(cb);
    REQUIRE(ra.files.size() == rb.files.size());
    for (const auto& [path, content] : ra.files) {
        REQUIRE(rb.files.count(path) == 1);
        CHECK(rb.files.at(path) == content);
        CHECK(slurp(a / path) == slurp(b / path));
    }
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("manifest hashes cover the outputs") {
    const auto dir = scratch("manifest");
    const RunConfig c = synthetic(20, 8, "s1_m1,s2_m1", dir);
    const auto r = run(c);
    const auto m = nlohmann::json::parse(r.files.at("manifest.json"));
    CHECK(m["status"] == "ok");
    CHECK(m["config_sha256"].get<std::string>() == sha256_hex(config_json(c).dump()));
    CHECK(nlohmann::json::parse(r.files.at("config.json")) == nlohmann::json::parse(config_json(c).dump()));
    for (const auto& [path, content] : r.files) {
        if (path == "manifest.json") continue;
        CHECK(m["outputs"][path].get<std::string>() == sha256_hex(content));
    }
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    fs::remove_all(dir);
}

TEST_CASE("a failing grid cell is recorded without aborting the run") {
    const auto dir = scratch("partial");
    RunConfig c = synthetic(60, 20, "s1_m1,s2_m3a", dir);
    c.synth->noise_sd = 0.0;
    c.synth->balance_noise = 0.0;  // ln s_bal duplicates ln s_net in stage 2
    const auto r = run(c);
    CHECK(r.exit_code == 2);
    CHECK(r.files.count("regressions/s1_m1.json") == 1);
    CHECK(r.files.count("regressions/s2_m3a.json") == 0);
    const auto m = nlohmann::json::parse(r.files.at("manifest.json"));
    CHECK(m["status"] == "partial");
    bool recorded = false;
    for (const auto& cell : m["cells"])
        if (cell["cell"] == "s2_m3a") recorded = !cell["ok"].get<bool>() && cell.contains("error");
    CHECK(recorded);
    fs::remove_all(dir);
}

TEST_CASE("config files") {
    const auto dir = scratch("config");
    std::ofstream(dir / "run.conf") << "# sample run\n"
                                       "edges = data/edges.csv\n"
                                       "firms = data/firms.csv\n"
                                       "banks = /abs/banks.csv\n"
                                       "samples = 250   # ensemble size\n"
                                       "seed = 9\n"
                                       "grid = s1_m1, s2_m3a\n"
                                       "null_models = net,bicm\n"
                                       "filter_lower = 0.01\n"
                                       "synth.noise_sd = 0.7\n";
    const RunConfig c = load_run_config(dir / "run.conf");
    CHECK(c.edges == dir / "data/edges.csv");
    CHECK(c.banks == fs::path("/abs/banks.csv"));
    CHECK(c.n_samples == 250);
    CHECK(c.seed == 9);
    CHECK(c.grid.size() == 2);
    CHECK(c.null_models == std::vector<NullKind>{NullKind::NetworkDriven, NullKind::Bicm});
    CHECK(c.band.lower == 0.01);
    REQUIRE(c.synth.has_value());
    CHECK(c.synth->noise_sd == 0.7);

    std::ofstream(dir / "bad.conf") << "colour = blue\n";
    CHECK_THROWS_AS(load_run_config(dir / "bad.conf"), InvalidArgument);
    std::ofstream(dir / "bad2.conf") << "samples\n";
    CHECK_THROWS_AS(load_run_config(dir / "bad2.conf"), MalformedRow);

    RunConfig v;
    v.synth = GenConfig{};
    v.grid = parse_grid("s1_m1");
    v.n_samples = 0;
    CHECK_THROWS_AS(v.validate(), InvalidArgument);
    v.n_samples = 10;
    v.null_models = {NullKind::Bicm};
    v.grid = parse_grid("s1_m3a_nullnet");
    CHECK_THROWS_AS(v.validate(), InvalidArgument);
    CHECK(parse_grid("stage1").size() == 5);
    CHECK(parse_grid("paper").size() == 17);  // m3a is shared with the placebo panel
    CHECK_THROWS_AS(parse_grid("s1_m9"), InvalidArgument);
    fs::remove_all(dir);
}

TEST_CASE("command-line smoke test") {
    const auto dir = scratch("cli");
    const std::string cli = CREDTOPO_CLI;
    const auto sh = [](const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()); };
    CHECK(sh(cli + " synth --out " + (dir / "s").string() + " --seed 4") == 0);
    CHECK(fs::exists(dir / "s" / "edges.csv"));
    CHECK(sh(cli + " run --edges " + (dir / "s" / "edges.csv").string() + " --firms " +
             (dir / "s" / "firms.csv").string() + " --banks " + (dir / "s" / "banks.csv").string() +
             " --grid s1_m1 --samples 20 --out " + (dir / "r").string()) == 0);
    CHECK(fs::exists(dir / "r" / "manifest.json"));
    CHECK(sh(cli + " run --grid s1_m1 --out " + (dir / "x").string()) != 0);  // no inputs
    CHECK(sh(cli + " frobnicate") != 0);
    fs::remove_all(dir);
}

TEST_CASE("central moments against the direct definition") {
    std::mt19937_64 gen(3);
    std::gamma_distribution<double> g(2.0, 1.5);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> v(500);
        for (double& x : v) x = g(gen);
        const Moments m = central_moments(v), o = oracle_moments(v);
        CHECK(std::abs(m.mean - o.mean) < 1e-12);
        CHECK(std::abs(m.variance - o.variance) < 1e-12);
        CHECK(std::abs(m.skewness - o.skewness) < 1e-12);
        CHECK(std::abs(m.excess_kurtosis - o.excess_kurtosis) < 1e-12);
    }
    const Moments flat = central_moments(std::vector<double>(10, 2.5));
    CHECK(flat.variance == 0.0);
    CHECK(flat.skewness == 0.0);
    CHECK(flat.excess_kurtosis == 0.0);
}

TEST_CASE("residual diagnostics") {
    // exact fit
    Matrix X(20, 2);
    Vector y(20);
    for (int r = 0; r < 20; ++r) {
        X(r, 0) = 1;
        X(r, 1) = r;
        y(r) = 1 - 0.5 * r;
    }
    const auto d = make_design({"intercept", "ln_k"}, X, y);
    const auto fit = fit_ols(d);
    const auto rd = residual_diagnostics(fit, d);
    for (double e : rd.residuals) CHECK(std::abs(e) < 1e-12);
    CHECK(std::abs(rd.moments.mean) < 1e-12);
    CHECK(rd.moments.variance < 1e-24);
    CHECK(rd.hist.counts.size() == 30);
    CHECK(rd.ln_k.size() == 20);
    CHECK(rd.ln_assets_firm.empty());

    // symmetric errors
    std::normal_distribution<double> nrm;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        std::mt19937_64 gen(seed);
        const int n = 5000;
        Matrix Z(n, 2);
        Vector w(n);
        for (int r = 0; r < n; ++r) {
            Z(r, 0) = 1;
            Z(r, 1) = nrm(gen);
            w(r) = 2 + Z(r, 1) + nrm(gen);
        }
        const auto dz = make_design({"intercept", "ln_assets_firm"}, Z, w);
        const auto rz = residual_diagnostics(fit_ols(dz), dz);
        CHECK(std::abs(rz.moments.skewness) < 0.2);
        std::size_t total = 0;
        for (auto c : rz.hist.counts) total += c;
        CHECK(total == static_cast<std::size_t>(n));
    }
}

TEST_CASE("histogram edges") {
    const std::vector<double> v{0, 1, 2, 3, 4, 5};
    const auto h = histogram(v, 5);
    CHECK(h.edges.front() == 0.0);
    CHECK(h.edges.back() == 5.0);
    CHECK(h.counts == std::vector<std::size_t>{1, 1, 1, 1, 2});
}
