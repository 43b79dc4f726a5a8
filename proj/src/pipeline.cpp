#include "credtopo/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include "credtopo/diagnostics.hpp"
#include "credtopo/ensemble.hpp"
#include "credtopo/errors.hpp"
#include "credtopo/estimators.hpp"
#include "credtopo/netstats.hpp"
#include "credtopo/svg.hpp"

namespace credtopo {

namespace {

constexpr const char* kVersion = "1.0.0";

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
    T out{};
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        throw InvalidArgument("setting '" + key + "': invalid value '" + v + "'");
    return out;
}

bool parse_flag(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw InvalidArgument("setting '" + key + "': not a boolean: '" + v + "'");
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw InvalidArgument("cannot read '" + p.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void append_unique(std::vector<ModelSpec>& grid, const ModelSpec& spec) {
    const auto id = spec.id();
    for (const auto& g : grid)
        if (g.id() == id) return;
    grid.push_back(spec);
}

std::vector<ModelSpec> preset(const std::string& name) {
    std::vector<std::string> ids;
    auto stage_models = [&](const char* s) {
        for (const char* m : {"m1", "m2a", "m2b", "m3a", "m3b"}) ids.push_back(std::string(s) + "_" + m);
    };
    auto placebo = [&](const char* s) {
        for (const char* m : {"m3a", "m3a_nostr", "m3a_nullnet", "m3a_nullbal"}) ids.push_back(std::string(s) + "_" + m);
    };
    if (name == "stage1") stage_models("s1");
    else if (name == "stage2") stage_models("s2");
    else if (name == "placebo") placebo("s1"), placebo("s2");
    else if (name == "full" || name == "paper") {
        stage_models("s1");
        stage_models("s2");
        placebo("s1");
        placebo("s2");
        ids.push_back("s2_m3a_fe");
    } else {
        return {};
    }
    std::vector<ModelSpec> out;
    for (const auto& id : ids) append_unique(out, parse_model_spec(id));
    return out;
}

}  // namespace

std::vector<ModelSpec> parse_grid(const std::string& text) {
    std::vector<ModelSpec> grid;
    for (const auto& token : split(text, ',')) {
        std::string lower;
        for (char c : token) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        auto p = preset(lower);
        if (!p.empty()) {
            for (const auto& s : p) append_unique(grid, s);
        } else {
            append_unique(grid, parse_model_spec(token));
        }
    }
    if (grid.empty()) throw InvalidArgument("model grid is empty");
    return grid;
}

void RunConfig::validate() const {
    if (n_samples < 1) throw InvalidArgument("n_samples must be >= 1");
    if (grid.empty()) throw InvalidArgument("model grid is empty");
    if (!synth && (edges.empty() || firms.empty() || banks.empty()))
        throw InvalidArgument("inputs missing: give edges, firms and banks, or a synth configuration");
    if (synth) synth->validate();
    if (!(band.lower > 0.0 && band.lower <= band.upper)) throw InvalidArgument("invalid consistency band");
    if (comparison_bins < 1) throw InvalidArgument("comparison_bins must be >= 1");
    auto has = [&](NullKind k) { return std::find(null_models.begin(), null_models.end(), k) != null_models.end(); };
    for (const auto& s : grid) {
        s.validate();
        if (s.degree_source == DegreeSource::NullNet && !has(NullKind::NetworkDriven))
            throw InvalidArgument("grid cell " + s.id() + " needs the NetworkDriven null model");
        if (s.degree_source == DegreeSource::NullBal && !has(NullKind::BalanceDriven))
            throw InvalidArgument("grid cell " + s.id() + " needs the BalanceDriven null model");
    }
}

void apply_run_setting(RunConfig& c, const std::string& key, const std::string& value,
                       const std::filesystem::path& base_dir) {
    auto path = [&](const std::string& v) {
        std::filesystem::path p(v);
        return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    };
    if (key.rfind("synth.", 0) == 0) {
        if (!c.synth) c.synth = GenConfig{};
        apply_setting(*c.synth, key.substr(6), value);
    } else if (key == "synth") {
        if (parse_flag(key, value)) {
            if (!c.synth) c.synth = GenConfig{};
        } else {
            c.synth.reset();
        }
    } else if (key == "edges") c.edges = path(value);
    else if (key == "firms") c.firms = path(value);
    else if (key == "banks") c.banks = path(value);
    else if (key == "filter") c.apply_filter = parse_flag(key, value);
    else if (key == "filter_lower") c.band.lower = parse_number<double>(key, value);
    else if (key == "filter_upper") c.band.upper = parse_number<double>(key, value);
    else if (key == "null_models") {
        c.null_models.clear();
        for (const auto& t : split(value, ',')) {
            const NullKind k = parse_null_kind(t);
            if (std::find(c.null_models.begin(), c.null_models.end(), k) == c.null_models.end())
                c.null_models.push_back(k);
        }
    } else if (key == "samples") c.n_samples = parse_number<std::size_t>(key, value);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "grid") c.grid = parse_grid(value);
    else if (key == "comparison_bins") c.comparison_bins = parse_number<std::size_t>(key, value);
    else if (key == "out") c.out_dir = path(value);
    else if (key == "threads") c.threads = parse_number<unsigned>(key, value);
    else throw InvalidArgument("unknown run setting '" + key + "'");
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot read config '" + path.string() + "'");
    RunConfig c;
    const auto base = path.parent_path();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw MalformedRow(path.string(), lineno, "expected key = value");
        apply_run_setting(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), base);
    }
    return c;
}

Json config_json(const RunConfig& c) {
    Json j;
    if (c.synth) {
        j["synth"] = to_json(*c.synth);
    } else {
        j["inputs"] = {{"edges", c.edges.filename().string()},
                       {"firms", c.firms.filename().string()},
                       {"banks", c.banks.filename().string()}};
    }
    j["filter"] = c.apply_filter;
    j["band"] = {{"lower", c.band.lower}, {"upper", c.band.upper}};
    Json nm = Json::array();
    for (auto k : c.null_models) nm.push_back(to_string(k));
    j["null_models"] = std::move(nm);
    j["n_samples"] = c.n_samples;
    j["seed"] = c.seed;
    Json grid = Json::array();
    for (const auto& s : c.grid) grid.push_back(s.id());
    j["grid"] = std::move(grid);
    j["comparison_bins"] = c.comparison_bins;
    return j;
}

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw InvalidArgument("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int q = 0; q < len; ++q) {
        out += hex[md[q] >> 4];
        out += hex[md[q] & 0xf];
    }
    return out;
}

Sample load_sample(const RunConfig& c) {
    if (c.synth) return generate(*c.synth).sample;
    return parse_sample(c.edges, c.firms, c.banks, c.edges.parent_path().filename().string());
}

namespace {

struct Emitter {
    std::map<std::string, std::string> files;

    void text(const std::string& path, std::string content) {
        if (!files.emplace(path, std::move(content)).second)
            throw InvalidArgument("two outputs map to '" + path + "'");
    }
    void json(const std::string& path, const Json& j) { text(path, j.dump(2) + "\n"); }
};

std::vector<double> to_double(const std::vector<int>& v) { return {v.begin(), v.end()}; }

std::string metric_label(const std::string& m) {
    if (m == "k") return "firm degree k";
    if (m == "h") return "bank degree h";
    if (m == "s") return "firm strength s";
    return "bank strength t";
}

struct NullOutputs {
    std::optional<FitnessSpec> net;
    std::optional<FitnessSpec> bal;
};

std::string kind_token(NullKind k) {
    switch (k) {
        case NullKind::NetworkDriven: return "nullnet";
        case NullKind::BalanceDriven: return "nullbal";
        case NullKind::Bicm: return "bicm";
        case NullKind::Random: return "random";
    }
    return "unknown";
}

void emit_stats(Emitter& em, const Sample& raw, const Sample& sample) {
    Json j;
    j["raw"] = to_json(summarize(raw.network));
    j["filtered"] = to_json(summarize(sample.network));
    em.json("summary_stats.json", j);
    em.text("summary_stats.txt", summary_table(summarize(raw.network), "raw sample") + "\n" +
                                     summary_table(summarize(sample.network), "after consistency filter"));

    const auto deg = derived_degrees(sample.network);
    const auto str = derived_strengths(sample.network);
    std::vector<double> s_bal, t_bal;
    for (const auto& f : sample.firms_in_order()) s_bal.push_back(f.balance_strength);
    for (const auto& b : sample.banks_in_order()) t_bal.push_back(b.balance_strength);

    const std::vector<std::pair<std::string, std::vector<double>>> series{
        {"firm_degree", to_double(deg.firm)}, {"bank_degree", to_double(deg.bank)},
        {"firm_strength_net", str.firm},      {"bank_strength_net", str.bank},
        {"firm_strength_bal", s_bal},         {"bank_strength_bal", t_bal}};
    std::map<std::string, CcdfCurve> curves;
    for (const auto& [name, values] : series) {
        if (values.empty()) continue;
        curves.emplace(name, ccdf(values));
        em.text("ccdf/" + name + ".csv", ccdf_csv(curves.at(name)));
    }
    em.text("plots/ccdf_degrees.svg",
            svg_ccdf({{"firms (k)", curves.at("firm_degree")}, {"banks (h)", curves.at("bank_degree")}},
                     "Degree CCDF", "degree"));
    em.text("plots/ccdf_strengths.svg",
            svg_ccdf({{"firms, network", curves.at("firm_strength_net")},
                      {"firms, balance sheet", curves.at("firm_strength_bal")},
                      {"banks, network", curves.at("bank_strength_net")},
                      {"banks, balance sheet", curves.at("bank_strength_bal")}},
                     "Strength CCDF", "strength"));
}

// Builds one null model and its outputs. Returns false on failure.
void emit_null_model(Emitter& em, Json& benchmarks, const Sample& sample, NullKind kind, const RunConfig& c,
                     NullOutputs& fitted) {
    const NullModel model = build_null_model(sample, kind);
    const bool fitness_kind = kind == NullKind::NetworkDriven || kind == NullKind::BalanceDriven;
    const ExpectedMetrics exp = fitness_kind ? expected_metrics(model.weights_from) : expected_metrics(model);
    if (kind == NullKind::NetworkDriven) fitted.net = model.weights_from;
    if (kind == NullKind::BalanceDriven) fitted.bal = model.weights_from;

    const Ensemble ens = sample_ensemble(model, c.n_samples, c.seed, c.threads);
    const std::string tok = kind_token(kind);

    Json j;
    j["kind"] = to_string(kind);
    j["weights_from"] = to_json(model.weights_from);
    if (kind == NullKind::Bicm) {
        const auto deg = derived_degrees(sample.network);
        j["bicm"] = to_json(solve_bicm(deg.firm, deg.bank));
    }
    if (kind == NullKind::Random) j["density"] = number_json(sample.network.density());
    double expected_links = 0.0;
    for (double v : exp.firm_degree) expected_links += v;
    j["expected_links"] = number_json(expected_links);
    j["ensemble"] = {{"n_samples", ens.n_samples},
                     {"seed", ens.seed},
                     {"links_mean", number_json(ens.links.mean)},
                     {"links_sd", number_json(ens.links.sd())},
                     {"volume_mean", number_json(ens.volume.mean)},
                     {"volume_sd", number_json(ens.volume.sd())}};

    const auto deg = derived_degrees(sample.network);
    const auto str = derived_strengths(sample.network);
    const std::vector<std::pair<std::string, std::pair<std::vector<double>, std::vector<double>>>> metrics{
        {"k", {to_double(deg.firm), exp.firm_degree}},
        {"h", {to_double(deg.bank), exp.bank_degree}},
        {"s", {str.firm, exp.firm_strength}},
        {"t", {str.bank, exp.bank_strength}}};

    Json bench;
    Json comparisons;
    for (const auto& [m, pair] : metrics) {
        const auto& [emp, ex] = pair;
        const ComparisonStats cs = compare(emp, ex, c.comparison_bins);
        comparisons[m] = to_json(cs);
        em.text("comparison/" + tok + "_" + m + ".csv", comparison_csv(cs));
        em.text("comparison/" + tok + "_" + m + "_points.csv", pairs_csv("empirical", "expected", emp, ex));
        if (m == "k" || m == "s")
            em.text("plots/comparison_" + tok + "_" + m + ".svg",
                    svg_comparison(emp, ex, cs, to_string(kind) + std::string(": ") + metric_label(m),
                                   "empirical", "expected"));
        try {
            bench["rmsre_" + m] = number_json(rmsre(emp, ex));
        } catch (const NoValidEntries&) {
            bench["rmsre_" + m] = nullptr;
        }
    }
    j["comparison"] = std::move(comparisons);

    std::vector<double> w_emp, w_exp;
    for (Eigen::Index i = 0; i < exp.weight.rows(); ++i)
        for (Eigen::Index jj = 0; jj < exp.weight.cols(); ++jj) {
            w_emp.push_back(sample.network.weights()(i, jj));
            w_exp.push_back(exp.weight(i, jj));
        }
    try {
        bench["rmsre_w"] = number_json(rmsre(w_emp, w_exp));
    } catch (const NoValidEntries&) {
        bench["rmsre_w"] = nullptr;
    }
    bench["precision_at_L"] = number_json(kind == NullKind::Random ? precision_at_L(model.prob, sample.network, c.seed)
                                                                   : precision_at_L(model.prob, sample.network));
    bench["ensemble_mean_links"] = number_json(ens.links.mean);
    benchmarks[to_string(kind)] = std::move(bench);
    em.json("nullmodels/" + tok + ".json", j);

    // Per-node table with ensemble spread.
    std::string firms = "firm_id,k,k_expected,k_sd,s_net,s_expected,s_sd\n";
    for (std::size_t i = 0; i < sample.network.n_firms(); ++i)
        firms += sample.network.firm_ids()[i] + "," + std::to_string(deg.firm[i]) + "," +
                 format_double(exp.firm_degree[i]) + "," + format_double(ens.firm_degree[i].sd()) + "," +
                 format_double(str.firm[i]) + "," + format_double(exp.firm_strength[i]) + "," +
                 format_double(ens.firm_strength[i].sd()) + "\n";
    em.text("nullmodels/" + tok + "_firms.csv", firms);
    std::string banks = "bank_id,h,h_expected,h_sd,t_net,t_expected,t_sd\n";
    for (std::size_t jj = 0; jj < sample.network.n_banks(); ++jj)
        banks += sample.network.bank_ids()[jj] + "," + std::to_string(deg.bank[jj]) + "," +
                 format_double(exp.bank_degree[jj]) + "," + format_double(ens.bank_degree[jj].sd()) + "," +
                 format_double(str.bank[jj]) + "," + format_double(exp.bank_strength[jj]) + "," +
                 format_double(ens.bank_strength[jj].sd()) + "\n";
    em.text("nullmodels/" + tok + "_banks.csv", banks);
}

struct CellResult {
    ModelSpec spec;
    std::optional<FitResult> fit;
    std::optional<DesignMatrix> design;  // kept for diagnostics / VIF cells
    CellOutcome outcome;
};

CellResult run_cell(const Sample& sample, const ModelSpec& spec, const PlaceboInputs& placebo) {
    CellResult r;
    r.spec = spec;
    r.outcome.cell = spec.id();
    try {
        DesignMatrix d = build_design(sample, spec, placebo);
        if (spec.stage == Stage::LinkFormation) r.fit = fit_logit(d);
        else if (spec.fixed_effects == FixedEffects::BankDummies) r.fit = fit_ols_fixed_effects(d);
        else r.fit = fit_ols(d);
        if (spec.id() == "s2_m3a") r.design = std::move(d);
    } catch (const Error& e) {
        r.outcome.ok = false;
        r.outcome.error_kind = e.kind();
        r.outcome.message = spec.id() + ": " + e.what();
    }
    return r;
}

NullDegrees null_degrees(const FitnessSpec& f) {
    const ExpectedMetrics m = expected_metrics(f);
    return {m.firm_degree, m.bank_degree};
}

void emit_table(Emitter& em, const std::string& path, const std::string& heading,
                const std::vector<CellResult>& cells, const std::vector<std::string>& ids) {
    std::vector<FitResult> fits;
    for (const auto& id : ids)
        for (const auto& c : cells)
            if (c.spec.id() == id && c.fit) fits.push_back(*c.fit);
    if (fits.empty()) return;
    em.text(path, regression_table(fits, heading));
}

void emit_regressions(Emitter& em, const Sample& sample, const RunConfig& c, const NullOutputs& nulls,
                      std::vector<CellOutcome>& outcomes) {
    PlaceboInputs placebo;
    if (nulls.net) placebo.net = null_degrees(*nulls.net);
    if (nulls.bal) placebo.bal = null_degrees(*nulls.bal);

    std::vector<CellResult> cells(c.grid.size());
    unsigned threads = c.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : c.threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, c.grid.size()));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t q = next++; q < c.grid.size(); q = next++) cells[q] = run_cell(sample, c.grid[q], placebo);
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    for (const auto& cell : cells) {
        outcomes.push_back(cell.outcome);
        if (!cell.fit) continue;
        const std::string id = cell.spec.id();
        em.text("regressions/" + id + ".txt", regression_table({*cell.fit}, cell.spec.title() + " [" + id + "]"));
        em.json("regressions/" + id + ".json", to_json(*cell.fit));
    }

    for (const char* s : {"s1", "s2"}) {
        const std::string st(s);
        const std::string name = st == "s1" ? "Link formation (logit)" : "Loan sizing (OLS, ln w)";
        emit_table(em, "tables/" + st + "_models.txt", name,
                   cells, {st + "_m1", st + "_m2a", st + "_m2b", st + "_m3a", st + "_m3b"});
        emit_table(em, "tables/" + st + "_placebo.txt", name + ", placebo columns",
                   cells, {st + "_m3a", st + "_m3a_nostr", st + "_m3a_nullnet", st + "_m3a_nullbal"});
    }
    emit_table(em, "tables/s2_fixed_effects.txt", "Loan sizing with bank fixed effects", cells,
               {"s2_m3a", "s2_m3a_fe"});

    for (const auto& cell : cells) {
        if (!cell.design || !cell.fit) continue;
        try {
            em.json("vif.json", {{"model_id", cell.spec.id()}, {"vif", vif_json(vif(*cell.design))}});
        } catch (const Error& e) {
            outcomes.push_back({"vif", false, e.kind(), std::string("vif: ") + e.what()});
        }
        const ResidualDiagnostics rd = residual_diagnostics(*cell.fit, *cell.design);
        Json dj;
        dj["model_id"] = cell.spec.id();
        dj["n"] = rd.n;
        dj["mean"] = number_json(rd.moments.mean);
        dj["variance"] = number_json(rd.moments.variance);
        dj["skewness"] = number_json(rd.moments.skewness);
        dj["excess_kurtosis"] = number_json(rd.moments.excess_kurtosis);
        Json edges = Json::array();
        for (double e : rd.hist.edges) edges.push_back(number_json(e));
        dj["histogram"] = {{"edges", std::move(edges)}, {"counts", rd.hist.counts}};
        em.json("diagnostics/residuals.json", dj);
        std::string hist = "lower,upper,count\n";
        for (std::size_t b = 0; b < rd.hist.counts.size(); ++b)
            hist += format_double(rd.hist.edges[b]) + "," + format_double(rd.hist.edges[b + 1]) + "," +
                    std::to_string(rd.hist.counts[b]) + "\n";
        em.text("diagnostics/residual_histogram.csv", hist);
        em.text("plots/residual_histogram.svg", svg_histogram(rd.hist, "Loan sizing residuals", "residual"));
        if (!rd.ln_k.empty()) {
            em.text("diagnostics/residual_vs_ln_k.csv", pairs_csv("ln_k", "residual", rd.ln_k, rd.residuals));
            em.text("plots/residual_vs_ln_k.svg",
                    svg_scatter({"", rd.ln_k, rd.residuals}, "Residuals vs ln k", "ln k", "residual"));
        }
        if (!rd.ln_assets_firm.empty()) {
            em.text("diagnostics/residual_vs_ln_assets_firm.csv",
                    pairs_csv("ln_assets_firm", "residual", rd.ln_assets_firm, rd.residuals));
            em.text("plots/residual_vs_ln_assets_firm.svg",
                    svg_scatter({"", rd.ln_assets_firm, rd.residuals}, "Residuals vs ln firm assets",
                                "ln assets (firm)", "residual"));
        }
    }
}

}  // namespace

RunResult run(const RunConfig& c, StageSelection stages) {
    c.validate();
    Emitter em;
    Json inputs = Json::array();

    std::optional<Sample> raw;
    if (c.synth) {
        Generated g = generate(*c.synth);
        em.text("input/edges.csv", edges_csv(g.sample));
        em.text("input/firms.csv", firms_csv(g.sample));
        em.text("input/banks.csv", banks_csv(g.sample));
        em.json("input/ground_truth.json", to_json(g.truth));
        for (const char* f : {"edges.csv", "firms.csv", "banks.csv"})
            inputs.push_back({{"name", f}, {"sha256", sha256_hex(em.files.at(std::string("input/") + f))}});
        raw.emplace(std::move(g.sample));
    } else {
        for (const auto& p : {c.edges, c.firms, c.banks}) {
            const std::string bytes = read_file(p);
            inputs.push_back({{"name", p.filename().string()}, {"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}});
        }
        raw.emplace(parse_sample(c.edges, c.firms, c.banks, c.edges.parent_path().filename().string()));
    }
    validate(*raw);

    std::optional<Sample> sample;
    if (c.apply_filter) {
        FilteredSample fs = apply_consistency_filter(*raw, c.band);
        em.json("filter_report.json", to_json(fs.report));
        sample.emplace(std::move(fs.sample));
    } else {
        sample.emplace(*raw);
    }

    if (stages.stats) emit_stats(em, *raw, *sample);

    std::vector<CellOutcome> outcomes;
    NullOutputs nulls;
    if (stages.null_models) {
        Json benchmarks = Json::object();
        for (NullKind k : c.null_models) {
            try {
                emit_null_model(em, benchmarks, *sample, k, c, nulls);
                outcomes.push_back({std::string("nullmodel:") + to_string(k), true, "", ""});
            } catch (const Error& e) {
                outcomes.push_back({std::string("nullmodel:") + to_string(k), false, e.kind(),
                                    std::string("nullmodel ") + to_string(k) + ": " + e.what()});
            }
        }
        em.json("benchmarks.json", benchmarks);
    } else {
        // Placebo designs still need the fitness expectations.
        for (NullKind k : c.null_models) {
            if (k == NullKind::NetworkDriven)
                nulls.net = fitness_from_sample(*sample, FitnessVariant::NetworkDriven);
            if (k == NullKind::BalanceDriven)
                nulls.bal = fitness_from_sample(*sample, FitnessVariant::BalanceDriven);
        }
    }

    if (stages.regressions) emit_regressions(em, *sample, c, nulls, outcomes);

    const Json cfg = config_json(c);
    em.json("config.json", cfg);

    RunResult result;
    result.cells = outcomes;
    const bool partial = std::any_of(outcomes.begin(), outcomes.end(), [](const CellOutcome& o) { return !o.ok; });
    result.exit_code = partial ? 2 : 0;

    Json manifest;
    manifest["tool"] = "credtopo";
    manifest["version"] = kVersion;
    manifest["seed"] = c.seed;
    manifest["config_sha256"] = sha256_hex(cfg.dump());
    manifest["inputs"] = std::move(inputs);
    Json cells = Json::array();
    for (const auto& o : outcomes) {
        Json e{{"cell", o.cell}, {"ok", o.ok}};
        if (!o.ok) {
            e["error"] = o.error_kind;
            e["message"] = o.message;
        }
        cells.push_back(std::move(e));
    }
    manifest["cells"] = std::move(cells);
    manifest["status"] = partial ? "partial" : "ok";
    Json outputs = Json::object();
    for (const auto& [path, content] : em.files) outputs[path] = sha256_hex(content);
    manifest["outputs"] = std::move(outputs);
    em.json("manifest.json", manifest);

    std::filesystem::create_directories(c.out_dir);
    for (const auto& [rel, content] : em.files) {
        const auto path = c.out_dir / rel;
        std::filesystem::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary);
        if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
        out << content;
    }
    result.files = std::move(em.files);
    return result;
}

}  // namespace credtopo
