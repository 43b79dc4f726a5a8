#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "credtopo/errors.hpp"
#include "credtopo/ingest.hpp"
#include "credtopo/netstats.hpp"
#include "credtopo/nullmodel.hpp"
#include "credtopo/synthgen.hpp"

using namespace credtopo;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("credtopo_synth_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

bool same_sample(const Sample& a, const Sample& b) {
    if (a.network.firm_ids() != b.network.firm_ids() || a.network.bank_ids() != b.network.bank_ids()) return false;
    if (!(a.network.weights().array() == b.network.weights().array()).all()) return false;
    for (const auto& [id, fa] : a.firm_attrs) {
        const auto& fb = b.firm_attrs.at(id);
        if (fa.balance_strength != fb.balance_strength || fa.total_assets != fb.total_assets ||
            fa.leverage != fb.leverage || fa.roa != fb.roa || fa.tangibility != fb.tangibility)
            return false;
    }
    for (const auto& [id, ba] : a.bank_attrs) {
        const auto& bb = b.bank_attrs.at(id);
        if (ba.balance_strength != bb.balance_strength || ba.total_assets != bb.total_assets ||
            ba.leverage != bb.leverage || ba.roa != bb.roa)
            return false;
    }
    return true;
}

}  // namespace

TEST_CASE("generation is reproducible from config and seed") {
    GenConfig c;
    c.seed = 77;
    c.attachment_boost = 0.5;
    c.fragmentation_penalty = -0.5;
    const auto a = generate(c), b = generate(c);
    CHECK(same_sample(a.sample, b.sample));
    CHECK(a.truth.bank_order == b.truth.bank_order);
    CHECK(a.truth.delta == b.truth.delta);
    c.seed = 78;
    CHECK_FALSE(same_sample(a.sample, generate(c).sample));
}

TEST_CASE("the realised link count hits the target") {
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
        GenConfig c;
        c.seed = seed;
        c.attachment_boost = seed % 2 ? 0.8 : 0.0;
        const auto g = generate(c);
        // the repair step can make the count jump past the target by one
        const auto L = static_cast<long>(c.link_target());
        CHECK(std::labs(static_cast<long>(g.truth.realized_links) - L) <= 1);
        CHECK(g.sample.network.link_count() == g.truth.realized_links);
        const auto d = derived_degrees(g.sample.network);
        CHECK(*std::min_element(d.firm.begin(), d.firm.end()) >= 1);
        CHECK(*std::min_element(d.bank.begin(), d.bank.end()) >= 1);
    }
    GenConfig c;
    CHECK(c.link_target() == static_cast<std::size_t>(std::lround(0.07 * 113 * 61)));
    c.target_links = 500;
    CHECK(c.link_target() == 500);
}

TEST_CASE("pure fitness draws are recovered by the calibrated fitness model") {
    GenConfig c;
    c.n_firms = 200;
    c.n_banks = 80;
    c.noise_sd = 0.0;
    c.balance_noise = 0.0;
    for (std::uint64_t seed : {1, 2, 3}) {
        c.seed = seed;
        const auto g = generate(c);
        const auto m = expected_metrics(fitness_from_sample(g.sample, FitnessVariant::NetworkDriven));
        const auto d = derived_degrees(g.sample.network);
        const std::vector<double> k(d.firm.begin(), d.firm.end());
        CHECK(pearson(m.firm_degree, k) > 0.9);
    }
}

TEST_CASE("weights follow the injected mechanism") {
    GenConfig c;
    c.seed = 5;
    c.noise_sd = 0.0;
    c.fragmentation_penalty = -1.0;
    const auto g = generate(c);
    const auto& t = g.truth;
    double S = 0, T = 0;
    for (double v : t.firm_fitness) S += v;
    for (double v : t.bank_fitness) T += v;
    const double W = std::sqrt(S * T);
    const auto d = derived_degrees(g.sample.network);
    for (std::size_t i = 0; i < c.n_firms; ++i)
        for (std::size_t j = 0; j < c.n_banks; ++j) {
            if (!g.sample.network.linked(i, j)) continue;
            const double zxy = t.z * t.firm_fitness[i] * t.bank_fitness[j];
            const double dcgm = t.firm_fitness[i] * t.bank_fitness[j] * (1 + zxy) / (W * zxy);
            const double expect = dcgm / std::max(d.firm[i] - 1.0, 1.0);
            CHECK(g.sample.network.weight(i, j) == doctest::Approx(expect).epsilon(1e-12));
        }
}

TEST_CASE("balance strengths track network strengths") {
    GenConfig c;
    c.seed = 6;
    c.balance_noise = 0.0;
    c.bank_coverage = 0.5;
    const auto g = generate(c);
    const auto str = derived_strengths(g.sample.network);
    const auto firms = g.sample.firms_in_order();
    const auto banks = g.sample.banks_in_order();
    for (std::size_t i = 0; i < c.n_firms; ++i) CHECK(firms[i].balance_strength == str.firm[i]);
    for (std::size_t j = 0; j < c.n_banks; ++j)
        CHECK(banks[j].balance_strength == doctest::Approx(str.bank[j] * std::exp(0.5)).epsilon(1e-14));
    for (const auto& f : firms) {
        CHECK(f.tangibility >= 0.0);
        CHECK(f.tangibility <= 1.0);
        CHECK(f.total_assets > 0.0);
    }
}

TEST_CASE("generated samples survive a CSV round trip and the filter") {
    GenConfig c;
    c.seed = 9;
    const auto g = generate(c);
    const auto dir = scratch("roundtrip");
    write_generated(g, dir);
    for (const char* f : {"edges.csv", "firms.csv", "banks.csv", "ground_truth.json"}) CHECK(fs::exists(dir / f));
    const Sample back = parse_sample(dir / "edges.csv", dir / "firms.csv", dir / "banks.csv", "back");
    CHECK(back.network.firm_ids() == g.sample.network.firm_ids());
    CHECK(back.network.link_count() == g.sample.network.link_count());
    CHECK((back.network.weights() - g.sample.network.weights()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(apply_consistency_filter(back, {}).report.dropped_firms.empty());

    std::ifstream in(dir / "ground_truth.json");
    const auto j = nlohmann::json::parse(in);
    CHECK(j["realized_links"].get<std::size_t>() == g.truth.realized_links);
    CHECK(j["firm_fitness"].size() == c.n_firms);
    CHECK(j["bank_order"].size() == c.n_banks);
    CHECK(j["mechanisms"]["gamma_pa"].get<double>() == 0.0);
    CHECK(j["config"]["seed"].get<std::uint64_t>() == 9);
    fs::remove_all(dir);
}

TEST_CASE("configuration validation and settings") {
    GenConfig c;
    c.target_density = 0.0;
    CHECK_THROWS_AS(generate(c), InvalidArgument);
    c = GenConfig{};
    c.n_firms = 1;
    CHECK_THROWS_AS(generate(c), InvalidArgument);
    c = GenConfig{};
    c.attachment_boost = -1.0;
    CHECK_THROWS_AS(generate(c), InvalidArgument);
    c = GenConfig{};
    c.n_firms = 100;
    c.n_banks = 10;
    c.target_links = 50;  // fewer links than firms with connect_all
    CHECK_THROWS_AS(generate(c), InvalidArgument);

    GenConfig s;
    apply_setting(s, "n_firms", "40");
    apply_setting(s, "attachment_boost", "0.8");
    apply_setting(s, "connect_all", "false");
    apply_setting(s, "firm_size_sigma", "0.5");
    CHECK(s.n_firms == 40);
    CHECK(s.attachment_boost == 0.8);
    CHECK_FALSE(s.connect_all);
    CHECK(s.firm_size.sigma == 0.5);
    CHECK_THROWS_AS(apply_setting(s, "n_firms", "-3"), InvalidArgument);
    CHECK_THROWS_AS(apply_setting(s, "noise", "1"), InvalidArgument);
    CHECK_THROWS_AS(apply_setting(s, "noise_sd", "abc"), InvalidArgument);
}

TEST_CASE("topology targets") {
    const auto t = consolidated_targets();
    CHECK(t.density == 0.07);
    CHECK(t.mean_firm_degree == 4.34);
    CHECK(t.mean_bank_degree == 7.97);
    CHECK(t.cv_firm == 0.75);
    CHECK(t.cv_bank == 1.83);
    SummaryStats s;
    s.density = 0.07;
    s.mean_firm_degree = 4.34;
    s.mean_bank_degree = 7.97;
    s.cv_firm = 0.75 * 1.01;
    s.cv_bank = 1.83;
    CHECK(max_relative_error(s, t) == doctest::Approx(0.01));
}
