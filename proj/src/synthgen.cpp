#include "credtopo/synthgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>

#include "credtopo/errors.hpp"
#include "credtopo/ingest.hpp"
#include "credtopo/nullmodel.hpp"
#include "credtopo/rng.hpp"

namespace credtopo {

namespace {

// Stream identifiers; kept far from small sample indices.
constexpr std::uint64_t kFirmFitness = 0x5100000001ULL;
constexpr std::uint64_t kBankFitness = 0x5100000002ULL;
constexpr std::uint64_t kBankOrder = 0x5100000003ULL;
constexpr std::uint64_t kLinks = 0x5100000004ULL;
constexpr std::uint64_t kRepair = 0x5100000005ULL;
constexpr std::uint64_t kWeightNoise = 0x5100000006ULL;
constexpr std::uint64_t kBalanceNoise = 0x5100000007ULL;
constexpr std::uint64_t kFirmAttrs = 0x5100000008ULL;
constexpr std::uint64_t kBankAttrs = 0x5100000009ULL;
constexpr std::uint64_t kSearch = 0x510000000aULL;

double logistic(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

std::string padded(char prefix, std::size_t index, std::size_t total) {
    std::string digits = std::to_string(index + 1);
    const std::size_t width = std::to_string(total).size();
    return std::string(1, prefix) + std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

double parse_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        throw InvalidArgument("setting '" + key + "': not a number: '" + v + "'");
    return out;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        throw InvalidArgument("setting '" + key + "': not a non-negative integer: '" + v + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw InvalidArgument("setting '" + key + "': not a boolean: '" + v + "'");
}

}  // namespace

void GenConfig::validate() const {
    if (n_firms < 2 || n_banks < 2) throw InvalidArgument("generator needs at least 2 firms and 2 banks");
    if (!(target_density > 0.0 && target_density < 1.0))
        throw InvalidArgument("target density must lie in (0, 1)");
    if (!(firm_size.sigma > 0.0) || !(bank_size.sigma > 0.0))
        throw InvalidArgument("size dispersions must be positive");
    if (!(attachment_boost >= 0.0)) throw InvalidArgument("attachment boost must be >= 0");
    if (!(noise_sd >= 0.0) || !(balance_noise >= 0.0)) throw InvalidArgument("noise scales must be >= 0");
    if (!std::isfinite(fragmentation_penalty) || !std::isfinite(bank_coverage) ||
        !std::isfinite(attribute_loading) || !std::isfinite(firm_size.mu) || !std::isfinite(bank_size.mu))
        throw InvalidArgument("generator parameters must be finite");
    const std::size_t L = link_target();
    if (L == 0 || L >= n_firms * n_banks) throw InvalidArgument("link target outside (0, N_F N_B)");
    if (connect_all && L < std::max(n_firms, n_banks))
        throw InvalidArgument("link target too small to connect every node");
}

std::size_t GenConfig::link_target() const {
    if (target_links > 0) return target_links;
    return static_cast<std::size_t>(std::llround(target_density * static_cast<double>(n_firms * n_banks)));
}

Json to_json(const GenConfig& c) {
    Json j;
    j["n_firms"] = c.n_firms;
    j["n_banks"] = c.n_banks;
    j["seed"] = c.seed;
    j["firm_size_mu"] = c.firm_size.mu;
    j["firm_size_sigma"] = c.firm_size.sigma;
    j["bank_size_mu"] = c.bank_size.mu;
    j["bank_size_sigma"] = c.bank_size.sigma;
    j["target_density"] = c.target_density;
    j["target_links"] = c.target_links;
    j["attachment_boost"] = c.attachment_boost;
    j["fragmentation_penalty"] = c.fragmentation_penalty;
    j["noise_sd"] = c.noise_sd;
    j["balance_noise"] = c.balance_noise;
    j["bank_coverage"] = c.bank_coverage;
    j["attribute_loading"] = c.attribute_loading;
    j["connect_all"] = c.connect_all;
    return j;
}

void apply_setting(GenConfig& c, const std::string& key, const std::string& v) {
    if (key == "n_firms") c.n_firms = parse_unsigned(key, v);
    else if (key == "n_banks") c.n_banks = parse_unsigned(key, v);
    else if (key == "seed") c.seed = parse_unsigned(key, v);
    else if (key == "firm_size_mu") c.firm_size.mu = parse_double(key, v);
    else if (key == "firm_size_sigma") c.firm_size.sigma = parse_double(key, v);
    else if (key == "bank_size_mu") c.bank_size.mu = parse_double(key, v);
    else if (key == "bank_size_sigma") c.bank_size.sigma = parse_double(key, v);
    else if (key == "target_density") c.target_density = parse_double(key, v);
    else if (key == "target_links") c.target_links = parse_unsigned(key, v);
    else if (key == "attachment_boost") c.attachment_boost = parse_double(key, v);
    else if (key == "fragmentation_penalty") c.fragmentation_penalty = parse_double(key, v);
    else if (key == "noise_sd") c.noise_sd = parse_double(key, v);
    else if (key == "balance_noise") c.balance_noise = parse_double(key, v);
    else if (key == "bank_coverage") c.bank_coverage = parse_double(key, v);
    else if (key == "attribute_loading") c.attribute_loading = parse_double(key, v);
    else if (key == "connect_all") c.connect_all = parse_bool(key, v);
    else throw InvalidArgument("unknown generator setting '" + key + "'");
}

Json to_json(const GroundTruth& t) {
    Json j;
    j["config"] = to_json(t.config);
    j["z"] = number_json(t.z);
    j["delta"] = number_json(t.delta);
    j["realized_links"] = t.realized_links;
    j["realized_density"] = number_json(t.realized_density);
    j["repaired_links"] = t.repaired_links;
    j["mechanisms"] = {{"gamma_pa", t.config.attachment_boost},
                       {"gamma_frag", t.config.fragmentation_penalty},
                       {"noise_sd", t.config.noise_sd}};
    Json ff = Json::array(), bf = Json::array();
    for (double v : t.firm_fitness) ff.push_back(number_json(v));
    for (double v : t.bank_fitness) bf.push_back(number_json(v));
    j["firm_fitness"] = std::move(ff);
    j["bank_fitness"] = std::move(bf);
    j["bank_order"] = t.bank_order;
    return j;
}

namespace {

struct Formation {
    std::vector<std::uint8_t> link;  // row-major nf x nb
    std::size_t links = 0;
    std::size_t repaired = 0;
};

// One pass of sequential link formation at a given global shift.
Formation form_links(const GenConfig& c, const std::vector<double>& base_logit,
                     const std::vector<std::size_t>& order, double delta) {
    const std::size_t nf = c.n_firms, nb = c.n_banks;
    Formation f;
    f.link.assign(nf * nb, 0);
    std::vector<double> k(nf, 0.0), h(nb, 0.0);
    for (std::size_t j : order)
        for (std::size_t i = 0; i < nf; ++i) {
            double eta = base_logit[i * nb + j] + delta;
            if (c.attachment_boost > 0.0) eta += c.attachment_boost * std::log1p(k[i]);
            const double u = keyed_uniform(c.seed, kLinks, static_cast<std::uint32_t>(i),
                                           static_cast<std::uint32_t>(j));
            if (u < logistic(eta)) {
                f.link[i * nb + j] = 1;
                k[i] += 1.0;
                h[j] += 1.0;
                ++f.links;
            }
        }
    if (!c.connect_all) return f;

    // Isolated nodes take one partner, drawn with odds proportional to the
    // fitness odds (Gumbel-max over keyed uniforms).
    auto gumbel = [&](std::uint32_t a, std::uint32_t b, std::uint64_t side) {
        const double u = keyed_uniform(c.seed, kRepair + side, a, b);
        return -std::log(-std::log(std::max(u, 1e-300)));
    };
    for (std::size_t i = 0; i < nf; ++i) {
        if (k[i] > 0.0) continue;
        std::size_t best = 0;
        double best_score = -INFINITY;
        for (std::size_t j = 0; j < nb; ++j) {
            const double s = base_logit[i * nb + j] +
                             gumbel(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), 0);
            if (s > best_score) best_score = s, best = j;
        }
        f.link[i * nb + best] = 1;
        k[i] += 1.0;
        h[best] += 1.0;
        ++f.links;
        ++f.repaired;
    }
    for (std::size_t j = 0; j < nb; ++j) {
        if (h[j] > 0.0) continue;
        std::size_t best = 0;
        double best_score = -INFINITY;
        for (std::size_t i = 0; i < nf; ++i) {
            const double s = base_logit[i * nb + j] +
                             gumbel(static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(i), 1);
            if (s > best_score) best_score = s, best = i;
        }
        f.link[best * nb + j] = 1;
        k[best] += 1.0;
        h[j] += 1.0;
        ++f.links;
        ++f.repaired;
    }
    return f;
}

}  // namespace

Generated generate(const GenConfig& c) {
    c.validate();
    const std::size_t nf = c.n_firms, nb = c.n_banks;
    const std::size_t L_target = c.link_target();

    GroundTruth truth;
    truth.config = c;
    {
        CounterStream rf(c.seed, kFirmFitness);
        for (std::size_t i = 0; i < nf; ++i) truth.firm_fitness.push_back(rf.lognormal(c.firm_size.mu, c.firm_size.sigma));
        CounterStream rb(c.seed, kBankFitness);
        for (std::size_t j = 0; j < nb; ++j) truth.bank_fitness.push_back(rb.lognormal(c.bank_size.mu, c.bank_size.sigma));
    }
    const auto& x = truth.firm_fitness;
    const auto& y = truth.bank_fitness;
    truth.z = calibrate_z(x, y, static_cast<double>(L_target));

    truth.bank_order.resize(nb);
    std::iota(truth.bank_order.begin(), truth.bank_order.end(), std::size_t{0});
    {
        CounterStream ro(c.seed, kBankOrder);
        for (std::size_t q = nb - 1; q > 0; --q) std::swap(truth.bank_order[q], truth.bank_order[ro.below(q + 1)]);
    }

    std::vector<double> base_logit(nf * nb);
    const double lnz = std::log(truth.z);
    for (std::size_t i = 0; i < nf; ++i)
        for (std::size_t j = 0; j < nb; ++j) base_logit[i * nb + j] = lnz + std::log(x[i]) + std::log(y[j]);

    // Bisection on the global shift with common random numbers; keep the
    // shift whose link count is closest to the target.
    double lo = -40.0, hi = 40.0;
    Formation best = form_links(c, base_logit, truth.bank_order, 0.0);
    double best_delta = 0.0;
    auto distance = [&](std::size_t L) {
        return L > L_target ? L - L_target : L_target - L;
    };
    for (int it = 0; it < 100 && best.links != L_target; ++it) {
        const double mid = 0.5 * (lo + hi);
        Formation f = form_links(c, base_logit, truth.bank_order, mid);
        if (distance(f.links) < distance(best.links) ||
            (distance(f.links) == distance(best.links) && std::abs(mid) < std::abs(best_delta))) {
            best = f;
            best_delta = mid;
        }
        if (f.links < L_target) lo = mid;
        else hi = mid;
        if (hi - lo < 1e-12) break;
    }
    truth.delta = best_delta;
    truth.realized_links = best.links;
    truth.repaired_links = best.repaired;
    truth.realized_density = static_cast<double>(best.links) / static_cast<double>(nf * nb);
    if (best.links == 0 || best.links == nf * nb) throw DegenerateDensity(truth.realized_density);

    // Weights: dcGM value of the fitness model times the mechanism factor. The
    // fragmentation elasticity applies to the rest-of-world degree max(k - 1, 1),
    // the degree a loan-sizing row sees.
    double S = 0.0, T = 0.0;
    for (double v : x) S += v;
    for (double v : y) T += v;
    const double W = std::sqrt(S * T);
    std::vector<double> k(nf, 0.0);
    for (std::size_t i = 0; i < nf; ++i)
        for (std::size_t j = 0; j < nb; ++j) k[i] += best.link[i * nb + j];

    Matrix w = Matrix::Zero(static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(nb));
    CounterStream noise(c.seed, kWeightNoise);
    for (std::size_t i = 0; i < nf; ++i)
        for (std::size_t j = 0; j < nb; ++j) {
            if (!best.link[i * nb + j]) continue;
            const double zxy = truth.z * x[i] * y[j];
            const double p = zxy / (1.0 + zxy);
            const double dcgm = x[i] * y[j] / (W * p);
            const double eps = c.noise_sd > 0.0 ? noise.normal(0.0, c.noise_sd) : 0.0;
            w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                dcgm * std::exp(c.fragmentation_penalty * std::log(std::max(k[i] - 1.0, 1.0)) + eps);
        }

    std::vector<std::string> firm_ids, bank_ids;
    for (std::size_t i = 0; i < nf; ++i) firm_ids.push_back(padded('F', i, nf));
    for (std::size_t j = 0; j < nb; ++j) bank_ids.push_back(padded('B', j, nb));
    BipartiteNetwork net(firm_ids, bank_ids, w);
    const Strengths str = derived_strengths(net);

    // Size z-scores drive the optional attribute loading.
    auto zscores = [](const std::vector<double>& v) {
        std::vector<double> lv(v.size());
        double mean = 0.0;
        for (std::size_t q = 0; q < v.size(); ++q) mean += (lv[q] = std::log(v[q]));
        mean /= static_cast<double>(v.size());
        double var = 0.0;
        for (double a : lv) var += (a - mean) * (a - mean);
        const double sd = std::sqrt(var / static_cast<double>(v.size()));
        for (double& a : lv) a = sd > 0.0 ? (a - mean) / sd : 0.0;
        return lv;
    };
    const auto zf = zscores(x);
    const auto zb = zscores(y);
    const double load = c.attribute_loading;

    std::map<std::string, FirmAttributes> firm_attrs;
    CounterStream bal(c.seed, kBalanceNoise);
    CounterStream fa(c.seed, kFirmAttrs);
    for (std::size_t i = 0; i < nf; ++i) {
        FirmAttributes a;
        const double e = c.balance_noise > 0.0 ? bal.normal(0.0, c.balance_noise) : 0.0;
        a.balance_strength = str.firm[i] * std::exp(e);
        a.total_assets = x[i] * (T / W) * std::exp(fa.normal(1.0, 0.4));
        a.leverage = logistic(fa.normal(0.3, 0.8) + load * zf[i]);
        a.roa = fa.normal(3.0, 4.0) + 2.0 * load * zf[i];
        a.tangibility = logistic(fa.normal(-0.5, 1.0) + load * zf[i]);
        firm_attrs.emplace(firm_ids[i], a);
    }
    std::map<std::string, BankAttributes> bank_attrs;
    CounterStream ba(c.seed, kBankAttrs);
    for (std::size_t j = 0; j < nb; ++j) {
        BankAttributes a;
        const double e = c.balance_noise > 0.0 ? ba.normal(0.0, c.balance_noise) : 0.0;
        a.balance_strength = str.bank[j] * std::exp(c.bank_coverage + e);
        a.total_assets = y[j] * (S / W) * std::exp(ba.normal(2.0, 0.3));
        a.leverage = logistic(ba.normal(2.3, 0.3) + load * zb[j]);
        a.roa = ba.normal(0.5, 0.5) + 0.5 * load * zb[j];
        bank_attrs.emplace(bank_ids[j], a);
    }

    Generated g{Sample{std::move(net), std::move(firm_attrs), std::move(bank_attrs),
                       "synthetic-" + std::to_string(c.seed)},
                std::move(truth)};
    validate(g.sample);
    return g;
}

void write_generated(const Generated& g, const std::filesystem::path& dir) {
    write_sample(g.sample, dir);
    std::ofstream out(dir / "ground_truth.json");
    if (!out) throw InvalidArgument("cannot write ground_truth.json in '" + dir.string() + "'");
    out << to_json(g.truth).dump(2) << '\n';
}

TopologyTarget consolidated_targets() { return {0.07, 4.34, 7.97, 0.75, 1.83}; }

double max_relative_error(const SummaryStats& s, const TopologyTarget& t) {
    auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
    return std::max({rel(s.density, t.density), rel(s.mean_firm_degree, t.mean_firm_degree),
                     rel(s.mean_bank_degree, t.mean_bank_degree), rel(s.cv_firm, t.cv_firm),
                     rel(s.cv_bank, t.cv_bank)});
}

TopologyFit calibrate_topology(GenConfig base, const TopologyTarget& target, double tolerance,
                               std::size_t max_trials) {
    const double nf = static_cast<double>(base.n_firms), nb = static_cast<double>(base.n_banks);
    // Link count balancing the two mean-degree targets (and the density).
    std::size_t best_L = 1;
    double best_L_err = INFINITY;
    const double guess = 0.5 * (target.mean_firm_degree * nf + target.mean_bank_degree * nb);
    for (auto L = static_cast<std::size_t>(std::max(1.0, guess - 20)); L <= static_cast<std::size_t>(guess + 20); ++L) {
        SummaryStats s;
        s.density = static_cast<double>(L) / (nf * nb);
        s.mean_firm_degree = static_cast<double>(L) / nf;
        s.mean_bank_degree = static_cast<double>(L) / nb;
        s.cv_firm = target.cv_firm;
        s.cv_bank = target.cv_bank;
        const double e = max_relative_error(s, target);
        if (e < best_L_err) best_L_err = e, best_L = L;
    }
    base.target_links = best_L;
    base.target_density = static_cast<double>(best_L) / (nf * nb);

    TopologyFit fit;
    fit.max_rel_error = INFINITY;
    CounterStream search(base.seed, kSearch);
    for (std::size_t t = 0; t < max_trials; ++t) {
        GenConfig c = base;
        c.firm_size.sigma = search.uniform(0.2, 2.5);
        c.bank_size.sigma = search.uniform(0.5, 4.0);
        c.seed = base.seed + t;
        std::optional<Generated> g;
        try {
            g.emplace(generate(c));
        } catch (const Error&) {
            continue;
        }
        const SummaryStats s = summarize(g->sample.network);
        const double e = max_relative_error(s, target);
        if (e < fit.max_rel_error) {
            fit.config = c;
            fit.stats = s;
            fit.max_rel_error = e;
        }
        fit.trials = t + 1;
        if (e <= tolerance) break;
    }
    fit.within_tolerance = fit.max_rel_error <= tolerance;
    return fit;
}

}  // namespace credtopo
