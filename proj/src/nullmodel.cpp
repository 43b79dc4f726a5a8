#include "credtopo/nullmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "credtopo/errors.hpp"

namespace credtopo {

namespace {

// Neumaier compensated accumulator.
struct CompensatedSum {
    double sum = 0.0;
    double c = 0.0;
    void add(double v) noexcept {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            c += (sum - t) + v;
        else
            c += (v - t) + sum;
        sum = t;
    }
    double value() const noexcept { return sum + c; }
};

void check_fitness(std::span<const double> v, const char* side, bool allow_zero) {
    for (std::size_t k = 0; k < v.size(); ++k) {
        const double x = v[k];
        if (!std::isfinite(x) || x < 0.0 || (x == 0.0 && !allow_zero))
            throw NonpositiveFitness(std::string(side) + " fitness at position " +
                                     std::to_string(k) + " is not positive");
    }
}

double total(std::span<const double> v) {
    CompensatedSum acc;
    for (double x : v) acc.add(x);
    return acc.value();
}

}  // namespace

const char* to_string(FitnessVariant v) noexcept {
    return v == FitnessVariant::NetworkDriven ? "NetworkDriven" : "BalanceDriven";
}

const char* to_string(NullKind k) noexcept {
    switch (k) {
        case NullKind::NetworkDriven: return "NetworkDriven";
        case NullKind::BalanceDriven: return "BalanceDriven";
        case NullKind::Bicm: return "BiCM";
        case NullKind::Random: return "Random";
    }
    return "?";
}

NullKind parse_null_kind(const std::string& name) {
    std::string n;
    for (char c : name) n += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (n == "networkdriven" || n == "net" || n == "nullnet") return NullKind::NetworkDriven;
    if (n == "balancedriven" || n == "bal" || n == "nullbal") return NullKind::BalanceDriven;
    if (n == "bicm") return NullKind::Bicm;
    if (n == "random" || n == "rand") return NullKind::Random;
    throw InvalidArgument("unknown null model '" + name + "'");
}

double calibrate_z(std::span<const double> s, std::span<const double> t, double L_target,
                   bool allow_zero) {
    check_fitness(s, "firm", allow_zero);
    check_fitness(t, "bank", allow_zero);

    std::vector<double> products;
    products.reserve(s.size() * t.size());
    for (double si : s)
        if (si > 0.0)
            for (double tj : t)
                if (tj > 0.0) products.push_back(si * tj);
    const double capacity = static_cast<double>(products.size());
    if (!(L_target > 0.0) || !(L_target < capacity))
        throw TargetOutOfRange("target link count " + std::to_string(L_target) +
                               " outside (0, " + std::to_string(capacity) + ")");

    auto expected = [&](double log_z, double* slope) {
        const double z = std::exp(log_z);
        CompensatedSum sum, dsum;
        for (double st : products) {
            const double x = z * st;
            const double p = x / (1.0 + x);
            sum.add(p);
            if (slope) dsum.add(p * (1.0 - p));
        }
        if (slope) *slope = dsum.value();
        return sum.value();
    };

    double lo = std::log(1e-18);
    double hi = 0.0;
    while (expected(hi, nullptr) <= L_target) hi += std::log(2.0);
    while (expected(lo, nullptr) >= L_target) lo -= std::log(2.0);

    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (expected(mid, nullptr) < L_target)
            lo = mid;
        else
            hi = mid;
    }

    // Newton on log z; sum(p) is convex-concave in log z but the bracket
    // already sits at the root, so a few steps reach machine precision.
    double log_z = 0.5 * (lo + hi);
    double best = log_z;
    double slope = 0.0;
    double best_gap = std::abs(expected(log_z, &slope) - L_target);
    for (int it = 0; it < 20 && best_gap > 1e-15 * L_target; ++it) {
        const double gap = expected(log_z, &slope) - L_target;
        if (slope <= 0.0) break;
        log_z -= gap / slope;
        const double new_gap = std::abs(expected(log_z, nullptr) - L_target);
        if (new_gap < best_gap) {
            best_gap = new_gap;
            best = log_z;
        } else {
            break;
        }
    }
    return std::exp(best);
}

FitnessSpec make_fitness_spec(std::vector<double> s, std::vector<double> t, double L_target,
                              FitnessVariant variant) {
    FitnessSpec spec;
    spec.z = calibrate_z(s, t, L_target, true);
    spec.S = total(s);
    spec.T = total(t);
    if (variant == FitnessVariant::NetworkDriven) {
        if (std::abs(spec.S - spec.T) > 1e-12 * std::max(spec.S, spec.T))
            throw InvalidArgument("network-driven fitness needs equal firm and bank totals");
        spec.T = spec.S;
        spec.W = spec.S;
    } else {
        spec.W = std::sqrt(spec.S * spec.T);
    }
    spec.firm_fitness = std::move(s);
    spec.bank_fitness = std::move(t);
    spec.variant = variant;
    spec.target_links = L_target;
    return spec;
}

FitnessSpec fitness_from_sample(const Sample& sample, FitnessVariant variant) {
    const auto& net = sample.network;
    std::vector<double> s, t;
    if (variant == FitnessVariant::NetworkDriven) {
        auto str = derived_strengths(net);
        s = std::move(str.firm);
        t = std::move(str.bank);
    } else {
        for (const auto& a : sample.firms_in_order()) s.push_back(a.balance_strength);
        for (const auto& a : sample.banks_in_order()) t.push_back(a.balance_strength);
    }
    return make_fitness_spec(std::move(s), std::move(t), static_cast<double>(net.link_count()),
                             variant);
}

double link_probability(const FitnessSpec& spec, std::size_t i, std::size_t j) noexcept {
    const double x = spec.z * spec.firm_fitness[i] * spec.bank_fitness[j];
    return x / (1.0 + x);
}

double dcgm_weight(const FitnessSpec& spec, std::size_t i, std::size_t j) noexcept {
    const double p = link_probability(spec, i, j);
    if (p <= 0.0) return 0.0;
    return spec.firm_fitness[i] * spec.bank_fitness[j] / (spec.W * p);
}

double expected_link_count(const FitnessSpec& spec) {
    CompensatedSum acc;
    for (std::size_t i = 0; i < spec.n_firms(); ++i)
        for (std::size_t j = 0; j < spec.n_banks(); ++j) acc.add(link_probability(spec, i, j));
    return acc.value();
}

ExpectedMetrics expected_metrics(const FitnessSpec& spec) {
    const std::size_t nf = spec.n_firms(), nb = spec.n_banks();
    ExpectedMetrics m;
    m.firm_degree.assign(nf, 0.0);
    m.bank_degree.assign(nb, 0.0);
    m.weight.resize(static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(nb));
    std::vector<CompensatedSum> col(nb);
    for (std::size_t i = 0; i < nf; ++i) {
        CompensatedSum row;
        for (std::size_t j = 0; j < nb; ++j) {
            const double p = link_probability(spec, i, j);
            row.add(p);
            col[j].add(p);
            m.weight(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                spec.firm_fitness[i] * spec.bank_fitness[j] / spec.W;
        }
        m.firm_degree[i] = row.value();
    }
    for (std::size_t j = 0; j < nb; ++j) m.bank_degree[j] = col[j].value();
    for (double s : spec.firm_fitness) m.firm_strength.push_back(s * (spec.T / spec.W));
    for (double t : spec.bank_fitness) m.bank_strength.push_back(t * (spec.S / spec.W));
    return m;
}

// ---- BiCM ---------------------------------------------------------------

double BicmSpec::probability(std::size_t i, std::size_t j) const noexcept {
    return prob(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
}

namespace {

struct DegreeClasses {
    std::vector<int> degree;
    std::vector<double> multiplicity;
    std::vector<std::size_t> class_of;  // per member of the reduced set
};

DegreeClasses group_by_degree(const std::vector<int>& remaining,
                              const std::vector<std::size_t>& members) {
    std::map<int, std::size_t> index;
    DegreeClasses dc;
    for (std::size_t m : members) {
        const int d = remaining[m];
        auto [it, inserted] = index.emplace(d, dc.degree.size());
        if (inserted) {
            dc.degree.push_back(d);
            dc.multiplicity.push_back(0.0);
        }
        dc.multiplicity[it->second] += 1.0;
        dc.class_of.push_back(it->second);
    }
    return dc;
}

}  // namespace

BicmSpec solve_bicm(std::span<const int> k, std::span<const int> h, BicmOptions opts) {
    const std::size_t nf = k.size(), nb = h.size();
    if (nf == 0 || nb == 0) throw NonGraphicalTargets("empty degree sequence");
    long long sum_k = 0, sum_h = 0;
    for (int d : k) {
        if (d < 0 || static_cast<std::size_t>(d) > nb)
            throw NonGraphicalTargets("firm degree outside [0, N_B]");
        sum_k += d;
    }
    for (int d : h) {
        if (d < 0 || static_cast<std::size_t>(d) > nf)
            throw NonGraphicalTargets("bank degree outside [0, N_F]");
        sum_h += d;
    }
    if (sum_k != sum_h)
        throw NonGraphicalTargets("sum of firm degrees " + std::to_string(sum_k) +
                                  " != sum of bank degrees " + std::to_string(sum_h));

    // fixed(i, j): -1 free, otherwise the pinned probability.
    Matrix fixed = Matrix::Constant(static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(nb), -1.0);
    std::vector<int> kr(k.begin(), k.end()), hr(h.begin(), h.end());
    std::vector<double> x(nf, 0.0), y(nb, 0.0);
    std::vector<bool> in_f(nf, true), in_b(nb, true);

    auto pin_firm = [&](std::size_t i, double value) {
        for (std::size_t j = 0; j < nb; ++j)
            if (in_b[j]) fixed(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value;
        in_f[i] = false;
    };
    auto pin_bank = [&](std::size_t j, double value) {
        for (std::size_t i = 0; i < nf; ++i)
            if (in_f[i]) fixed(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value;
        in_b[j] = false;
    };

    // Peel empty and saturated nodes until the remaining problem is interior.
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < nf; ++i)
            if (in_f[i] && kr[i] == 0) {
                pin_firm(i, 0.0);
                changed = true;
            }
        for (std::size_t j = 0; j < nb; ++j)
            if (in_b[j] && hr[j] == 0) {
                pin_bank(j, 0.0);
                changed = true;
            }
        const auto n_b = static_cast<int>(std::count(in_b.begin(), in_b.end(), true));
        for (std::size_t i = 0; i < nf; ++i) {
            if (!in_f[i]) continue;
            if (kr[i] > n_b) throw NonGraphicalTargets("firm degree exceeds available banks");
            if (kr[i] == n_b) {
                for (std::size_t j = 0; j < nb; ++j)
                    if (in_b[j] && --hr[j] < 0) throw NonGraphicalTargets("bank degree exhausted");
                pin_firm(i, 1.0);
                x[i] = std::numeric_limits<double>::infinity();
                changed = true;
            }
        }
        const auto n_f = static_cast<int>(std::count(in_f.begin(), in_f.end(), true));
        for (std::size_t j = 0; j < nb; ++j) {
            if (!in_b[j]) continue;
            if (hr[j] > n_f) throw NonGraphicalTargets("bank degree exceeds available firms");
            if (hr[j] == n_f && n_f > 0) {
                for (std::size_t i = 0; i < nf; ++i)
                    if (in_f[i] && --kr[i] < 0) throw NonGraphicalTargets("firm degree exhausted");
                pin_bank(j, 1.0);
                y[j] = std::numeric_limits<double>::infinity();
                changed = true;
            }
        }
    }

    std::vector<std::size_t> free_f, free_b;
    for (std::size_t i = 0; i < nf; ++i)
        if (in_f[i]) free_f.push_back(i);
    for (std::size_t j = 0; j < nb; ++j)
        if (in_b[j]) free_b.push_back(j);

    BicmSpec spec;
    if (!free_f.empty() && !free_b.empty()) {
        const auto fc = group_by_degree(kr, free_f);
        const auto bc = group_by_degree(hr, free_b);
        const std::size_t nfc = fc.degree.size(), nbc = bc.degree.size();

        double links = 0.0;
        for (std::size_t c = 0; c < nfc; ++c) links += fc.degree[c] * fc.multiplicity[c];
        std::vector<double> xc(nfc), yc(nbc);
        for (std::size_t c = 0; c < nfc; ++c) xc[c] = fc.degree[c] / std::sqrt(links);
        for (std::size_t c = 0; c < nbc; ++c) yc[c] = bc.degree[c] / std::sqrt(links);

        auto residual = [&]() {
            double worst = 0.0;
            std::vector<double> col(nbc, 0.0);
            for (std::size_t a = 0; a < nfc; ++a) {
                double row = 0.0;
                for (std::size_t b = 0; b < nbc; ++b) {
                    const double p = xc[a] * yc[b] / (1.0 + xc[a] * yc[b]);
                    row += bc.multiplicity[b] * p;
                    col[b] += fc.multiplicity[a] * p;
                }
                worst = std::max(worst, std::abs(row - fc.degree[a]));
            }
            for (std::size_t b = 0; b < nbc; ++b)
                worst = std::max(worst, std::abs(col[b] - bc.degree[b]));
            return worst;
        };

        double res = residual();
        std::size_t it = 0;
        std::vector<double> xn(nfc), yn(nbc);
        while (res >= opts.tolerance) {
            if (it >= opts.max_iterations) throw NoConvergence(it, res);
            for (std::size_t a = 0; a < nfc; ++a) {
                double denom = 0.0;
                for (std::size_t b = 0; b < nbc; ++b)
                    denom += bc.multiplicity[b] * yc[b] / (1.0 + xc[a] * yc[b]);
                xn[a] = fc.degree[a] / denom;
            }
            for (std::size_t b = 0; b < nbc; ++b) {
                double denom = 0.0;
                for (std::size_t a = 0; a < nfc; ++a)
                    denom += fc.multiplicity[a] * xc[a] / (1.0 + xc[a] * yc[b]);
                yn[b] = bc.degree[b] / denom;
            }
            for (std::size_t a = 0; a < nfc; ++a)
                xc[a] = opts.damping * xc[a] + (1.0 - opts.damping) * xn[a];
            for (std::size_t b = 0; b < nbc; ++b)
                yc[b] = opts.damping * yc[b] + (1.0 - opts.damping) * yn[b];
            ++it;
            res = residual();
        }
        spec.iterations = it;
        for (std::size_t m = 0; m < free_f.size(); ++m) x[free_f[m]] = xc[fc.class_of[m]];
        for (std::size_t m = 0; m < free_b.size(); ++m) y[free_b[m]] = yc[bc.class_of[m]];
    }

    spec.firm_multipliers = x;
    spec.bank_multipliers = y;
    spec.firm_targets.assign(k.begin(), k.end());
    spec.bank_targets.assign(h.begin(), h.end());

    // Residual against the original targets, including pinned pairs.
    spec.prob.resize(static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(nb));
    std::vector<double> col(nb, 0.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < nf; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < nb; ++j) {
            const double f = fixed(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            const double p = f >= 0.0 ? f : x[i] * y[j] / (1.0 + x[i] * y[j]);
            spec.prob(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = p;
            row += p;
            col[j] += p;
        }
        worst = std::max(worst, std::abs(row - k[i]));
    }
    for (std::size_t j = 0; j < nb; ++j) worst = std::max(worst, std::abs(col[j] - h[j]));
    spec.max_residual = worst;
    return spec;
}

ConstantModel random_baseline(const BipartiteNetwork& net) {
    if (net.link_count() == 0) throw EmptyNetwork();
    return {net.n_firms(), net.n_banks(), net.density()};
}

// ---- materialised models ------------------------------------------------

namespace {

Matrix dcgm_link_weights(const Matrix& prob, const FitnessSpec& w) {
    Matrix out(prob.rows(), prob.cols());
    for (Eigen::Index i = 0; i < prob.rows(); ++i)
        for (Eigen::Index j = 0; j < prob.cols(); ++j) {
            const double p = prob(i, j);
            out(i, j) = p > 0.0 ? w.firm_fitness[static_cast<std::size_t>(i)] *
                                      w.bank_fitness[static_cast<std::size_t>(j)] / (w.W * p)
                                : 0.0;
        }
    return out;
}

void check_shape(std::size_t nf, std::size_t nb, const FitnessSpec& w) {
    if (w.n_firms() != nf || w.n_banks() != nb)
        throw InvalidArgument("weight fitness does not match the topology model's shape");
}

}  // namespace

NullModel make_null_model(const FitnessSpec& spec) {
    NullModel m;
    m.kind = spec.variant == FitnessVariant::NetworkDriven ? NullKind::NetworkDriven
                                                           : NullKind::BalanceDriven;
    m.prob.resize(static_cast<Eigen::Index>(spec.n_firms()), static_cast<Eigen::Index>(spec.n_banks()));
    m.link_weight.resize(m.prob.rows(), m.prob.cols());
    for (std::size_t i = 0; i < spec.n_firms(); ++i)
        for (std::size_t j = 0; j < spec.n_banks(); ++j) {
            m.prob(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = link_probability(spec, i, j);
            m.link_weight(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = dcgm_weight(spec, i, j);
        }
    m.weights_from = spec;
    return m;
}

NullModel make_null_model(const BicmSpec& bicm, const FitnessSpec& weights_from) {
    const std::size_t nf = bicm.firm_multipliers.size(), nb = bicm.bank_multipliers.size();
    check_shape(nf, nb, weights_from);
    NullModel m;
    m.kind = NullKind::Bicm;
    m.prob.resize(static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(nb));
    for (std::size_t i = 0; i < nf; ++i)
        for (std::size_t j = 0; j < nb; ++j)
            m.prob(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = bicm.probability(i, j);
    m.link_weight = dcgm_link_weights(m.prob, weights_from);
    m.weights_from = weights_from;
    return m;
}

NullModel make_null_model(const ConstantModel& model, const FitnessSpec& weights_from) {
    check_shape(model.n_firms, model.n_banks, weights_from);
    NullModel m;
    m.kind = NullKind::Random;
    m.prob = Matrix::Constant(static_cast<Eigen::Index>(model.n_firms),
                              static_cast<Eigen::Index>(model.n_banks), model.density);
    m.link_weight = dcgm_link_weights(m.prob, weights_from);
    m.weights_from = weights_from;
    return m;
}

NullModel build_null_model(const Sample& sample, NullKind kind) {
    switch (kind) {
        case NullKind::NetworkDriven:
            return make_null_model(fitness_from_sample(sample, FitnessVariant::NetworkDriven));
        case NullKind::BalanceDriven:
            return make_null_model(fitness_from_sample(sample, FitnessVariant::BalanceDriven));
        case NullKind::Bicm: {
            const auto deg = derived_degrees(sample.network);
            return make_null_model(solve_bicm(deg.firm, deg.bank),
                                   fitness_from_sample(sample, FitnessVariant::NetworkDriven));
        }
        case NullKind::Random:
            return make_null_model(random_baseline(sample.network),
                                   fitness_from_sample(sample, FitnessVariant::NetworkDriven));
    }
    throw InvalidArgument("unknown null model kind");
}

ExpectedMetrics expected_metrics(const NullModel& model) {
    ExpectedMetrics m;
    m.weight = model.prob.cwiseProduct(model.link_weight);
    for (Eigen::Index i = 0; i < model.prob.rows(); ++i) {
        m.firm_degree.push_back(model.prob.row(i).sum());
        m.firm_strength.push_back(m.weight.row(i).sum());
    }
    for (Eigen::Index j = 0; j < model.prob.cols(); ++j) {
        m.bank_degree.push_back(model.prob.col(j).sum());
        m.bank_strength.push_back(m.weight.col(j).sum());
    }
    return m;
}

}  // namespace credtopo
