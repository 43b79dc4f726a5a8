#include "credtopo/netstats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "credtopo/errors.hpp"
#include "credtopo/rng.hpp"

namespace credtopo {

namespace {

// Population coefficient of variation; 0 when the mean is 0.
double coefficient_of_variation(const std::vector<int>& v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    if (mean == 0.0) return 0.0;
    double ss = 0.0;
    for (int x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / n) / mean;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

bool is_constant(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

double precision_from_order(const std::vector<std::size_t>& order, const BipartiteNetwork& net) {
    const std::size_t L = net.link_count();
    const std::size_t nb = net.n_banks();
    std::size_t hits = 0;
    for (std::size_t r = 0; r < L; ++r)
        if (net.linked(order[r] / nb, order[r] % nb)) ++hits;
    return static_cast<double>(hits) / static_cast<double>(L);
}

void check_prob_shape(const Matrix& prob, const BipartiteNetwork& net) {
    if (static_cast<std::size_t>(prob.rows()) != net.n_firms() ||
        static_cast<std::size_t>(prob.cols()) != net.n_banks())
        throw InvalidArgument("probability matrix shape does not match the network");
    if (net.link_count() == 0) throw EmptyNetwork();
}

}  // namespace

SummaryStats summarize(const BipartiteNetwork& net) {
    const auto deg = derived_degrees(net);
    SummaryStats s;
    s.n_firms = net.n_firms();
    s.n_banks = net.n_banks();
    s.links = net.link_count();
    s.density = net.density();
    s.mean_firm_degree = static_cast<double>(s.links) / static_cast<double>(s.n_firms);
    s.mean_bank_degree = static_cast<double>(s.links) / static_cast<double>(s.n_banks);
    s.cv_firm = coefficient_of_variation(deg.firm);
    s.cv_bank = coefficient_of_variation(deg.bank);
    return s;
}

CcdfCurve ccdf(std::span<const double> values) {
    if (values.empty()) throw EmptyInput("ccdf of an empty sequence");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    CcdfCurve out;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        if (k > 0 && sorted[k] == sorted[k - 1]) continue;
        out.x.push_back(sorted[k]);
        out.survival.push_back(static_cast<double>(sorted.size() - k) / n);
    }
    return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw InvalidArgument("pearson needs two sequences of equal length >= 2");
    if (is_constant(x) || is_constant(y)) throw ConstantSequence();
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
        syy += (y[k] - my) * (y[k] - my);
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    std::size_t k = 0;
    while (k < order.size()) {
        std::size_t end = k;
        while (end + 1 < order.size() && values[order[end + 1]] == values[order[k]]) ++end;
        const double avg = 0.5 * static_cast<double>(k + end) + 1.0;
        for (std::size_t r = k; r <= end; ++r) ranks[order[r]] = avg;
        k = end + 1;
    }
    return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw InvalidArgument("spearman needs two sequences of equal length >= 2");
    if (is_constant(x) || is_constant(y)) throw ConstantSequence();
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    return pearson(rx, ry);
}

ComparisonStats compare(std::span<const double> empirical, std::span<const double> expected,
                        std::size_t n_bins) {
    if (empirical.size() != expected.size() || empirical.size() < 2)
        throw InvalidArgument("compare needs two sequences of equal length >= 2");
    if (n_bins == 0) throw InvalidArgument("compare needs at least one bin");

    ComparisonStats out;
    if (!is_constant(empirical) && !is_constant(expected)) {
        out.pearson = pearson(empirical, expected);
        out.spearman = spearman(empirical, expected);
    }

    const auto [mn, mx] = std::minmax_element(empirical.begin(), empirical.end());
    const double lo = *mn;
    const double width = (*mx - *mn) / static_cast<double>(n_bins);
    std::vector<std::vector<double>> members(n_bins);
    for (std::size_t k = 0; k < empirical.size(); ++k) {
        std::size_t b = 0;
        if (width > 0.0)
            b = std::min(n_bins - 1, static_cast<std::size_t>((empirical[k] - lo) / width));
        members[b].push_back(expected[k]);
    }
    for (std::size_t b = 0; b < n_bins; ++b) {
        ComparisonBin bin;
        bin.lower = lo + width * static_cast<double>(b);
        bin.upper = b + 1 == n_bins ? *mx : lo + width * static_cast<double>(b + 1);
        auto& m = members[b];
        bin.count = m.size();
        if (!m.empty()) {
            const double n = static_cast<double>(m.size());
            const double mean = std::accumulate(m.begin(), m.end(), 0.0) / n;
            double ss = 0.0;
            for (double v : m) ss += (v - mean) * (v - mean);
            std::sort(m.begin(), m.end());
            bin.mean = mean;
            bin.sd = std::sqrt(ss / n);
            bin.q05 = quantile_sorted(m, 0.05);
            bin.q95 = quantile_sorted(m, 0.95);
        }
        out.bins.push_back(bin);
    }
    return out;
}

double rmsre(std::span<const double> empirical, std::span<const double> model) {
    if (empirical.size() != model.size()) throw InvalidArgument("rmsre length mismatch");
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t k = 0; k < empirical.size(); ++k) {
        if (empirical[k] == 0.0) continue;
        const double rel = (model[k] - empirical[k]) / empirical[k];
        sum += rel * rel;
        ++used;
    }
    if (used == 0) throw NoValidEntries();
    return std::sqrt(sum / static_cast<double>(used));
}

double precision_at_L(const Matrix& prob, const BipartiteNetwork& net) {
    check_prob_shape(prob, net);
    const std::size_t nb = net.n_banks();
    std::vector<std::size_t> order(net.n_firms() * nb);
    std::iota(order.begin(), order.end(), 0);
    // Row-major index order is the lexicographic (i, j) order.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return prob(a / nb, a % nb) > prob(b / nb, b % nb);
    });
    return precision_from_order(order, net);
}

double precision_at_L(const Matrix& prob, const BipartiteNetwork& net, std::uint64_t tie_seed) {
    check_prob_shape(prob, net);
    const std::size_t nb = net.n_banks();
    std::vector<std::size_t> order(net.n_firms() * nb);
    std::iota(order.begin(), order.end(), 0);
    CounterStream rng(tie_seed, 0x7469655F62726Bull);
    for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return prob(a / nb, a % nb) > prob(b / nb, b % nb);
    });
    return precision_from_order(order, net);
}

}  // namespace credtopo
