#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <tuple>

#include "credtopo/errors.hpp"
#include "credtopo/netstats.hpp"
#include "credtopo/report.hpp"

using namespace credtopo;

namespace {

std::vector<std::string> ids(char prefix, int n) {
    std::vector<std::string> out;
    for (int q = 0; q < n; ++q) out.push_back(prefix + std::to_string(q));
    return out;
}

BipartiteNetwork random_net(std::mt19937_64& gen, int nf, int nb, double d) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix w = Matrix::Zero(nf, nb);
    for (int i = 0; i < nf; ++i)
        for (int j = 0; j < nb; ++j)
            if (u(gen) < d) w(i, j) = 1.0 + 100.0 * u(gen);
    return BipartiteNetwork(ids('F', nf), ids('B', nb), w);
}

double oracle_pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t q = 0; q < x.size(); ++q) {
        sxy += (x[q] - mx) * (y[q] - my);
        sxx += (x[q] - mx) * (x[q] - mx);
        syy += (y[q] - my) * (y[q] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

// Average ranks by brute force: rank = 1 + #{smaller} + (#{equal} - 1) / 2.
std::vector<double> oracle_ranks(const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t a = 0; a < v.size(); ++a) {
        double less = 0, equal = 0;
        for (double b : v) {
            less += b < v[a];
            equal += b == v[a];
        }
        r[a] = 1.0 + less + (equal - 1.0) / 2.0;
    }
    return r;
}

// Top-L by (-p, i, j), counted directly.
double oracle_precision(const Matrix& p, const BipartiteNetwork& net) {
    std::vector<std::tuple<double, long, long>> pairs;
    for (long i = 0; i < p.rows(); ++i)
        for (long j = 0; j < p.cols(); ++j) pairs.emplace_back(-p(i, j), i, j);
    std::sort(pairs.begin(), pairs.end());
    double hits = 0;
    for (std::size_t q = 0; q < net.link_count(); ++q) hits += net.linked(std::get<1>(pairs[q]), std::get<2>(pairs[q]));
    return hits / static_cast<double>(net.link_count());
}

}  // namespace

TEST_CASE("summary of the 2x2 example") {
    Matrix w(2, 2);
    w << 1, 0, 2, 3;
    const auto s = summarize(BipartiteNetwork({"F1", "F2"}, {"B1", "B2"}, w));
    CHECK(s.density == 0.75);
    CHECK(s.mean_firm_degree == 1.5);
    CHECK(s.mean_bank_degree == 1.5);
    CHECK(s.cv_firm == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(s.cv_bank == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("complete and empty networks") {
    const auto c = summarize(BipartiteNetwork(ids('F', 4), ids('B', 3), Matrix::Constant(4, 3, 2.0)));
    CHECK(c.density == 1.0);
    CHECK(c.cv_firm == 0.0);
    CHECK(c.cv_bank == 0.0);
    const auto e = summarize(BipartiteNetwork(ids('F', 4), ids('B', 3), Matrix::Zero(4, 3)));
    CHECK(e.density == 0.0);
    CHECK(e.cv_firm == 0.0);
    CHECK(e.cv_bank == 0.0);
}

TEST_CASE("summary invariants and permutation invariance") {
    std::mt19937_64 gen(8);
    for (int rep = 0; rep < 30; ++rep) {
        const int nf = 3 + static_cast<int>(gen() % 40), nb = 2 + static_cast<int>(gen() % 20);
        const auto net = random_net(gen, nf, nb, 0.15);
        const auto s = summarize(net);
        CHECK(s.density >= 0.0);
        CHECK(s.density <= 1.0);
        CHECK(s.mean_firm_degree * nf == doctest::Approx(static_cast<double>(net.link_count())));
        CHECK(s.mean_bank_degree * nb == doctest::Approx(static_cast<double>(net.link_count())));
        CHECK(s.cv_firm >= 0.0);
        CHECK(s.cv_bank >= 0.0);

        std::vector<int> pf(nf), pb(nb);
        std::iota(pf.begin(), pf.end(), 0);
        std::iota(pb.begin(), pb.end(), 0);
        std::shuffle(pf.begin(), pf.end(), gen);
        std::shuffle(pb.begin(), pb.end(), gen);
        Matrix wp(nf, nb);
        for (int i = 0; i < nf; ++i)
            for (int j = 0; j < nb; ++j) wp(i, j) = net.weight(pf[i], pb[j]);
        const auto t = summarize(BipartiteNetwork(ids('F', nf), ids('B', nb), wp));
        CHECK(t.links == s.links);
        CHECK(t.density == s.density);
        CHECK(t.cv_firm == doctest::Approx(s.cv_firm).epsilon(1e-13));
        CHECK(t.cv_bank == doctest::Approx(s.cv_bank).epsilon(1e-13));
    }
}

TEST_CASE("ccdf examples") {
    const std::vector<double> a{1, 1, 2};
    const auto c = ccdf(a);
    CHECK(c.x == std::vector<double>{1, 2});
    CHECK(c.survival[0] == 1.0);
    CHECK(c.survival[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    const std::vector<double> b{5, 5};
    const auto d = ccdf(b);
    CHECK(d.x == std::vector<double>{5});
    CHECK(d.survival == std::vector<double>{1.0});

    CHECK_THROWS_AS(ccdf(std::vector<double>{}), EmptyInput);
}

TEST_CASE("ccdf matches a sort-and-count oracle on geometric draws") {
    std::mt19937_64 gen(21);
    std::geometric_distribution<int> geo(0.2);
    std::vector<double> v(1000);
    for (double& x : v) x = geo(gen);
    const auto c = ccdf(v);

    std::map<double, int> counts;
    for (double x : v) ++counts[x];
    REQUIRE(c.x.size() == counts.size());
    std::size_t q = 0;
    for (const auto& [value, _] : counts) {
        std::size_t ge = 0;
        for (double x : v) ge += x >= value;
        CHECK(c.x[q] == value);
        CHECK(c.survival[q] == static_cast<double>(ge) / 1000.0);
        if (q) CHECK(c.survival[q] <= c.survival[q - 1]);
        CHECK(c.survival[q] > 0.0);
        ++q;
    }
    CHECK(c.survival.front() == 1.0);
}

TEST_CASE("correlation examples") {
    const std::vector<double> x{1, 5, 2, 8, 3};
    const auto same = compare(x, x, 3);
    CHECK(*same.pearson == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(*same.spearman == doctest::Approx(1.0).epsilon(1e-15));

    std::vector<double> rev(x.size());
    for (std::size_t q = 0; q < x.size(); ++q) rev[q] = -x[q];
    CHECK(*compare(x, rev, 3).spearman == doctest::Approx(-1.0).epsilon(1e-15));

    const std::vector<double> flat{2, 2, 2, 2, 2};
    CHECK_THROWS_AS(pearson(x, flat), ConstantSequence);
    CHECK_THROWS_AS(spearman(flat, x), ConstantSequence);
    const auto absent = compare(x, flat, 3);
    CHECK_FALSE(absent.pearson.has_value());
    CHECK_FALSE(absent.spearman.has_value());

    CHECK_THROWS_AS(compare(std::vector<double>{1}, std::vector<double>{1}, 3), InvalidArgument);
    CHECK_THROWS_AS(compare(x, std::vector<double>{1, 2}, 3), InvalidArgument);
}

TEST_CASE("correlations match rank-then-Pearson oracles on 50 random pairs") {
    std::mt19937_64 gen(4);
    std::uniform_int_distribution<int> small(0, 9);  // plenty of ties
    std::normal_distribution<double> nrm;
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> x(50), y(50);
        for (int q = 0; q < 50; ++q) {
            x[q] = rep % 2 ? small(gen) : nrm(gen);
            y[q] = 0.5 * x[q] + (rep % 2 ? small(gen) : nrm(gen));
        }
        const auto c = compare(x, y);
        CHECK(std::abs(*c.pearson - oracle_pearson(x, y)) < 1e-12);
        CHECK(std::abs(*c.spearman - oracle_pearson(oracle_ranks(x), oracle_ranks(y))) < 1e-12);
        const auto r = average_ranks(x);
        const auto ro = oracle_ranks(x);
        for (int q = 0; q < 50; ++q) CHECK(r[q] == ro[q]);
    }
}

TEST_CASE("comparison bins partition the empirical range") {
    std::mt19937_64 gen(6);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    std::vector<double> e(200), m(200);
    for (int q = 0; q < 200; ++q) {
        e[q] = u(gen);
        m[q] = e[q] * 1.1 + u(gen) * 0.1;
    }
    const auto c = compare(e, m, 10);
    REQUIRE(c.bins.size() == 10);
    CHECK(c.bins.front().lower == *std::min_element(e.begin(), e.end()));
    CHECK(c.bins.back().upper == *std::max_element(e.begin(), e.end()));
    std::size_t total = 0;
    for (std::size_t b = 0; b < c.bins.size(); ++b) {
        total += c.bins[b].count;
        if (b) CHECK(c.bins[b].lower == c.bins[b - 1].upper);
        // oracle summary of the bin
        std::vector<double> in;
        for (int q = 0; q < 200; ++q) {
            const bool last = b + 1 == c.bins.size();
            if (e[q] >= c.bins[b].lower && (e[q] < c.bins[b].upper || (last && e[q] <= c.bins[b].upper)))
                in.push_back(m[q]);
        }
        CHECK(in.size() == c.bins[b].count);
        if (in.empty()) {
            CHECK_FALSE(c.bins[b].mean.has_value());
            continue;
        }
        const double mean = std::accumulate(in.begin(), in.end(), 0.0) / static_cast<double>(in.size());
        double var = 0.0;
        for (double v : in) var += (v - mean) * (v - mean);
        var /= static_cast<double>(in.size());
        CHECK(std::abs(*c.bins[b].mean - mean) < 1e-12);
        CHECK(std::abs(*c.bins[b].sd - std::sqrt(var)) < 1e-12);
        CHECK(*c.bins[b].q05 <= *c.bins[b].mean + 1e-12);
        CHECK(*c.bins[b].q95 >= *c.bins[b].mean - 1e-12);
    }
    CHECK(total == 200);
}

TEST_CASE("rmsre examples and properties") {
    const std::vector<double> a{2}, b{3};
    CHECK(rmsre(a, b) == 0.5);
    const std::vector<double> e{1, 2, 4}, m{2, 2, 2};
    CHECK(std::abs(rmsre(e, m) - std::sqrt(1.25 / 3.0)) < 1e-15);
    CHECK(std::abs(rmsre(e, m) - 0.6455) < 1e-4);

    // zero empirical entries are excluded
    const std::vector<double> ez{0, 2}, mz{5, 3};
    CHECK(rmsre(ez, mz) == 0.5);
    CHECK_THROWS_AS(rmsre(std::vector<double>{0, 0}, std::vector<double>{1, 1}), NoValidEntries);
    CHECK_THROWS_AS(rmsre(e, a), InvalidArgument);

    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> x(30), y(30), xs(30), ys(30);
        const double c = u(gen);
        for (int q = 0; q < 30; ++q) {
            x[q] = u(gen);
            y[q] = u(gen);
            xs[q] = c * x[q];
            ys[q] = c * y[q];
        }
        CHECK(rmsre(x, x) == 0.0);
        CHECK(std::abs(rmsre(xs, ys) - rmsre(x, y)) < 1e-12);
    }
}

TEST_CASE("precision at L") {
    std::mt19937_64 gen(10);
    for (int rep = 0; rep < 30; ++rep) {
        const auto net = random_net(gen, 15, 9, 0.2);
        if (net.link_count() == 0) continue;
        const Matrix a = net.adjacency();
        CHECK(precision_at_L(a, net) == 1.0);
        if (2 * net.link_count() <= 15 * 9) CHECK(precision_at_L((1.0 - a.array()).matrix(), net) == 0.0);

        // constant scores: the lexicographic rule is deterministic and equals the oracle count
        const Matrix flat = Matrix::Constant(15, 9, 0.2);
        CHECK(precision_at_L(flat, net) == oracle_precision(flat, net));

        // coarse scores with many ties
        Matrix coarse(15, 9);
        for (int i = 0; i < 15; ++i)
            for (int j = 0; j < 9; ++j) coarse(i, j) = static_cast<double>(gen() % 4) / 4.0;
        CHECK(precision_at_L(coarse, net) == oracle_precision(coarse, net));
        const double p = precision_at_L(coarse, net, 99);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        CHECK(precision_at_L(coarse, net, 99) == p);
    }
    CHECK_THROWS_AS(precision_at_L(Matrix::Zero(2, 2), BipartiteNetwork(ids('F', 2), ids('B', 2), Matrix::Zero(2, 2))),
                    EmptyNetwork);
    const BipartiteNetwork one(ids('F', 2), ids('B', 2), Matrix::Identity(2, 2));
    CHECK_THROWS_AS(precision_at_L(Matrix::Zero(3, 2), one), InvalidArgument);
}

TEST_CASE("random tie-break precision averages to the density") {
    std::mt19937_64 gen(12);
    const auto net = random_net(gen, 60, 30, 0.1);
    const Matrix flat = Matrix::Constant(60, 30, net.density());
    double mean = 0.0;
    for (std::uint64_t s = 1; s <= 200; ++s) mean += precision_at_L(flat, net, s);
    mean /= 200.0;
    // each draw is hypergeometric with sd ~ sqrt(d(1-d)/L)
    const double sd = std::sqrt(net.density() * (1 - net.density()) / static_cast<double>(net.link_count()));
    CHECK(std::abs(mean - net.density()) < 4.0 * sd / std::sqrt(200.0));
}

TEST_CASE("csv emitters") {
    const std::vector<double> v{1, 1, 2};
    CHECK(ccdf_csv(ccdf(v)) == "x,ccdf\n1,1\n2,0.3333333333333333\n");
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1e-300) == "1e-300");
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
}
