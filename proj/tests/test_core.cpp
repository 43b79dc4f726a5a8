#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "credtopo/errors.hpp"
#include "credtopo/network.hpp"
#include "credtopo/rng.hpp"

using namespace credtopo;

namespace {

BipartiteNetwork small() {
    Matrix w(2, 2);
    w << 1, 0, 2, 3;
    return BipartiteNetwork({"F1", "F2"}, {"B1", "B2"}, w);
}

Matrix random_weights(std::mt19937_64& gen, int nf, int nb, double density) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix w = Matrix::Zero(nf, nb);
    for (int i = 0; i < nf; ++i)
        for (int j = 0; j < nb; ++j)
            if (u(gen) < density) w(i, j) = std::exp(10.0 * u(gen));
    return w;
}

std::vector<std::string> ids(char prefix, int n) {
    std::vector<std::string> out;
    for (int q = 0; q < n; ++q) out.push_back(prefix + std::to_string(q));
    return out;
}

}  // namespace

TEST_CASE("degrees and strengths of the 2x2 example") {
    const auto net = small();
    const auto d = derived_degrees(net);
    const auto s = derived_strengths(net);
    CHECK(d.firm == std::vector<int>{1, 2});
    CHECK(d.bank == std::vector<int>{2, 1});
    CHECK(s.firm == std::vector<double>{1, 5});
    CHECK(s.bank == std::vector<double>{3, 3});
    CHECK(net.link_count() == 3);
    CHECK(net.density() == doctest::Approx(0.75));
}

TEST_CASE("empty networks") {
    const BipartiteNetwork one({"F"}, {"B"}, Matrix::Zero(1, 1));
    CHECK(derived_degrees(one).firm == std::vector<int>{0});
    CHECK(derived_degrees(one).bank == std::vector<int>{0});

    const BipartiteNetwork zero(ids('F', 3), ids('B', 4), Matrix::Zero(3, 4));
    const auto s = derived_strengths(zero);
    CHECK(std::all_of(s.firm.begin(), s.firm.end(), [](double v) { return v == 0.0; }));
    CHECK(std::all_of(s.bank.begin(), s.bank.end(), [](double v) { return v == 0.0; }));
    CHECK(zero.link_count() == 0);
}

TEST_CASE("construction rejects invalid input") {
    CHECK_THROWS_AS(BipartiteNetwork({}, {"B"}, Matrix::Zero(0, 1)), InvalidNetwork);
    CHECK_THROWS_AS(BipartiteNetwork({"F", "F"}, {"B"}, Matrix::Zero(2, 1)), InvalidNetwork);
    CHECK_THROWS_AS(BipartiteNetwork({"F"}, {""}, Matrix::Zero(1, 1)), InvalidNetwork);
    CHECK_THROWS_AS(BipartiteNetwork({"F"}, {"B"}, Matrix::Zero(2, 1)), InvalidNetwork);
    Matrix neg = Matrix::Zero(1, 1);
    neg(0, 0) = -1.0;
    CHECK_THROWS_AS(BipartiteNetwork({"F"}, {"B"}, neg), InvalidNetwork);
    Matrix nan = Matrix::Zero(1, 1);
    nan(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(BipartiteNetwork({"F"}, {"B"}, nan), InvalidNetwork);
}

TEST_CASE("strengths match brute-force sums on a 100-link fixture") {
    std::mt19937_64 gen(11);
    Matrix w = Matrix::Zero(20, 15);
    std::vector<int> cells(300);
    std::iota(cells.begin(), cells.end(), 0);
    std::shuffle(cells.begin(), cells.end(), gen);
    std::uniform_real_distribution<double> u(0.5, 1000.0);
    for (int q = 0; q < 100; ++q) w(cells[q] / 15, cells[q] % 15) = u(gen);
    const BipartiteNetwork net(ids('F', 20), ids('B', 15), w);
    REQUIRE(net.link_count() == 100);

    const auto s = derived_strengths(net);
    for (int i = 0; i < 20; ++i) {
        double row = 0.0;
        for (int j = 0; j < 15; ++j) row += w(i, j);
        CHECK(s.firm[i] == doctest::Approx(row).epsilon(1e-15));
    }
    for (int j = 0; j < 15; ++j) {
        double col = 0.0;
        for (int i = 0; i < 20; ++i) col += w(i, j);
        CHECK(s.bank[j] == doctest::Approx(col).epsilon(1e-15));
    }
}

TEST_CASE("degree and strength duality on random networks") {
    std::mt19937_64 gen(3);
    for (int rep = 0; rep < 50; ++rep) {
        const int nf = 1 + static_cast<int>(gen() % 30), nb = 1 + static_cast<int>(gen() % 20);
        const BipartiteNetwork net(ids('F', nf), ids('B', nb), random_weights(gen, nf, nb, 0.2));
        const auto d = derived_degrees(net);
        const auto s = derived_strengths(net);
        const long kf = std::accumulate(d.firm.begin(), d.firm.end(), 0L);
        const long kb = std::accumulate(d.bank.begin(), d.bank.end(), 0L);
        CHECK(kf == kb);
        CHECK(static_cast<std::size_t>(kf) == net.link_count());
        CHECK(net.link_count() <= static_cast<std::size_t>(nf * nb));
        const double sf = std::accumulate(s.firm.begin(), s.firm.end(), 0.0);
        const double sb = std::accumulate(s.bank.begin(), s.bank.end(), 0.0);
        CHECK(sf == doctest::Approx(sb).epsilon(1e-12));
        // adjacency is a view of the weights
        const Matrix a = net.adjacency();
        for (int i = 0; i < nf; ++i)
            for (int j = 0; j < nb; ++j) CHECK((a(i, j) == 1.0) == (net.weight(i, j) > 0.0));
    }
}

TEST_CASE("degrees and strengths are permutation equivariant") {
    std::mt19937_64 gen(5);
    const int nf = 12, nb = 9;
    const Matrix w = random_weights(gen, nf, nb, 0.3);
    std::vector<int> pf(nf), pb(nb);
    std::iota(pf.begin(), pf.end(), 0);
    std::iota(pb.begin(), pb.end(), 0);
    std::shuffle(pf.begin(), pf.end(), gen);
    std::shuffle(pb.begin(), pb.end(), gen);
    Matrix wp(nf, nb);
    std::vector<std::string> fid, bid;
    for (int i = 0; i < nf; ++i) fid.push_back("F" + std::to_string(pf[i]));
    for (int j = 0; j < nb; ++j) bid.push_back("B" + std::to_string(pb[j]));
    for (int i = 0; i < nf; ++i)
        for (int j = 0; j < nb; ++j) wp(i, j) = w(pf[i], pb[j]);

    const BipartiteNetwork a(ids('F', nf), ids('B', nb), w), b(fid, bid, wp);
    const auto da = derived_degrees(a), db = derived_degrees(b);
    const auto sa = derived_strengths(a), sb = derived_strengths(b);
    for (int i = 0; i < nf; ++i) {
        CHECK(db.firm[i] == da.firm[pf[i]]);
        CHECK(sb.firm[i] == doctest::Approx(sa.firm[pf[i]]).epsilon(1e-15));
        CHECK(b.firm_index("F" + std::to_string(pf[i])) == static_cast<std::size_t>(i));
    }
    for (int j = 0; j < nb; ++j) {
        CHECK(db.bank[j] == da.bank[pb[j]]);
        CHECK(sb.bank[j] == doctest::Approx(sa.bank[pb[j]]).epsilon(1e-15));
    }
}

TEST_CASE("attribute invariants") {
    FirmAttributes f;
    f.total_assets = 10.0;
    f.tangibility = 0.5;
    CHECK_NOTHROW(validate(f, "F"));
    f.tangibility = 1.5;
    CHECK_THROWS_AS(validate(f, "F"), InvalidArgument);
    f.tangibility = 0.5;
    f.total_assets = 0.0;
    CHECK_THROWS_AS(validate(f, "F"), InvalidArgument);
    f.total_assets = 1.0;
    f.roa = -12.0;  // negative ROA is allowed
    CHECK_NOTHROW(validate(f, "F"));
    f.leverage = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(validate(f, "F"), InvalidArgument);

    BankAttributes b;
    CHECK_NOTHROW(validate(b, "B"));
    b.total_assets = -1.0;
    CHECK_THROWS_AS(validate(b, "B"), InvalidArgument);
}

TEST_CASE("sample coverage is checked both ways") {
    Sample s{small(), {{"F1", {}}, {"F2", {}}}, {{"B1", {}}, {"B2", {}}}, "toy"};
    CHECK_NOTHROW(validate(s));
    s.firm_attrs.erase("F2");
    CHECK_THROWS_AS(validate(s), MissingAttribute);
    s.firm_attrs["F2"] = {};
    s.bank_attrs["B9"] = {};
    CHECK_THROWS_AS(validate(s), InvalidArgument);
}

TEST_CASE("Philox4x32-10 known-answer vectors") {
    using P = Philox4x32;
    CHECK(P::block({0, 0, 0, 0}, {0, 0}) == P::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(P::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          P::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(P::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          P::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("keyed draws are pure functions of their address") {
    CHECK(keyed_uniform(42, 7, 3, 5) == keyed_uniform(42, 7, 3, 5));
    std::set<double> distinct;
    for (std::uint32_t i = 0; i < 10; ++i)
        for (std::uint32_t j = 0; j < 10; ++j) {
            const double u = keyed_uniform(42, 7, i, j);
            CHECK(u >= 0.0);
            CHECK(u < 1.0);
            distinct.insert(u);
        }
    CHECK(distinct.size() == 100);
    CHECK(keyed_uniform(42, 7, 3, 5) != keyed_uniform(43, 7, 3, 5));
    CHECK(keyed_uniform(42, 7, 3, 5) != keyed_uniform(42, 8, 3, 5));
}

TEST_CASE("counter stream moments and reproducibility") {
    CounterStream a(9, 1), b(9, 1), c(9, 2);
    bool differs = false;
    for (int q = 0; q < 100; ++q) {
        const auto x = a(), y = b(), z = c();
        CHECK(x == y);
        differs = differs || x != z;
    }
    CHECK(differs);

    CounterStream s(1, 0);
    const int n = 200000;
    double sum = 0.0, sq = 0.0, usum = 0.0;
    for (int q = 0; q < n; ++q) {
        const double v = s.normal();
        sum += v;
        sq += v * v;
        usum += s.uniform();
    }
    CHECK(std::abs(sum / n) < 4.0 / std::sqrt(n));
    CHECK(std::abs(sq / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(usum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));

    std::vector<int> counts(7, 0);
    for (int q = 0; q < 70000; ++q) ++counts[s.below(7)];
    for (int c7 : counts) CHECK(std::abs(c7 - 10000) < 500);
}
