#include "credtopo/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

#include "credtopo/errors.hpp"
#include "credtopo/rng.hpp"

namespace credtopo {

void RunningStat::push(double x) noexcept {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
}

void RunningStat::merge(const RunningStat& other) noexcept {
    if (other.n == 0) return;
    if (n == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(n), nb = static_cast<double>(other.n);
    const double delta = other.mean - mean;
    const double total = na + nb;
    mean += delta * nb / total;
    m2 += other.m2 + delta * delta * na * nb / total;
    n += other.n;
}

double RunningStat::variance() const noexcept {
    return n == 0 ? 0.0 : m2 / static_cast<double>(n);
}

double RunningStat::sd() const noexcept { return std::sqrt(variance()); }

double RunningStat::standard_error() const noexcept {
    return n == 0 ? 0.0 : sd() / std::sqrt(static_cast<double>(n));
}

Matrix Ensemble::link_frequency() const {
    return link_count.cast<double>() / static_cast<double>(n_samples);
}

Matrix Ensemble::mean_weight(const NullModel& model) const {
    return link_frequency().cwiseProduct(model.link_weight);
}

namespace {

struct Partial {
    std::vector<RunningStat> firm_degree, bank_degree, firm_strength, bank_strength;
    RunningStat links, volume;
    Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic> link_count;

    Partial(std::size_t nf, std::size_t nb)
        : firm_degree(nf), bank_degree(nb), firm_strength(nf), bank_strength(nb),
          link_count(Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(
              static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(nb))) {}

    void merge(const Partial& o) {
        for (std::size_t i = 0; i < firm_degree.size(); ++i) {
            firm_degree[i].merge(o.firm_degree[i]);
            firm_strength[i].merge(o.firm_strength[i]);
        }
        for (std::size_t j = 0; j < bank_degree.size(); ++j) {
            bank_degree[j].merge(o.bank_degree[j]);
            bank_strength[j].merge(o.bank_strength[j]);
        }
        links.merge(o.links);
        volume.merge(o.volume);
        link_count += o.link_count;
    }
};

void accumulate_block(const NullModel& model, std::uint64_t seed, std::size_t first,
                      std::size_t last, Partial& out) {
    const auto nf = static_cast<std::size_t>(model.prob.rows());
    const auto nb = static_cast<std::size_t>(model.prob.cols());
    std::vector<double> kdeg(nf), hdeg(nb), sstr(nf), tstr(nb);
    for (std::size_t n = first; n < last; ++n) {
        std::fill(hdeg.begin(), hdeg.end(), 0.0);
        std::fill(tstr.begin(), tstr.end(), 0.0);
        double L = 0.0, vol = 0.0;
        for (std::size_t i = 0; i < nf; ++i) {
            double k = 0.0, s = 0.0;
            for (std::size_t j = 0; j < nb; ++j) {
                const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
                const double p = model.prob(ii, jj);
                if (p <= 0.0) continue;
                if (keyed_uniform(seed, n, static_cast<std::uint32_t>(i),
                                  static_cast<std::uint32_t>(j)) < p) {
                    const double w = model.link_weight(ii, jj);
                    k += 1.0;
                    s += w;
                    hdeg[j] += 1.0;
                    tstr[j] += w;
                    ++out.link_count(ii, jj);
                }
            }
            kdeg[i] = k;
            sstr[i] = s;
            L += k;
            vol += s;
        }
        for (std::size_t i = 0; i < nf; ++i) {
            out.firm_degree[i].push(kdeg[i]);
            out.firm_strength[i].push(sstr[i]);
        }
        for (std::size_t j = 0; j < nb; ++j) {
            out.bank_degree[j].push(hdeg[j]);
            out.bank_strength[j].push(tstr[j]);
        }
        out.links.push(L);
        out.volume.push(vol);
    }
}

}  // namespace

Ensemble sample_ensemble(const NullModel& model, std::size_t n_samples, std::uint64_t seed,
                         unsigned threads) {
    if (n_samples == 0) throw InvalidArgument("an ensemble needs at least one sample");
    const auto nf = static_cast<std::size_t>(model.prob.rows());
    const auto nb = static_cast<std::size_t>(model.prob.cols());

    const std::size_t n_blocks = (n_samples + kBlockSize - 1) / kBlockSize;
    std::vector<Partial> blocks(n_blocks, Partial(nf, nb));

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_blocks));

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t b = next++; b < n_blocks; b = next++)
            accumulate_block(model, seed, b * kBlockSize, std::min(n_samples, (b + 1) * kBlockSize),
                             blocks[b]);
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    Partial total(nf, nb);
    for (const auto& b : blocks) total.merge(b);

    Ensemble e;
    e.kind = model.kind;
    e.n_samples = n_samples;
    e.seed = seed;
    e.firm_degree = std::move(total.firm_degree);
    e.bank_degree = std::move(total.bank_degree);
    e.firm_strength = std::move(total.firm_strength);
    e.bank_strength = std::move(total.bank_strength);
    e.links = total.links;
    e.volume = total.volume;
    e.link_count = std::move(total.link_count);
    return e;
}

Matrix draw_configuration(const NullModel& model, std::uint64_t seed, std::size_t sample_index) {
    Matrix w = Matrix::Zero(model.prob.rows(), model.prob.cols());
    for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            const double p = model.prob(i, j);
            if (p > 0.0 && keyed_uniform(seed, sample_index, static_cast<std::uint32_t>(i),
                                         static_cast<std::uint32_t>(j)) < p)
                w(i, j) = model.link_weight(i, j);
        }
    return w;
}

void write_configuration_csv(const NullModel& model, std::uint64_t seed, std::size_t sample_index,
                             const std::filesystem::path& path) {
    const Matrix w = draw_configuration(model, seed, sample_index);
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
    out.precision(17);
    out << "firm_index,bank_index,weight\n";
    for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (Eigen::Index j = 0; j < w.cols(); ++j)
            if (w(i, j) > 0.0) out << i << ',' << j << ',' << w(i, j) << '\n';
}

}  // namespace credtopo
