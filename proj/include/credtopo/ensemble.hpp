#pragma once

// Seeded Monte Carlo sampling of a NullModel.
//
// Link (i, j) of sample n is present iff U(seed, n, i, j) < p_ij, where U is
// the Philox draw keyed by those four numbers. Samples are accumulated in
// fixed blocks of `kBlockSize` consecutive indices and the blocks are merged
// in index order, so the statistics are bit-identical for any thread count.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "credtopo/nullmodel.hpp"

namespace credtopo {

// Welford accumulator with Chan's pairwise merge.
struct RunningStat {
    std::uint64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void push(double x) noexcept;
    void merge(const RunningStat& other) noexcept;
    double variance() const noexcept;  // population
    double sd() const noexcept;
    double standard_error() const noexcept;  // sd / sqrt(n)
};

struct Ensemble {
    NullKind kind = NullKind::NetworkDriven;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;

    std::vector<RunningStat> firm_degree;
    std::vector<RunningStat> bank_degree;
    std::vector<RunningStat> firm_strength;
    std::vector<RunningStat> bank_strength;
    RunningStat links;
    RunningStat volume;  // total weight per sample

    // Number of samples containing each pair.
    Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic> link_count;

    // Empirical link frequency and mean sampled weight per pair.
    Matrix link_frequency() const;
    Matrix mean_weight(const NullModel& model) const;
};

inline constexpr std::size_t kBlockSize = 128;

// threads = 0 uses std::thread::hardware_concurrency().
Ensemble sample_ensemble(const NullModel& model, std::size_t n_samples, std::uint64_t seed,
                         unsigned threads = 0);

// Regenerates one configuration of the ensemble; returns its weight matrix.
Matrix draw_configuration(const NullModel& model, std::uint64_t seed, std::size_t sample_index);

// Debug dump of one configuration as firm_index,bank_index,weight rows.
void write_configuration_csv(const NullModel& model, std::uint64_t seed, std::size_t sample_index,
                             const std::filesystem::path& path);

}  // namespace credtopo
