#pragma once

// Descriptive network statistics, empirical-vs-model comparison and the
// benchmark metrics used to score null models.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "credtopo/network.hpp"

namespace credtopo {

struct SummaryStats {
    std::size_t n_firms = 0;
    std::size_t n_banks = 0;
    std::size_t links = 0;
    double density = 0.0;
    double mean_firm_degree = 0.0;
    double mean_bank_degree = 0.0;
    double cv_firm = 0.0;  // population sd / mean; 0 for an empty side
    double cv_bank = 0.0;
};

SummaryStats summarize(const BipartiteNetwork& net);

struct CcdfCurve {
    std::vector<double> x;         // sorted distinct values
    std::vector<double> survival;  // P(X >= x)
};

// Throws EmptyInput.
CcdfCurve ccdf(std::span<const double> values);

double pearson(std::span<const double> x, std::span<const double> y);   // throws ConstantSequence
double spearman(std::span<const double> x, std::span<const double> y);  // average ranks for ties
std::vector<double> average_ranks(std::span<const double> values);

struct ComparisonBin {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t count = 0;
    // Summary of the expected values whose empirical value fell in the bin.
    // Empty bins leave these unset.
    std::optional<double> mean;
    std::optional<double> sd;   // population
    std::optional<double> q05;  // 90% band, linear-interpolated quantiles
    std::optional<double> q95;
};

struct ComparisonStats {
    std::optional<double> pearson;   // absent when either sequence is constant
    std::optional<double> spearman;
    std::vector<ComparisonBin> bins;
};

// Equal-width bins over [min, max] of the empirical values; the last bin is
// closed on the right. Throws InvalidArgument on length mismatch or n < 2.
ComparisonStats compare(std::span<const double> empirical, std::span<const double> expected,
                        std::size_t n_bins = 10);

// Root mean square relative error over entries with non-zero empirical value.
// Throws InvalidArgument on length mismatch, NoValidEntries.
double rmsre(std::span<const double> empirical, std::span<const double> model);

// Fraction of the L_obs highest-probability pairs that are observed links.
// Ties are broken by (i, j) lexicographic order. Throws EmptyNetwork.
double precision_at_L(const Matrix& prob, const BipartiteNetwork& net);

// Same, but ties are broken by a seeded random permutation of the pairs.
double precision_at_L(const Matrix& prob, const BipartiteNetwork& net, std::uint64_t tie_seed);

}  // namespace credtopo
