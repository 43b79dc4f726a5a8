#pragma once

#include <span>
#include <vector>

#include "credtopo/estimators.hpp"

namespace credtopo {

struct Histogram {
    std::vector<double> edges;  // bins + 1 edges
    std::vector<std::size_t> counts;
};

// Equal-width bins over [min, max]; the last bin is closed.
Histogram histogram(std::span<const double> values, std::size_t bins = 30);

struct Moments {
    double mean = 0.0;
    double variance = 0.0;         // population
    double skewness = 0.0;         // m3 / m2^1.5
    double excess_kurtosis = 0.0;  // m4 / m2^2 - 3
};

// Central moments; skewness and kurtosis are 0 for a degenerate sequence.
Moments central_moments(std::span<const double> values);

struct ResidualDiagnostics {
    std::size_t n = 0;
    Moments moments;
    Histogram hist;
    std::vector<double> residuals;
    std::vector<double> ln_k;            // empty when the design has no ln_k column
    std::vector<double> ln_assets_firm;  // empty when absent
};

ResidualDiagnostics residual_diagnostics(const FitResult& fit, const DesignMatrix& design);

}  // namespace credtopo
