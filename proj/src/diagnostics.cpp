#include "credtopo/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "credtopo/errors.hpp"

namespace credtopo {

Histogram histogram(std::span<const double> values, std::size_t bins) {
    if (bins == 0) throw InvalidArgument("histogram needs at least one bin");
    Histogram h;
    h.counts.assign(bins, 0);
    if (values.empty()) {
        for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(static_cast<double>(b) / static_cast<double>(bins));
        return h;
    }
    auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    double lo = *lo_it, hi = *hi_it;
    if (hi == lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(lo + width * static_cast<double>(b));
    h.edges.back() = hi;
    for (double v : values) {
        auto b = static_cast<std::size_t>((v - lo) / width);
        if (b >= bins) b = bins - 1;
        ++h.counts[b];
    }
    return h;
}

Moments central_moments(std::span<const double> values) {
    Moments m;
    if (values.empty()) return m;
    const double n = static_cast<double>(values.size());
    double sum = 0.0, scale = 0.0;
    for (double v : values) {
        sum += v;
        scale = std::max(scale, std::abs(v));
    }
    m.mean = sum / n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : values) {
        const double d = v - m.mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    m.variance = m2;
    // Rounding-level spread (exact fits) carries no shape information.
    if (m2 <= 1e-24 * std::max(1.0, scale * scale)) return m;
    m.skewness = m3 / std::pow(m2, 1.5);
    m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    return m;
}

ResidualDiagnostics residual_diagnostics(const FitResult& fit, const DesignMatrix& design) {
    ResidualDiagnostics d;
    d.n = static_cast<std::size_t>(fit.residuals.size());
    d.residuals.assign(fit.residuals.data(), fit.residuals.data() + fit.residuals.size());
    // Residuals below rounding level of the response are exact zeros.
    double y_scale = 1.0;
    for (Eigen::Index r = 0; r < design.y.size(); ++r) y_scale = std::max(y_scale, std::abs(design.y(r)));
    if (std::all_of(d.residuals.begin(), d.residuals.end(),
                    [&](double v) { return std::abs(v) <= 1e-12 * y_scale; }))
        std::fill(d.residuals.begin(), d.residuals.end(), 0.0);
    d.moments = central_moments(d.residuals);
    d.hist = histogram(d.residuals, 30);

    if (static_cast<std::size_t>(design.X.rows()) == d.n) {
        if (auto c = design.column("ln_k"); c != DesignMatrix::npos) {
            const auto col = design.X.col(static_cast<Eigen::Index>(c));
            d.ln_k.assign(col.data(), col.data() + col.size());
        }
        if (auto c = design.column("ln_assets_firm"); c != DesignMatrix::npos) {
            const auto col = design.X.col(static_cast<Eigen::Index>(c));
            d.ln_assets_firm.assign(col.data(), col.data() + col.size());
        }
    }
    return d;
}

}  // namespace credtopo
