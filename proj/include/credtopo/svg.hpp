#pragma once

// Minimal self-contained SVG plots. Output depends only on the data, so the
// files are byte-stable across runs.

#include <string>
#include <utility>
#include <vector>

#include "credtopo/diagnostics.hpp"
#include "credtopo/netstats.hpp"

namespace credtopo {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

// Log-log complementary CDFs, one step line per series.
std::string svg_ccdf(const std::vector<std::pair<std::string, CcdfCurve>>& curves, const std::string& title,
                     const std::string& x_label);

// Log-log scatter of (empirical, expected) with binned mean +/- sd overlaid
// and the identity line for reference. Non-positive points are skipped.
std::string svg_comparison(const std::vector<double>& empirical, const std::vector<double>& expected,
                           const ComparisonStats& stats, const std::string& title, const std::string& x_label,
                           const std::string& y_label);

std::string svg_histogram(const Histogram& h, const std::string& title, const std::string& x_label);

// Linear-scale scatter.
std::string svg_scatter(const Series& s, const std::string& title, const std::string& x_label,
                        const std::string& y_label);

}  // namespace credtopo
