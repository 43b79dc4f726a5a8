#pragma once

// JSON and plain-text renderings of library results. Numbers go through
// nlohmann::json, which prints the shortest round-trip form, so output is
// deterministic. Non-finite values are written as the strings "inf", "-inf",
// "nan".

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "credtopo/ensemble.hpp"
#include "credtopo/estimators.hpp"
#include "credtopo/ingest.hpp"
#include "credtopo/netstats.hpp"
#include "credtopo/nullmodel.hpp"

namespace credtopo {

using Json = nlohmann::ordered_json;

Json number_json(double v);

Json to_json(const SummaryStats& s);
Json to_json(const FilterReport& r);
Json to_json(const ComparisonStats& c);
Json to_json(const FitnessSpec& f);  // scalars only
Json to_json(const BicmSpec& b);     // scalars only
Json to_json(const FitResult& r);
Json vif_json(const std::vector<std::pair<std::string, double>>& v);

// Aligned regression table, one column per fit: estimate with stars, (se)
// and, for logit, [AME]; then observations and the fit statistic.
std::string regression_table(const std::vector<FitResult>& fits, const std::string& heading = "");

std::string summary_table(const SummaryStats& s, const std::string& label = "");

// CSV helpers (header line included).
std::string ccdf_csv(const CcdfCurve& c);
std::string comparison_csv(const ComparisonStats& c);
std::string pairs_csv(const std::string& x_name, const std::string& y_name,
                      const std::vector<double>& x, const std::vector<double>& y);

// Round-trip double formatting used by every CSV writer.
std::string format_double(double v);

}  // namespace credtopo
