#include "credtopo/report.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

namespace credtopo {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Json number_json(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

namespace {

Json optional_json(const std::optional<double>& v) { return v ? number_json(*v) : Json(nullptr); }

std::string fixed(double v, int digits) {
    if (!std::isfinite(v)) return format_double(v);
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

}  // namespace

Json to_json(const SummaryStats& s) {
    Json j;
    j["n_firms"] = s.n_firms;
    j["n_banks"] = s.n_banks;
    j["links"] = s.links;
    j["density"] = number_json(s.density);
    j["mean_firm_degree"] = number_json(s.mean_firm_degree);
    j["mean_bank_degree"] = number_json(s.mean_bank_degree);
    j["cv_firm_degree"] = number_json(s.cv_firm);
    j["cv_bank_degree"] = number_json(s.cv_bank);
    return j;
}

Json to_json(const FilterReport& r) {
    Json j;
    j["band"] = {{"lower", r.band.lower}, {"upper", r.band.upper}};
    j["kept_firms"] = r.kept_firms;
    j["dropped_count"] = r.dropped_firms.size();
    Json dropped = Json::array();
    for (const auto& d : r.dropped_firms)
        dropped.push_back({{"firm_id", d.firm_id}, {"ratio", optional_json(d.ratio)}, {"reason", d.reason}});
    j["dropped_firms"] = std::move(dropped);
    j["isolated_banks"] = r.isolated_banks;
    return j;
}

Json to_json(const ComparisonStats& c) {
    Json j;
    j["pearson"] = optional_json(c.pearson);
    j["spearman"] = optional_json(c.spearman);
    Json bins = Json::array();
    for (const auto& b : c.bins)
        bins.push_back({{"lower", number_json(b.lower)},
                        {"upper", number_json(b.upper)},
                        {"count", b.count},
                        {"mean", optional_json(b.mean)},
                        {"sd", optional_json(b.sd)},
                        {"q05", optional_json(b.q05)},
                        {"q95", optional_json(b.q95)}});
    j["bins"] = std::move(bins);
    return j;
}

Json to_json(const FitnessSpec& f) {
    Json j;
    j["variant"] = to_string(f.variant);
    j["z"] = number_json(f.z);
    j["S"] = number_json(f.S);
    j["T"] = number_json(f.T);
    j["W"] = number_json(f.W);
    j["target_links"] = number_json(f.target_links);
    j["n_firms"] = f.n_firms();
    j["n_banks"] = f.n_banks();
    return j;
}

Json to_json(const BicmSpec& b) {
    Json j;
    j["iterations"] = b.iterations;
    j["max_residual"] = number_json(b.max_residual);
    j["n_firms"] = b.firm_targets.size();
    j["n_banks"] = b.bank_targets.size();
    return j;
}

Json to_json(const FitResult& r) {
    Json j;
    j["model_id"] = r.model_id;
    j["title"] = r.title;
    j["estimator"] = to_string(r.estimator);
    j["n_obs"] = r.n_obs;
    j["n_params"] = r.n_params;
    j["df_resid"] = r.df_resid;
    Json coefs = Json::array();
    for (const auto& c : r.coefficients) {
        Json e;
        e["name"] = c.name;
        e["estimate"] = number_json(c.estimate);
        e["std_error"] = number_json(c.std_error);
        e["z"] = number_json(c.z_value);
        e["p_value"] = number_json(c.p_value);
        e["stars"] = c.stars;
        if (c.ame) e["ame"] = number_json(*c.ame);
        coefs.push_back(std::move(e));
    }
    j["coefficients"] = std::move(coefs);
    if (r.estimator == Estimator::Logit) {
        j["log_likelihood"] = number_json(r.log_likelihood);
        j["null_log_likelihood"] = number_json(r.null_log_likelihood);
        j["pseudo_r2"] = number_json(r.pseudo_r2);
    } else {
        j["rss"] = number_json(r.rss);
        j["sigma2"] = number_json(r.sigma2);
        j["r2"] = number_json(r.r2);
    }
    if (r.estimator == Estimator::OlsFixedEffects) {
        j["r2_within"] = number_json(r.r2);
        j["r2_overall"] = number_json(r.r2_overall);
        j["n_groups"] = r.n_groups;
        Json g = Json::object();
        for (const auto& [name, v] : r.group_effects) g[name] = number_json(v);
        j["group_effects"] = std::move(g);
    }
    j["convergence"] = {{"iterations", r.iterations},
                        {"converged", r.converged},
                        {"max_mean_score", number_json(r.max_mean_score)}};
    j["design"] = {{"dropped_rows", r.dropped_rows},
                   {"floored_logs", r.floored_logs},
                   {"clamped_balances", r.clamped_balances}};
    return j;
}

Json vif_json(const std::vector<std::pair<std::string, double>>& v) {
    Json j = Json::object();
    for (const auto& [name, value] : v) j[name] = number_json(value);
    return j;
}

std::string regression_table(const std::vector<FitResult>& fits, const std::string& heading) {
    // Row order: first appearance across fits.
    std::vector<std::string> rows;
    std::set<std::string> seen;
    for (const auto& f : fits)
        for (const auto& c : f.coefficients)
            if (seen.insert(c.name).second) rows.push_back(c.name);

    std::vector<std::vector<std::string>> cells;  // [line][column]
    std::vector<std::string> header{""};
    for (const auto& f : fits) header.push_back(f.title.empty() ? f.model_id : f.title);
    cells.push_back(header);

    const bool any_ame = std::any_of(fits.begin(), fits.end(),
                                     [](const FitResult& f) { return f.estimator == Estimator::Logit; });
    for (const auto& name : rows) {
        std::vector<std::string> est{name}, se{""}, ame{""};
        for (const auto& f : fits) {
            if (!f.has(name)) {
                est.emplace_back("");
                se.emplace_back("");
                ame.emplace_back("");
                continue;
            }
            const auto& c = f.coef(name);
            est.push_back(fixed(c.estimate, 4) + c.stars);
            se.push_back("(" + fixed(c.std_error, 4) + ")");
            ame.push_back(c.ame ? "[" + fixed(*c.ame, 4) + "]" : "");
        }
        cells.push_back(std::move(est));
        cells.push_back(std::move(se));
        if (any_ame) cells.push_back(std::move(ame));
    }
    std::vector<std::string> obs{"Observations"}, fit{"Pseudo R2 / R2"}, extra{"Bank FE"};
    bool any_fe = false;
    for (const auto& f : fits) {
        obs.push_back(std::to_string(f.n_obs));
        fit.push_back(fixed(f.estimator == Estimator::Logit ? f.pseudo_r2 : f.r2, 4));
        const bool fe = f.estimator == Estimator::OlsFixedEffects;
        any_fe = any_fe || fe;
        extra.push_back(fe ? "Yes (bank controls absorbed)" : "No");
    }
    cells.push_back(obs);
    cells.push_back(fit);
    if (any_fe) cells.push_back(extra);

    std::vector<std::size_t> width(fits.size() + 1, 0);
    for (const auto& line : cells)
        for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());

    const std::size_t obs_row = cells.size() - (any_fe ? 3 : 2);
    std::ostringstream os;
    std::size_t total = 0;
    for (auto w : width) total += w + 2;
    const std::string rule(total, '-');
    if (!heading.empty()) os << heading << '\n';
    os << rule << '\n';
    for (std::size_t l = 0; l < cells.size(); ++l) {
        const auto& line = cells[l];
        for (std::size_t c = 0; c < line.size(); ++c) {
            if (c == 0) os << std::left << std::setw(static_cast<int>(width[c])) << line[c];
            else os << "  " << std::right << std::setw(static_cast<int>(width[c])) << line[c];
        }
        os << '\n';
        if (l == 0 || l + 1 == obs_row) os << rule << '\n';
    }
    os << rule << '\n';
    os << "Standard errors in parentheses";
    if (any_ame) os << ", average marginal effects in brackets";
    os << ". *** p<0.01, ** p<0.05, * p<0.1\n";
    return os.str();
}

std::string summary_table(const SummaryStats& s, const std::string& label) {
    std::ostringstream os;
    if (!label.empty()) os << label << '\n';
    os << std::left << std::setw(22) << "firms" << s.n_firms << '\n'
       << std::setw(22) << "banks" << s.n_banks << '\n'
       << std::setw(22) << "links" << s.links << '\n'
       << std::setw(22) << "density" << fixed(s.density, 4) << '\n'
       << std::setw(22) << "mean firm degree" << fixed(s.mean_firm_degree, 4) << '\n'
       << std::setw(22) << "mean bank degree" << fixed(s.mean_bank_degree, 4) << '\n'
       << std::setw(22) << "CV firm degree" << fixed(s.cv_firm, 4) << '\n'
       << std::setw(22) << "CV bank degree" << fixed(s.cv_bank, 4) << '\n';
    return os.str();
}

std::string ccdf_csv(const CcdfCurve& c) {
    std::string out = "x,ccdf\n";
    for (std::size_t q = 0; q < c.x.size(); ++q)
        out += format_double(c.x[q]) + "," + format_double(c.survival[q]) + "\n";
    return out;
}

std::string comparison_csv(const ComparisonStats& c) {
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    std::string out = "lower,upper,count,mean,sd,q05,q95\n";
    for (const auto& b : c.bins)
        out += format_double(b.lower) + "," + format_double(b.upper) + "," + std::to_string(b.count) + "," +
               opt(b.mean) + "," + opt(b.sd) + "," + opt(b.q05) + "," + opt(b.q95) + "\n";
    return out;
}

std::string pairs_csv(const std::string& x_name, const std::string& y_name, const std::vector<double>& x,
                      const std::vector<double>& y) {
    std::string out = x_name + "," + y_name + "\n";
    for (std::size_t q = 0; q < x.size() && q < y.size(); ++q)
        out += format_double(x[q]) + "," + format_double(y[q]) + "\n";
    return out;
}

}  // namespace credtopo
