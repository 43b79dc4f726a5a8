#pragma once

// Logit (IRLS), OLS (pivoted QR), within-bank fixed effects, and VIF.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "credtopo/design.hpp"

namespace credtopo {

enum class Estimator { Logit, Ols, OlsFixedEffects };

const char* to_string(Estimator e) noexcept;

// *** p < 0.01, ** p < 0.05, * p < 0.1
std::string significance_stars(double p_value);

struct Coefficient {
    std::string name;
    double estimate = 0.0;
    double std_error = 0.0;
    double z_value = 0.0;
    double p_value = 1.0;
    std::string stars;
    std::optional<double> ame;  // logit only, not for the intercept
};

struct FitResult {
    std::string model_id;
    std::string title;
    Estimator estimator = Estimator::Logit;
    std::vector<Coefficient> coefficients;

    std::size_t n_obs = 0;
    std::size_t n_params = 0;
    std::size_t df_resid = 0;

    // Logit
    double log_likelihood = 0.0;
    double null_log_likelihood = 0.0;
    double pseudo_r2 = 0.0;

    // OLS
    double rss = 0.0;
    double sigma2 = 0.0;
    double r2 = 0.0;          // centered; the within R^2 under fixed effects
    double r2_overall = 0.0;  // fixed effects: including group means

    // Fixed effects
    std::size_t n_groups = 0;
    std::vector<std::pair<std::string, double>> group_effects;

    // Convergence diagnostics
    std::size_t iterations = 0;
    bool converged = true;
    double max_mean_score = 0.0;

    Vector fitted;     // p-hat (logit) or y-hat (OLS)
    Vector residuals;  // y - fitted

    // Design bookkeeping carried into reports.
    std::size_t dropped_rows = 0;
    std::size_t floored_logs = 0;
    std::size_t clamped_balances = 0;

    const Coefficient& coef(const std::string& name) const;  // throws InvalidArgument
    bool has(const std::string& name) const noexcept;
};

struct LogitOptions {
    std::size_t max_iterations = 100;
    double score_tolerance = 1e-8;  // max_m |X_m'(y - p)| / n
    double ll_tolerance = 1e-12;    // relative change of the log-likelihood
};

// Throws InvalidArgument, Separation, SingularInformation, NoConvergence.
FitResult fit_logit(const DesignMatrix& design, LogitOptions opts = {});

enum class StandardErrors { Classical, HC1 };

// Throws InvalidArgument, AllRowsDropped, RankDeficient.
FitResult fit_ols(const DesignMatrix& design, StandardErrors se = StandardErrors::Classical);

// Groups are design.bank_index. An intercept column is absorbed silently;
// bank-side columns raise Absorbed. Throws SingletonGroupsOnly, RankDeficient.
FitResult fit_ols_fixed_effects(const DesignMatrix& design);

// VIF of every non-intercept column, in column order; +inf when the column is
// (numerically) a linear combination of the others. Needs >= 3 such columns.
std::vector<std::pair<std::string, double>> vif(const DesignMatrix& design);

}  // namespace credtopo
