#include "credtopo/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "credtopo/errors.hpp"

namespace credtopo {

const char* to_string(Estimator e) noexcept {
    switch (e) {
        case Estimator::Logit: return "logit";
        case Estimator::Ols: return "ols";
        case Estimator::OlsFixedEffects: return "ols_fe";
    }
    return "?";
}

std::string significance_stars(double p) {
    if (p < 0.01) return "***";
    if (p < 0.05) return "**";
    if (p < 0.1) return "*";
    return "";
}

const Coefficient& FitResult::coef(const std::string& name) const {
    for (const auto& c : coefficients)
        if (c.name == name) return c;
    throw InvalidArgument("no coefficient named '" + name + "'");
}

bool FitResult::has(const std::string& name) const noexcept {
    return std::any_of(coefficients.begin(), coefficients.end(),
                       [&](const Coefficient& c) { return c.name == name; });
}

namespace {

double two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

Coefficient make_coefficient(const std::string& name, double est, double se) {
    Coefficient c;
    c.name = name;
    c.estimate = est;
    c.std_error = se;
    c.z_value = se > 0.0 ? est / se : 0.0;
    c.p_value = se > 0.0 ? two_sided_p(c.z_value) : (est == 0.0 ? 1.0 : 0.0);
    c.stars = significance_stars(c.p_value);
    return c;
}

void copy_bookkeeping(const DesignMatrix& d, FitResult& r) {
    r.model_id = d.spec.id();
    r.title = d.spec.title();
    r.dropped_rows = d.dropped_rows;
    r.floored_logs = d.floored_logs;
    r.clamped_balances = d.clamped_balances;
}

// ---- logit ---------------------------------------------------------------

double logistic(double eta) {
    return eta >= 0.0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
}

// log Lambda(eta) and log(1 - Lambda(eta)) without cancellation.
double log_logistic(double eta) { return eta >= 0.0 ? -std::log1p(std::exp(-eta)) : eta - std::log1p(std::exp(eta)); }

double log_likelihood(const Vector& y, const Vector& eta) {
    double ll = 0.0;
    for (Eigen::Index r = 0; r < y.size(); ++r)
        ll += y(r) > 0.5 ? log_logistic(eta(r)) : log_logistic(-eta(r));
    return ll;
}

struct LogitCore {
    Vector beta;
    Vector eta;
    double ll = 0.0;
    double max_mean_score = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

LogitCore irls(const Matrix& X, const Vector& y, const LogitOptions& opts) {
    const auto n = X.rows(), k = X.cols();
    const double dn = static_cast<double>(n);
    LogitCore c;
    c.beta = Vector::Zero(k);
    c.eta = Vector::Zero(n);
    c.ll = log_likelihood(y, c.eta);

    std::vector<double> norms;
    for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
        Vector p(n), w(n);
        for (Eigen::Index r = 0; r < n; ++r) {
            p(r) = logistic(c.eta(r));
            w(r) = p(r) * (1.0 - p(r));
        }
        // Complete separation: the fit reproduces the response exactly.
        if ((y - p).cwiseAbs().maxCoeff() < 1e-8)
            throw Separation("fitted probabilities reproduce the response exactly");

        const Vector score = X.transpose() * (y - p);
        const Matrix info = X.transpose() * w.asDiagonal() * X;
        Eigen::LDLT<Matrix> ldlt(info);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) throw SingularInformation();
        const Vector step = ldlt.solve(score);
        if (!step.allFinite()) throw SingularInformation();

        // Step halving keeps the likelihood non-decreasing.
        double t = 1.0;
        Vector beta_new, eta_new;
        double ll_new = 0.0;
        for (int h = 0; h < 40; ++h) {
            beta_new = c.beta + t * step;
            eta_new = X * beta_new;
            ll_new = log_likelihood(y, eta_new);
            if (ll_new >= c.ll - 1e-12 * std::abs(c.ll)) break;
            t *= 0.5;
        }
        const double rel = std::abs(ll_new - c.ll) / std::max(std::abs(ll_new), 1e-300);
        c.beta = beta_new;
        c.eta = eta_new;
        c.ll = ll_new;
        c.iterations = it;
        norms.push_back(c.beta.norm());

        Vector p2(n);
        for (Eigen::Index r = 0; r < n; ++r) p2(r) = logistic(c.eta(r));
        c.max_mean_score = (X.transpose() * (y - p2)).cwiseAbs().maxCoeff() / dn;
        if (c.max_mean_score < opts.score_tolerance && rel < opts.ll_tolerance) {
            c.converged = true;
            return c;
        }
    }
    // Diverging coefficients: the norm kept growing over the final iterations.
    const std::size_t window = std::min<std::size_t>(10, norms.size() > 0 ? norms.size() - 1 : 0);
    bool growing = window >= 5;
    for (std::size_t q = norms.size() - window; growing && q < norms.size(); ++q)
        growing = norms[q] > norms[q - 1];
    if (growing) throw Separation("coefficient norm grows without bound");
    throw NoConvergence(c.iterations, c.max_mean_score);
}

}  // namespace

FitResult fit_logit(const DesignMatrix& d, LogitOptions opts) {
    const auto n = d.X.rows(), k = d.X.cols();
    if (n == 0) throw AllRowsDropped();
    if (n <= k) throw InvalidArgument("logit needs more observations than parameters");
    for (Eigen::Index r = 0; r < n; ++r)
        if (d.y(r) != 0.0 && d.y(r) != 1.0) throw InvalidArgument("logit response must be 0/1");

    const LogitCore core = irls(d.X, d.y, opts);

    // Null model: the same routine on an intercept-only design, so an
    // intercept-only fit reproduces it exactly.
    const LogitCore null_core = irls(Matrix::Ones(n, 1), d.y, opts);

    Vector p(n), w(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        p(r) = logistic(core.eta(r));
        w(r) = p(r) * (1.0 - p(r));
    }
    const Matrix info = d.X.transpose() * w.asDiagonal() * d.X;
    Eigen::LDLT<Matrix> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) throw SingularInformation();
    const Matrix cov = ldlt.solve(Matrix::Identity(k, k));
    if (!cov.allFinite()) throw SingularInformation();

    FitResult r;
    copy_bookkeeping(d, r);
    r.estimator = Estimator::Logit;
    r.n_obs = static_cast<std::size_t>(n);
    r.n_params = static_cast<std::size_t>(k);
    r.df_resid = r.n_obs - r.n_params;
    r.log_likelihood = core.ll;
    r.null_log_likelihood = null_core.ll;
    r.pseudo_r2 = null_core.ll < 0.0 ? 1.0 - core.ll / null_core.ll : 0.0;
    r.iterations = core.iterations;
    r.converged = core.converged;
    r.max_mean_score = core.max_mean_score;
    r.fitted = p;
    r.residuals = d.y - p;

    for (Eigen::Index m = 0; m < k; ++m) {
        const auto& col = d.columns[static_cast<std::size_t>(m)];
        const double b = core.beta(m);
        Coefficient c = make_coefficient(col.name, b, std::sqrt(std::max(cov(m, m), 0.0)));
        if (col.side != ColumnSide::Intercept) {
            double acc = 0.0;
            if (col.indicator) {
                for (Eigen::Index q = 0; q < n; ++q) {
                    const double base = core.eta(q) - b * d.X(q, m);
                    acc += logistic(base + b) - logistic(base);
                }
            } else {
                for (Eigen::Index q = 0; q < n; ++q) acc += b * w(q);
            }
            c.ame = b == 0.0 ? 0.0 : acc / static_cast<double>(n);
        }
        r.coefficients.push_back(std::move(c));
    }
    return r;
}

// ---- OLS -----------------------------------------------------------------

namespace {

struct OlsCore {
    Vector beta;
    Matrix xtx_inv;
    Vector fitted;
    Vector residuals;
    double rss = 0.0;
};

OlsCore solve_ols(const Matrix& X, const Vector& y, const std::vector<std::string>& names) {
    Eigen::ColPivHouseholderQR<Matrix> qr(X);
    qr.setThreshold(1e-10);
    const auto k = X.cols();
    if (qr.rank() < k) {
        std::vector<std::string> bad;
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index q = qr.rank(); q < k; ++q) bad.push_back(names[static_cast<std::size_t>(perm(q))]);
        std::sort(bad.begin(), bad.end());
        throw RankDeficient(std::move(bad));
    }
    OlsCore c;
    c.beta = qr.solve(y);
    const Matrix R = qr.matrixR().topLeftCorner(k, k).template triangularView<Eigen::Upper>();
    const Matrix Rinv = R.template triangularView<Eigen::Upper>().solve(Matrix::Identity(k, k));
    const Matrix inner = Rinv * Rinv.transpose();
    const auto P = qr.colsPermutation();
    c.xtx_inv = P * inner * P.transpose();
    c.fitted = X * c.beta;
    c.residuals = y - c.fitted;
    c.rss = c.residuals.squaredNorm();
    return c;
}

std::vector<std::string> names_of(const DesignMatrix& d) {
    std::vector<std::string> out;
    for (const auto& c : d.columns) out.push_back(c.name);
    return out;
}

double centered_tss(const Vector& y) {
    const double mean = y.mean();
    return (y.array() - mean).square().sum();
}

}  // namespace

FitResult fit_ols(const DesignMatrix& d, StandardErrors se_kind) {
    const auto n = d.X.rows(), k = d.X.cols();
    if (n == 0) throw AllRowsDropped();
    if (n <= k) throw InvalidArgument("OLS needs more observations than parameters");

    const OlsCore core = solve_ols(d.X, d.y, names_of(d));

    FitResult r;
    copy_bookkeeping(d, r);
    r.estimator = Estimator::Ols;
    r.n_obs = static_cast<std::size_t>(n);
    r.n_params = static_cast<std::size_t>(k);
    r.df_resid = r.n_obs - r.n_params;
    r.rss = core.rss;
    r.sigma2 = core.rss / static_cast<double>(r.df_resid);
    const double tss = centered_tss(d.y);
    r.r2 = tss > 0.0 ? 1.0 - core.rss / tss : (core.rss == 0.0 ? 1.0 : 0.0);
    r.r2_overall = r.r2;
    r.fitted = core.fitted;
    r.residuals = core.residuals;

    Matrix cov;
    if (se_kind == StandardErrors::Classical) {
        cov = r.sigma2 * core.xtx_inv;
    } else {
        const Matrix meat = d.X.transpose() * core.residuals.array().square().matrix().asDiagonal() * d.X;
        cov = core.xtx_inv * meat * core.xtx_inv *
              (static_cast<double>(n) / static_cast<double>(r.df_resid));
    }
    for (Eigen::Index m = 0; m < k; ++m)
        r.coefficients.push_back(make_coefficient(d.columns[static_cast<std::size_t>(m)].name,
                                                  core.beta(m), std::sqrt(std::max(cov(m, m), 0.0))));
    return r;
}

FitResult fit_ols_fixed_effects(const DesignMatrix& d) {
    const auto n = d.X.rows();
    if (n == 0) throw AllRowsDropped();
    if (d.bank_index.size() != static_cast<std::size_t>(n))
        throw InvalidArgument("fixed effects need a group for every row");

    std::vector<Eigen::Index> keep;
    std::vector<std::string> names;
    for (std::size_t c = 0; c < d.columns.size(); ++c) {
        const auto& col = d.columns[c];
        if (col.side == ColumnSide::Bank) throw Absorbed(col.name);
        if (col.side == ColumnSide::Intercept) continue;
        keep.push_back(static_cast<Eigen::Index>(c));
        names.push_back(col.name);
    }
    if (keep.empty()) throw InvalidArgument("no firm-side columns left after absorbing the intercept");

    std::map<std::size_t, std::vector<Eigen::Index>> groups;
    for (Eigen::Index r = 0; r < n; ++r) groups[d.bank_index[static_cast<std::size_t>(r)]].push_back(r);
    if (groups.size() < 2) throw InvalidArgument("fixed effects need at least two groups");
    if (std::all_of(groups.begin(), groups.end(), [](const auto& g) { return g.second.size() == 1; }))
        throw SingletonGroupsOnly();

    const auto k = static_cast<Eigen::Index>(keep.size());
    Matrix Xs(n, k);
    for (Eigen::Index c = 0; c < k; ++c) Xs.col(c) = d.X.col(keep[static_cast<std::size_t>(c)]);

    Matrix Xd = Xs;
    Vector yd = d.y;
    std::map<std::size_t, std::pair<double, Vector>> means;
    for (const auto& [g, rows] : groups) {
        double ym = 0.0;
        Vector xm = Vector::Zero(k);
        for (auto r : rows) {
            ym += d.y(r);
            xm += Xs.row(r).transpose();
        }
        const double m = static_cast<double>(rows.size());
        ym /= m;
        xm /= m;
        for (auto r : rows) {
            yd(r) -= ym;
            Xd.row(r) -= xm.transpose();
        }
        means[g] = {ym, xm};
    }

    const auto G = static_cast<Eigen::Index>(groups.size());
    if (n - k - G <= 0) throw InvalidArgument("no residual degrees of freedom under fixed effects");
    const OlsCore core = solve_ols(Xd, yd, names);

    FitResult r;
    copy_bookkeeping(d, r);
    r.estimator = Estimator::OlsFixedEffects;
    r.n_obs = static_cast<std::size_t>(n);
    r.n_params = static_cast<std::size_t>(k);
    r.n_groups = static_cast<std::size_t>(G);
    r.df_resid = static_cast<std::size_t>(n - k - G);
    r.rss = core.rss;
    r.sigma2 = core.rss / static_cast<double>(r.df_resid);
    const double within_tss = yd.squaredNorm();
    r.r2 = within_tss > 0.0 ? 1.0 - core.rss / within_tss : 1.0;
    const double tss = centered_tss(d.y);
    r.r2_overall = tss > 0.0 ? 1.0 - core.rss / tss : 1.0;

    r.fitted = d.y - core.residuals;
    r.residuals = core.residuals;
    for (const auto& [g, mv] : means) {
        const double alpha = mv.first - mv.second.dot(core.beta);
        const std::string label = g < d.bank_ids.size() ? d.bank_ids[g] : std::to_string(g);
        r.group_effects.emplace_back(label, alpha);
    }
    const Matrix cov = r.sigma2 * core.xtx_inv;
    for (Eigen::Index m = 0; m < k; ++m)
        r.coefficients.push_back(make_coefficient(names[static_cast<std::size_t>(m)], core.beta(m),
                                                  std::sqrt(std::max(cov(m, m), 0.0))));
    return r;
}

std::vector<std::pair<std::string, double>> vif(const DesignMatrix& d) {
    std::vector<Eigen::Index> cols;
    for (std::size_t c = 0; c < d.columns.size(); ++c)
        if (d.columns[c].side != ColumnSide::Intercept) cols.push_back(static_cast<Eigen::Index>(c));
    if (cols.size() < 3) throw InvalidArgument("VIF needs at least three non-intercept columns");
    const auto n = d.X.rows();
    const auto m = static_cast<Eigen::Index>(cols.size());

    std::vector<std::pair<std::string, double>> out;
    for (Eigen::Index target = 0; target < m; ++target) {
        Matrix A(n, m);  // intercept + the other columns
        A.col(0).setOnes();
        Eigen::Index q = 1;
        for (Eigen::Index c = 0; c < m; ++c)
            if (c != target) A.col(q++) = d.X.col(cols[static_cast<std::size_t>(c)]);
        const Vector y = d.X.col(cols[static_cast<std::size_t>(target)]);

        Eigen::ColPivHouseholderQR<Matrix> qr(A);
        const Vector beta = qr.solve(y);
        const double rss = (y - A * beta).squaredNorm();
        const double tss = centered_tss(y);
        const double one_minus_r2 = tss > 0.0 ? rss / tss : 0.0;
        const double v = one_minus_r2 < 1e-10 ? std::numeric_limits<double>::infinity()
                                              : 1.0 / one_minus_r2;
        out.emplace_back(d.columns[static_cast<std::size_t>(cols[static_cast<std::size_t>(target)])].name, v);
    }
    return out;
}

}  // namespace credtopo
