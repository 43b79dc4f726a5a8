#include "credtopo/design.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "credtopo/errors.hpp"

namespace credtopo {

namespace {

constexpr double kStrengthFloor = 1.0;
constexpr double kExpectedDegreeFloor = 1e-6;

const char* model_token(ModelKind m) {
    switch (m) {
        case ModelKind::M1_Gravity: return "m1";
        case ModelKind::M2_Network: return "m2";
        case ModelKind::M3_Full: return "m3";
    }
    return "?";
}

}  // namespace

std::string ModelSpec::id() const {
    std::string out = stage == Stage::LinkFormation ? "s1_" : "s2_";
    out += model_token(model);
    if (model != ModelKind::M1_Gravity) out += variant == Variant::A_WithDegree ? "a" : "b";
    if (degree_source == DegreeSource::NullNet) out += "_nullnet";
    if (degree_source == DegreeSource::NullBal) out += "_nullbal";
    if (drop_network_strength) out += "_nostr";
    if (fixed_effects == FixedEffects::BankDummies) out += "_fe";
    if (!herman) out += "_raw";
    return out;
}

std::string ModelSpec::title() const {
    std::string out = model == ModelKind::M1_Gravity   ? "Model 1"
                      : model == ModelKind::M2_Network ? "Model 2"
                                                       : "Model 3";
    if (model != ModelKind::M1_Gravity) out += variant == Variant::A_WithDegree ? "A" : "B";
    if (degree_source == DegreeSource::NullNet) out += " (NullNet)";
    if (degree_source == DegreeSource::NullBal) out += " (NullBal)";
    if (drop_network_strength) out += " (no s_net/t_net)";
    if (fixed_effects == FixedEffects::BankDummies) out += " (bank FE)";
    if (!herman) out += " (uncorrected)";
    return out;
}

void ModelSpec::validate() const {
    if (degree_source != DegreeSource::Empirical) {
        if (model != ModelKind::M3_Full)
            throw InvalidArgument("null-model degree columns require Model 3");
        if (variant != Variant::A_WithDegree)
            throw InvalidArgument("null-model degree columns require variant A");
        if (drop_network_strength)
            throw InvalidArgument("placebo designs already fix their strength columns");
    }
    if (drop_network_strength && model == ModelKind::M1_Gravity)
        throw InvalidArgument("Model 1 has no network strength columns to drop");
    if (fixed_effects == FixedEffects::BankDummies && stage != Stage::LoanSizing)
        throw InvalidArgument("bank fixed effects are only supported for loan sizing");
}

ModelSpec parse_model_spec(const std::string& id) {
    auto fail = [&] { return InvalidArgument("unrecognised model id '" + id + "'"); };
    std::vector<std::string> parts;
    std::string cur;
    for (char c : id) {
        if (c == '_' || c == '-') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
    }
    parts.push_back(cur);
    if (parts.size() < 2) throw fail();

    ModelSpec spec;
    if (parts[0] == "s1") spec.stage = Stage::LinkFormation;
    else if (parts[0] == "s2") spec.stage = Stage::LoanSizing;
    else throw fail();

    const std::string& m = parts[1];
    if (m == "m1") {
        spec.model = ModelKind::M1_Gravity;
    } else if (m.size() == 3 && (m[0] == 'm') && (m[1] == '2' || m[1] == '3') &&
               (m[2] == 'a' || m[2] == 'b')) {
        spec.model = m[1] == '2' ? ModelKind::M2_Network : ModelKind::M3_Full;
        spec.variant = m[2] == 'a' ? Variant::A_WithDegree : Variant::B_WithoutDegree;
    } else {
        throw fail();
    }
    for (std::size_t p = 2; p < parts.size(); ++p) {
        const auto& t = parts[p];
        if (t == "nullnet") spec.degree_source = DegreeSource::NullNet;
        else if (t == "nullbal") spec.degree_source = DegreeSource::NullBal;
        else if (t == "nostr") spec.drop_network_strength = true;
        else if (t == "fe") spec.fixed_effects = FixedEffects::BankDummies;
        else if (t == "raw") spec.herman = false;
        else throw fail();
    }
    spec.validate();
    return spec;
}

std::size_t DesignMatrix::column(const std::string& name) const noexcept {
    for (std::size_t c = 0; c < columns.size(); ++c)
        if (columns[c].name == name) return c;
    return npos;
}

bool DesignMatrix::has_intercept() const noexcept {
    return std::any_of(columns.begin(), columns.end(),
                       [](const ColumnInfo& c) { return c.side == ColumnSide::Intercept; });
}

DesignMatrix make_design(std::vector<std::string> names, Matrix X, Vector y,
                         std::vector<std::size_t> groups) {
    if (static_cast<std::size_t>(X.cols()) != names.size())
        throw InvalidArgument("column name count does not match the design");
    if (X.rows() != y.size()) throw InvalidArgument("response length does not match the design");
    if (!groups.empty() && groups.size() != static_cast<std::size_t>(X.rows()))
        throw InvalidArgument("group vector length does not match the design");
    std::set<std::string> seen;
    DesignMatrix d;
    for (auto& n : names) {
        if (!seen.insert(n).second) throw InvalidArgument("duplicate column '" + n + "'");
        ColumnInfo c;
        c.side = n == "intercept" ? ColumnSide::Intercept : ColumnSide::Firm;
        c.transform = n == "intercept" ? "const" : "raw";
        c.name = std::move(n);
        d.columns.push_back(std::move(c));
    }
    d.X = std::move(X);
    d.y = std::move(y);
    d.bank_index = std::move(groups);
    std::size_t max_group = 0;
    for (auto g : d.bank_index) max_group = std::max(max_group, g);
    if (!d.bank_index.empty())
        for (std::size_t g = 0; g <= max_group; ++g) d.bank_ids.push_back(std::to_string(g));
    d.firm_index.assign(static_cast<std::size_t>(d.X.rows()), 0);
    return d;
}

NodeTotals node_totals(const Sample& sample) {
    const auto& net = sample.network;
    const Degrees deg = derived_degrees(net);
    const Strengths str = derived_strengths(net);
    NodeTotals t;
    t.k = deg.firm;
    t.h = deg.bank;
    t.s_net = str.firm;
    t.t_net = str.bank;
    for (const auto& f : sample.firms_in_order()) t.s_bal.push_back(f.balance_strength);
    for (const auto& b : sample.banks_in_order()) t.t_bal.push_back(b.balance_strength);
    return t;
}

CorrectedPredictors herman_correct(const NodeTotals& totals, const BipartiteNetwork& net,
                                   std::size_t i, std::size_t j, Stage stage) {
    if (i >= net.n_firms() || j >= net.n_banks()) throw InvalidArgument("pair out of range");
    CorrectedPredictors c;
    c.k = totals.k[i];
    c.h = totals.h[j];
    c.s_net = totals.s_net[i];
    c.t_net = totals.t_net[j];
    c.s_bal = totals.s_bal[i];
    c.t_bal = totals.t_bal[j];
    c.is_exclusive = totals.k[i] == 1;

    const double w = net.weight(i, j);
    const bool a = w > 0.0;
    if (stage == Stage::LinkFormation) {
        if (!a) return c;
        c.k -= 1.0;
        c.h -= 1.0;
        c.s_net -= w;
        c.t_net -= w;
    } else {
        if (!a) throw InvalidArgument("loan-sizing correction needs an existing link");
        c.k -= 1.0;
        c.h -= 1.0;
        c.s_net -= w;
        c.t_net -= w;
        c.s_bal -= w;
        c.t_bal -= w;
        if (c.s_bal < 0.0) {
            c.s_bal = 0.0;
            c.clamped = true;
        }
        if (c.t_bal < 0.0) {
            c.t_bal = 0.0;
            c.clamped = true;
        }
    }
    // Rounding of a node's only link can leave a tiny negative residual.
    c.s_net = std::max(c.s_net, 0.0);
    c.t_net = std::max(c.t_net, 0.0);
    return c;
}

CorrectedPredictors herman_correct(const Sample& sample, std::size_t i, std::size_t j, Stage stage) {
    return herman_correct(node_totals(sample), sample.network, i, j, stage);
}

namespace {

enum class Col {
    Intercept,
    LnSBal, LnAssetsF, LevF, RoaF, Tang, LnSNet, LnK, IsExclusive,
    LnTBal, LnAssetsB, LevB, RoaB, LnTNet, LnH,
};

struct ColDef {
    Col id;
    const char* name;
    ColumnSide side;
    const char* transform;
};

std::vector<ColDef> select_columns(const ModelSpec& spec) {
    const bool gravity = spec.model != ModelKind::M2_Network;
    const bool network = spec.model != ModelKind::M1_Gravity;
    const bool with_degree = network && spec.variant == Variant::A_WithDegree;
    const bool placebo = spec.degree_source != DegreeSource::Empirical;
    const bool fe = spec.fixed_effects == FixedEffects::BankDummies;

    bool s_bal = gravity, s_net = network, exclusive = with_degree;
    if (spec.drop_network_strength) s_net = false;
    if (spec.degree_source == DegreeSource::NullNet) {
        s_bal = true;
        s_net = false;
        exclusive = false;
    } else if (spec.degree_source == DegreeSource::NullBal) {
        s_bal = false;
        s_net = true;
        exclusive = false;
    }
    const char* deg_tf = placebo ? "ln_null" : "ln_floor1";

    std::vector<ColDef> out;
    if (!fe) out.push_back({Col::Intercept, "intercept", ColumnSide::Intercept, "const"});
    if (s_bal) out.push_back({Col::LnSBal, "ln_s_bal", ColumnSide::Firm, "ln_floor1"});
    if (gravity) {
        out.push_back({Col::LnAssetsF, "ln_assets_firm", ColumnSide::Firm, "ln"});
        out.push_back({Col::LevF, "lev_firm", ColumnSide::Firm, "raw"});
        out.push_back({Col::RoaF, "roa_firm", ColumnSide::Firm, "raw"});
        out.push_back({Col::Tang, "tang", ColumnSide::Firm, "raw"});
    }
    if (s_net) out.push_back({Col::LnSNet, "ln_s_net", ColumnSide::Firm, "ln_floor1"});
    if (with_degree) out.push_back({Col::LnK, "ln_k", ColumnSide::Firm, deg_tf});
    if (exclusive) out.push_back({Col::IsExclusive, "is_exclusive", ColumnSide::Firm, "indicator"});
    if (!fe) {
        if (s_bal) out.push_back({Col::LnTBal, "ln_t_bal", ColumnSide::Bank, "ln_floor1"});
        if (gravity) {
            out.push_back({Col::LnAssetsB, "ln_assets_bank", ColumnSide::Bank, "ln"});
            out.push_back({Col::LevB, "lev_bank", ColumnSide::Bank, "raw"});
            out.push_back({Col::RoaB, "roa_bank", ColumnSide::Bank, "raw"});
        }
        if (s_net) out.push_back({Col::LnTNet, "ln_t_net", ColumnSide::Bank, "ln_floor1"});
        if (with_degree) out.push_back({Col::LnH, "ln_h", ColumnSide::Bank, deg_tf});
    }
    return out;
}

}  // namespace

DesignMatrix build_design(const Sample& sample, const ModelSpec& spec, const PlaceboInputs& placebo) {
    spec.validate();
    const NullDegrees* null_deg = nullptr;
    if (spec.degree_source == DegreeSource::NullNet) {
        if (!placebo.net) throw MissingNullModel("NullNet design needs NetworkDriven expectations");
        null_deg = &*placebo.net;
    } else if (spec.degree_source == DegreeSource::NullBal) {
        if (!placebo.bal) throw MissingNullModel("NullBal design needs BalanceDriven expectations");
        null_deg = &*placebo.bal;
    }

    const auto& net = sample.network;
    const std::size_t nf = net.n_firms(), nb = net.n_banks();
    if (null_deg && (null_deg->firm.size() != nf || null_deg->bank.size() != nb))
        throw InvalidArgument("expected-degree vectors do not match the sample");

    const NodeTotals totals = node_totals(sample);
    const auto firms = sample.firms_in_order();
    const auto banks = sample.banks_in_order();
    const auto defs = select_columns(spec);

    DesignMatrix d;
    d.spec = spec;
    for (const auto& c : defs)
        d.columns.push_back({c.name, c.side, std::string(c.transform) == "indicator", c.transform});
    d.bank_ids = net.bank_ids();

    // Row scope.
    std::vector<std::pair<std::size_t, std::size_t>> rows;
    if (spec.stage == Stage::LinkFormation) {
        rows.reserve(nf * nb);
        for (std::size_t i = 0; i < nf; ++i)
            for (std::size_t j = 0; j < nb; ++j) {
                if (totals.h[j] == 0) {
                    ++d.dropped_rows;
                    continue;
                }
                rows.emplace_back(i, j);
            }
    } else {
        for (std::size_t i = 0; i < nf; ++i)
            for (std::size_t j = 0; j < nb; ++j)
                if (net.linked(i, j)) rows.emplace_back(i, j);
    }
    if (rows.empty()) throw AllRowsDropped();

    const auto n = static_cast<Eigen::Index>(rows.size());
    d.X.resize(n, static_cast<Eigen::Index>(defs.size()));
    d.y.resize(n);
    d.firm_index.resize(rows.size());
    d.bank_index.resize(rows.size());

    auto ln_floor = [&](double v) {
        if (v < kStrengthFloor) ++d.floored_logs;
        return std::log(std::max(v, kStrengthFloor));
    };
    auto ln_null = [](double v) { return std::log(std::max(v, kExpectedDegreeFloor)); };

    for (Eigen::Index r = 0; r < n; ++r) {
        const auto [i, j] = rows[static_cast<std::size_t>(r)];
        d.firm_index[static_cast<std::size_t>(r)] = i;
        d.bank_index[static_cast<std::size_t>(r)] = j;

        CorrectedPredictors c;
        if (spec.herman) {
            c = herman_correct(totals, net, i, j, spec.stage);
        } else {
            c.k = totals.k[i];
            c.h = totals.h[j];
            c.s_net = totals.s_net[i];
            c.t_net = totals.t_net[j];
            c.s_bal = totals.s_bal[i];
            c.t_bal = totals.t_bal[j];
            c.is_exclusive = totals.k[i] == 1;
        }
        if (c.clamped) ++d.clamped_balances;

        const auto& fa = firms[i];
        const auto& ba = banks[j];
        for (std::size_t col = 0; col < defs.size(); ++col) {
            double v = 0.0;
            switch (defs[col].id) {
                case Col::Intercept: v = 1.0; break;
                case Col::LnSBal: v = ln_floor(c.s_bal); break;
                case Col::LnAssetsF: v = std::log(fa.total_assets); break;
                case Col::LevF: v = fa.leverage; break;
                case Col::RoaF: v = fa.roa; break;
                case Col::Tang: v = fa.tangibility; break;
                case Col::LnSNet: v = ln_floor(c.s_net); break;
                case Col::LnK:
                    v = null_deg ? ln_null(null_deg->firm[i]) : std::log(std::max(c.k, 1.0));
                    break;
                case Col::IsExclusive: v = c.is_exclusive ? 1.0 : 0.0; break;
                case Col::LnTBal: v = ln_floor(c.t_bal); break;
                case Col::LnAssetsB: v = std::log(ba.total_assets); break;
                case Col::LevB: v = ba.leverage; break;
                case Col::RoaB: v = ba.roa; break;
                case Col::LnTNet: v = ln_floor(c.t_net); break;
                case Col::LnH:
                    v = null_deg ? ln_null(null_deg->bank[j]) : std::log(std::max(c.h, 1.0));
                    break;
            }
            d.X(r, static_cast<Eigen::Index>(col)) = v;
        }
        d.y(r) = spec.stage == Stage::LinkFormation ? (net.linked(i, j) ? 1.0 : 0.0)
                                                    : std::log(net.weight(i, j));
    }
    if (!d.X.allFinite() || !d.y.allFinite())
        throw InvalidArgument("design contains non-finite entries");
    return d;
}

}  // namespace credtopo
