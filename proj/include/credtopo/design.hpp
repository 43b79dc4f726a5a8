#pragma once

// Regression designs for the two-stage credit model.
//
// Stage 1 (link formation, logit): one row per (firm, bank) pair.
// Stage 2 (loan sizing, OLS):      one row per existing link, response ln w_ij.
//
// Topological predictors are "rest-of-the-world" corrected so that a row never
// sees its own link: stage 1 subtracts a_ij from degrees and w_ij from network
// strengths; stage 2 also subtracts w_ij from balance-sheet strengths.

#include <optional>
#include <string>
#include <vector>

#include "credtopo/network.hpp"

namespace credtopo {

enum class Stage { LinkFormation, LoanSizing };
enum class ModelKind { M1_Gravity, M2_Network, M3_Full };
enum class Variant { A_WithDegree, B_WithoutDegree };
enum class DegreeSource { Empirical, NullNet, NullBal };
enum class FixedEffects { None, BankDummies };

struct ModelSpec {
    Stage stage = Stage::LinkFormation;
    ModelKind model = ModelKind::M3_Full;
    Variant variant = Variant::A_WithDegree;
    DegreeSource degree_source = DegreeSource::Empirical;
    FixedEffects fixed_effects = FixedEffects::None;
    bool herman = true;
    // Placebo column "empirical without s_net, t_net".
    bool drop_network_strength = false;

    // Stable identifier, e.g. "s1_m1", "s2_m3a", "s1_m3a_nullnet", "s2_m3a_fe".
    std::string id() const;
    // Human-readable column title for tables.
    std::string title() const;
    // Throws InvalidArgument on an inconsistent combination.
    void validate() const;
};

// Inverse of ModelSpec::id(). Throws InvalidArgument.
ModelSpec parse_model_spec(const std::string& id);

enum class ColumnSide { Intercept, Firm, Bank };

struct ColumnInfo {
    std::string name;
    ColumnSide side = ColumnSide::Firm;
    bool indicator = false;
    std::string transform;  // "const", "ln", "ln_floor1", "raw", "indicator", "ln_null"
};

struct DesignMatrix {
    ModelSpec spec;
    std::vector<ColumnInfo> columns;
    Matrix X;
    Vector y;
    std::vector<std::size_t> firm_index;  // per row, into the sample's node order
    std::vector<std::size_t> bank_index;
    std::vector<std::string> bank_ids;    // group labels for fixed effects

    std::size_t dropped_rows = 0;       // zero-degree banks (stage 1)
    std::size_t floored_logs = 0;       // ln(max(v, 1)) applied to a zero strength
    std::size_t clamped_balances = 0;   // negative corrected balance strength set to 0

    std::size_t n_rows() const noexcept { return static_cast<std::size_t>(X.rows()); }
    std::size_t n_cols() const noexcept { return static_cast<std::size_t>(X.cols()); }
    // Column position by name, or npos.
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t column(const std::string& name) const noexcept;
    bool has_intercept() const noexcept;
};

// Wraps raw data as a design (toy problems, oracles). The first column is
// treated as the intercept when it is named "intercept".
DesignMatrix make_design(std::vector<std::string> names, Matrix X, Vector y,
                         std::vector<std::size_t> groups = {});

// Node-level totals shared by every row of a sample.
struct NodeTotals {
    std::vector<int> k, h;
    std::vector<double> s_net, t_net, s_bal, t_bal;
};

NodeTotals node_totals(const Sample& sample);

struct CorrectedPredictors {
    double k = 0.0;
    double h = 0.0;
    double s_net = 0.0;
    double t_net = 0.0;
    double s_bal = 0.0;
    double t_bal = 0.0;
    bool is_exclusive = false;  // k_i == 1 before correction
    bool clamped = false;       // a balance strength went negative and was set to 0
};

// Stage 1: k - a, h - a, s_net - w, t_net - w; balances unchanged.
// Stage 2 (a_ij = 1): k - 1, h - 1 and w subtracted from all four strengths.
CorrectedPredictors herman_correct(const NodeTotals& totals, const BipartiteNetwork& net,
                                   std::size_t i, std::size_t j, Stage stage);
CorrectedPredictors herman_correct(const Sample& sample, std::size_t i, std::size_t j, Stage stage);

// Expected degrees from a calibrated null model, used by placebo designs.
struct NullDegrees {
    std::vector<double> firm;  // <k_i>
    std::vector<double> bank;  // <h_j>
};

struct PlaceboInputs {
    std::optional<NullDegrees> net;  // NetworkDriven fitness
    std::optional<NullDegrees> bal;  // BalanceDriven fitness
};

// Throws MissingNullModel, AllRowsDropped, InvalidArgument.
DesignMatrix build_design(const Sample& sample, const ModelSpec& spec,
                          const PlaceboInputs& placebo = {});

}  // namespace credtopo
