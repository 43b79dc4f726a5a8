#pragma once

// Shared domain types for a bipartite firm-bank credit network.
//
// The weight matrix is the single source of truth: a pair (i, j) is linked
// iff w_ij > 0. Nothing stores adjacency separately.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace credtopo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class BipartiteNetwork {
public:
    // Validates ids (non-empty, unique per side) and weights (finite, >= 0).
    // Throws InvalidNetwork on violation.
    BipartiteNetwork(std::vector<std::string> firm_ids, std::vector<std::string> bank_ids,
                     Matrix weights);

    std::size_t n_firms() const noexcept { return firm_ids_.size(); }
    std::size_t n_banks() const noexcept { return bank_ids_.size(); }

    const std::vector<std::string>& firm_ids() const noexcept { return firm_ids_; }
    const std::vector<std::string>& bank_ids() const noexcept { return bank_ids_; }
    const Matrix& weights() const noexcept { return weights_; }

    double weight(std::size_t i, std::size_t j) const { return weights_(i, j); }
    bool linked(std::size_t i, std::size_t j) const { return weights_(i, j) > 0.0; }

    // L_obs
    std::size_t link_count() const noexcept { return link_count_; }
    double density() const noexcept {
        return static_cast<double>(link_count_) / static_cast<double>(n_firms() * n_banks());
    }

    // 0/1 matrix derived from the weights.
    Matrix adjacency() const;

    // Position of an id, or npos.
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t firm_index(const std::string& id) const;
    std::size_t bank_index(const std::string& id) const;

private:
    std::vector<std::string> firm_ids_;
    std::vector<std::string> bank_ids_;
    Matrix weights_;
    std::size_t link_count_ = 0;
    std::map<std::string, std::size_t> firm_pos_;
    std::map<std::string, std::size_t> bank_pos_;
};

struct Degrees {
    std::vector<int> firm;  // k_i
    std::vector<int> bank;  // h_j
};

struct Strengths {
    std::vector<double> firm;  // s_net_i
    std::vector<double> bank;  // t_net_j
};

Degrees derived_degrees(const BipartiteNetwork& net);
Strengths derived_strengths(const BipartiteNetwork& net);

struct FirmAttributes {
    double balance_strength = 0.0;  // s_bal, "Debt to Banks"
    double total_assets = 1.0;
    double leverage = 0.0;
    double roa = 0.0;  // percent
    double tangibility = 0.0;
};

struct BankAttributes {
    double balance_strength = 0.0;  // t_bal, "Corporate Loans"
    double total_assets = 1.0;
    double leverage = 0.0;
    double roa = 0.0;
};

// Throws InvalidArgument when a record breaks its field invariants.
void validate(const FirmAttributes& a, const std::string& id);
void validate(const BankAttributes& a, const std::string& id);

struct Sample {
    BipartiteNetwork network;
    std::map<std::string, FirmAttributes> firm_attrs;
    std::map<std::string, BankAttributes> bank_attrs;
    std::string label;

    // Attribute vectors aligned with the network's node order.
    std::vector<FirmAttributes> firms_in_order() const;
    std::vector<BankAttributes> banks_in_order() const;
};

// Checks record coverage (no missing, no orphans) and record invariants.
// Throws MissingAttribute / InvalidArgument.
void validate(const Sample& sample);

}  // namespace credtopo
