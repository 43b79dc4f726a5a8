#pragma once

// Maximum-entropy counterfactuals of a bipartite credit network.
//
// Fitness model:   p_ij = z s_i t_j / (1 + z s_i t_j), z fixed by sum(p) = L
// dcGM weights:    w_ij | a_ij = 1  =  s_i t_j / (W p_ij),  W = sqrt(S T)
// BiCM:            p_ij = x_i y_j / (1 + x_i y_j), sum_j p_ij = k_i, sum_i p_ij = h_j
// Random:          p_ij = L / (N_F N_B)
//
// Ensemble sampling lives in ensemble.hpp.

#include <span>
#include <string>
#include <vector>

#include "credtopo/network.hpp"

namespace credtopo {

enum class FitnessVariant { NetworkDriven, BalanceDriven };

const char* to_string(FitnessVariant v) noexcept;

struct FitnessSpec {
    std::vector<double> firm_fitness;  // s_i (s_net or s_bal)
    std::vector<double> bank_fitness;  // t_j (t_net or t_bal)
    double z = 0.0;
    FitnessVariant variant = FitnessVariant::NetworkDriven;
    double S = 0.0;  // sum of firm fitness
    double T = 0.0;  // sum of bank fitness
    double W = 0.0;  // sqrt(S T); equals S = T for NetworkDriven
    double target_links = 0.0;

    std::size_t n_firms() const noexcept { return firm_fitness.size(); }
    std::size_t n_banks() const noexcept { return bank_fitness.size(); }
};

// Root of sum_ij z s_i t_j / (1 + z s_i t_j) = L_target, by log-space
// bisection then Newton polish (relative residual <= 1e-10).
// Zero-fitness nodes are only accepted with `allow_zero` and contribute p = 0.
// Throws NonpositiveFitness, TargetOutOfRange.
double calibrate_z(std::span<const double> s, std::span<const double> t, double L_target,
                   bool allow_zero = false);

// Builds and calibrates a spec. NetworkDriven requires S == T (to 1e-12
// relative) and then pins S = T = W exactly.
FitnessSpec make_fitness_spec(std::vector<double> s, std::vector<double> t, double L_target,
                              FitnessVariant variant);

// Fitness spec of a sample: NetworkDriven uses (s_net, t_net), BalanceDriven
// uses (s_bal, t_bal); L_target = L_obs.
FitnessSpec fitness_from_sample(const Sample& sample, FitnessVariant variant);

double link_probability(const FitnessSpec& spec, std::size_t i, std::size_t j) noexcept;

// Conditional dcGM weight; 0 for pairs with p = 0.
double dcgm_weight(const FitnessSpec& spec, std::size_t i, std::size_t j) noexcept;

// Sum of p over all pairs (compensated).
double expected_link_count(const FitnessSpec& spec);

struct ExpectedMetrics {
    std::vector<double> firm_degree;    // <k_i>
    std::vector<double> bank_degree;    // <h_j>
    std::vector<double> firm_strength;  // <s_i>
    std::vector<double> bank_strength;  // <t_j>
    Matrix weight;                      // <w_ij>
};

// Closed form: <k_i> = sum_j p_ij, <s_i> = s_i T / W, <t_j> = t_j S / W,
// <w_ij> = s_i t_j / W.
ExpectedMetrics expected_metrics(const FitnessSpec& spec);

struct BicmOptions {
    double tolerance = 1e-10;
    std::size_t max_iterations = 10000;
    double damping = 0.5;  // weight on the previous iterate
};

struct BicmSpec {
    std::vector<double> firm_multipliers;  // x_i; +inf for full-degree nodes, 0 for degree 0
    std::vector<double> bank_multipliers;  // y_j
    std::vector<int> firm_targets;         // k
    std::vector<int> bank_targets;         // h
    Matrix prob;                           // includes pairs pinned by peeling
    double max_residual = 0.0;
    std::size_t iterations = 0;

    double probability(std::size_t i, std::size_t j) const noexcept;
};

// Damped multiplicative fixed point over degree classes (nodes sharing a
// target degree share a multiplier). Full-degree nodes are peeled off first
// with p = 1 on their row/column. Throws NonGraphicalTargets, NoConvergence.
BicmSpec solve_bicm(std::span<const int> k, std::span<const int> h, BicmOptions opts = {});

// Constant-probability baseline at the observed density.
struct ConstantModel {
    std::size_t n_firms = 0;
    std::size_t n_banks = 0;
    double density = 0.0;
};

ConstantModel random_baseline(const BipartiteNetwork& net);

enum class NullKind { NetworkDriven, BalanceDriven, Bicm, Random };

const char* to_string(NullKind k) noexcept;
NullKind parse_null_kind(const std::string& name);  // throws InvalidArgument

// A fully materialised link model ready for sampling: link probabilities plus
// the weight assigned to a link when it is drawn.
struct NullModel {
    NullKind kind = NullKind::NetworkDriven;
    Matrix prob;
    Matrix link_weight;
    // Fitness used for dcGM weights; z is only meaningful for fitness kinds.
    FitnessSpec weights_from;
};

NullModel make_null_model(const FitnessSpec& spec);
// BiCM and Random topologies take their dcGM weights from `weights_from`.
NullModel make_null_model(const BicmSpec& bicm, const FitnessSpec& weights_from);
NullModel make_null_model(const ConstantModel& model, const FitnessSpec& weights_from);

// Builds any kind from a sample; weights for BiCM/Random come from the
// NetworkDriven fitness.
NullModel build_null_model(const Sample& sample, NullKind kind);

// Expectations by direct summation over the materialised model.
ExpectedMetrics expected_metrics(const NullModel& model);

}  // namespace credtopo
