#pragma once

// Synthetic samples with known link-formation and loan-sizing mechanisms.
//
// Link formation runs bank by bank in a seeded order; within a bank, firms are
// visited in index order. The log-odds of (i, j) are
//
//     ln(z x_i y_j) + delta + gamma_pa * ln(1 + k_i)
//
// with k_i the firm's running degree and delta a global shift chosen so the
// realised link count is as close to the target as the draws allow. Each link
// gets the dcGM weight of the underlying fitness model times
//
//     exp(gamma_frag * ln max(k_i - 1, 1) + N(0, noise_sd))
//
// with k_i the final degree. Firm and bank assets scale with fitness.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "credtopo/netstats.hpp"
#include "credtopo/network.hpp"
#include "credtopo/report.hpp"

namespace credtopo {

struct LognormalParams {
    double mu = 0.0;
    double sigma = 1.0;
};

struct GenConfig {
    std::size_t n_firms = 113;
    std::size_t n_banks = 61;
    std::uint64_t seed = 1;
    LognormalParams firm_size{15.0, 1.0};
    LognormalParams bank_size{18.0, 2.0};
    double target_density = 0.07;
    std::size_t target_links = 0;  // 0: round(target_density * N_F * N_B)
    double attachment_boost = 0.0;       // gamma_pa
    double fragmentation_penalty = 0.0;  // gamma_frag
    double noise_sd = 0.5;
    double balance_noise = 0.1;    // sd of ln(s_bal / s_net)
    double bank_coverage = 0.5;    // mean of ln(t_bal / t_net)
    double attribute_loading = 0.0;
    bool connect_all = true;  // every node keeps at least one link

    void validate() const;  // throws InvalidArgument
    std::size_t link_target() const;
};

Json to_json(const GenConfig& c);
// Overrides fields from flat key=value pairs (same names as the JSON keys).
void apply_setting(GenConfig& c, const std::string& key, const std::string& value);

struct GroundTruth {
    GenConfig config;
    double z = 0.0;
    double delta = 0.0;
    std::size_t realized_links = 0;
    double realized_density = 0.0;
    std::size_t repaired_links = 0;  // links added to isolated nodes
    std::vector<double> firm_fitness;
    std::vector<double> bank_fitness;
    std::vector<std::size_t> bank_order;
};

Json to_json(const GroundTruth& t);

struct Generated {
    Sample sample;
    GroundTruth truth;
};

// Throws InvalidArgument, DegenerateDensity.
Generated generate(const GenConfig& config);

// edges.csv, firms.csv, banks.csv and ground_truth.json.
void write_generated(const Generated& g, const std::filesystem::path& dir);

struct TopologyTarget {
    double density = 0.0;
    double mean_firm_degree = 0.0;
    double mean_bank_degree = 0.0;
    double cv_firm = 0.0;
    double cv_bank = 0.0;
};

// Headline statistics of the 113 x 61 consolidated credit network.
TopologyTarget consolidated_targets();

double max_relative_error(const SummaryStats& s, const TopologyTarget& t);

struct TopologyFit {
    GenConfig config;
    SummaryStats stats;
    double max_rel_error = 0.0;
    std::size_t trials = 0;
    bool within_tolerance = false;
};

// Deterministic random search over the two size dispersions and the seed.
// The link target is the integer closest to both N_F * kbar and N_B * hbar.
TopologyFit calibrate_topology(GenConfig base, const TopologyTarget& target, double tolerance = 0.02,
                               std::size_t max_trials = 4000);

}  // namespace credtopo
