#pragma once

// CSV ingestion and the firm consistency-band filter.
//
//   edges.csv  firm_id,bank_id,amount
//   firms.csv  firm_id,s_bal,total_assets,leverage,roa,tangibility
//   banks.csv  bank_id,t_bal,total_assets,leverage,roa
//
// UTF-8, '.' decimal point, no thousands separators, no quoting.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "credtopo/network.hpp"

namespace credtopo {

struct RawEdgeRow {
    std::string firm_id;
    std::string bank_id;
    double amount = 0.0;
};

// Node order follows the attribute files; duplicate (firm, bank) rows are
// summed. Throws MissingAttribute, MalformedRow, NegativeAmount,
// DuplicateAttributeRow.
Sample parse_sample(const std::filesystem::path& edges_path,
                    const std::filesystem::path& firm_attrs_path,
                    const std::filesystem::path& bank_attrs_path, std::string label = "");

// Same as parse_sample but from in-memory CSV text (used by tests and the
// synthetic generator round trip).
Sample parse_sample_text(const std::string& edges_csv, const std::string& firms_csv,
                         const std::string& banks_csv, std::string label = "");

// Writes the three CSV files; `parse_sample` on the result reproduces the sample.
void write_sample(const Sample& sample, const std::filesystem::path& dir);
std::string edges_csv(const Sample& sample);
std::string firms_csv(const Sample& sample);
std::string banks_csv(const Sample& sample);

struct ConsistencyBand {
    double lower = 1e-3;
    double upper = 1e3;
};

struct DroppedFirm {
    std::string firm_id;
    std::optional<double> ratio;  // s_net / s_bal; empty when undefined
    std::string reason;
};

struct FilterReport {
    std::size_t kept_firms = 0;
    std::vector<DroppedFirm> dropped_firms;
    ConsistencyBand band;
    std::vector<std::string> isolated_banks;  // degree 0 after filtering, retained
};

struct FilteredSample {
    Sample sample;
    FilterReport report;
};

// Keeps firms whose s_net/s_bal lies in the closed band. s_bal = s_net = 0
// counts as ratio 1; s_bal = 0 with s_net > 0 is an undefined ratio and is
// dropped. Banks are never removed.
FilteredSample apply_consistency_filter(const Sample& sample, ConsistencyBand band = {});

}  // namespace credtopo
