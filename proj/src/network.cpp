#include "credtopo/network.hpp"

#include <cmath>

#include "credtopo/errors.hpp"

namespace credtopo {

namespace {

std::map<std::string, std::size_t> index_ids(const std::vector<std::string>& ids,
                                             const char* side) {
    std::map<std::string, std::size_t> pos;
    for (std::size_t k = 0; k < ids.size(); ++k) {
        if (ids[k].empty())
            throw InvalidNetwork(std::string("empty ") + side + " identifier at position " +
                                 std::to_string(k));
        if (!pos.emplace(ids[k], k).second)
            throw InvalidNetwork(std::string("duplicate ") + side + " identifier '" + ids[k] + "'");
    }
    return pos;
}

}  // namespace

BipartiteNetwork::BipartiteNetwork(std::vector<std::string> firm_ids,
                                   std::vector<std::string> bank_ids, Matrix weights)
    : firm_ids_(std::move(firm_ids)), bank_ids_(std::move(bank_ids)), weights_(std::move(weights)) {
    if (firm_ids_.empty() || bank_ids_.empty())
        throw InvalidNetwork("network needs at least one firm and one bank");
    if (static_cast<std::size_t>(weights_.rows()) != firm_ids_.size() ||
        static_cast<std::size_t>(weights_.cols()) != bank_ids_.size())
        throw InvalidNetwork("weight matrix shape does not match the node registries");
    firm_pos_ = index_ids(firm_ids_, "firm");
    bank_pos_ = index_ids(bank_ids_, "bank");
    for (Eigen::Index i = 0; i < weights_.rows(); ++i) {
        for (Eigen::Index j = 0; j < weights_.cols(); ++j) {
            const double w = weights_(i, j);
            if (!std::isfinite(w) || w < 0.0)
                throw InvalidNetwork("weight (" + std::to_string(i) + "," + std::to_string(j) +
                                     ") must be finite and non-negative");
            if (w > 0.0) ++link_count_;
        }
    }
}

Matrix BipartiteNetwork::adjacency() const {
    return (weights_.array() > 0.0).cast<double>().matrix();
}

std::size_t BipartiteNetwork::firm_index(const std::string& id) const {
    auto it = firm_pos_.find(id);
    return it == firm_pos_.end() ? npos : it->second;
}

std::size_t BipartiteNetwork::bank_index(const std::string& id) const {
    auto it = bank_pos_.find(id);
    return it == bank_pos_.end() ? npos : it->second;
}

Degrees derived_degrees(const BipartiteNetwork& net) {
    Degrees d{std::vector<int>(net.n_firms(), 0), std::vector<int>(net.n_banks(), 0)};
    for (std::size_t i = 0; i < net.n_firms(); ++i)
        for (std::size_t j = 0; j < net.n_banks(); ++j)
            if (net.linked(i, j)) {
                ++d.firm[i];
                ++d.bank[j];
            }
    return d;
}

Strengths derived_strengths(const BipartiteNetwork& net) {
    Strengths s{std::vector<double>(net.n_firms(), 0.0), std::vector<double>(net.n_banks(), 0.0)};
    const Matrix& w = net.weights();
    for (std::size_t i = 0; i < net.n_firms(); ++i) s.firm[i] = w.row(i).sum();
    for (std::size_t j = 0; j < net.n_banks(); ++j) s.bank[j] = w.col(j).sum();
    return s;
}

void validate(const FirmAttributes& a, const std::string& id) {
    const bool finite = std::isfinite(a.balance_strength) && std::isfinite(a.total_assets) &&
                        std::isfinite(a.leverage) && std::isfinite(a.roa) &&
                        std::isfinite(a.tangibility);
    if (!finite) throw InvalidArgument("firm '" + id + "': non-finite attribute");
    if (a.balance_strength < 0.0) throw InvalidArgument("firm '" + id + "': s_bal < 0");
    if (a.total_assets <= 0.0) throw InvalidArgument("firm '" + id + "': total_assets <= 0");
    if (a.tangibility < 0.0 || a.tangibility > 1.0)
        throw InvalidArgument("firm '" + id + "': tangibility outside [0,1]");
}

void validate(const BankAttributes& a, const std::string& id) {
    const bool finite = std::isfinite(a.balance_strength) && std::isfinite(a.total_assets) &&
                        std::isfinite(a.leverage) && std::isfinite(a.roa);
    if (!finite) throw InvalidArgument("bank '" + id + "': non-finite attribute");
    if (a.balance_strength < 0.0) throw InvalidArgument("bank '" + id + "': t_bal < 0");
    if (a.total_assets <= 0.0) throw InvalidArgument("bank '" + id + "': total_assets <= 0");
}

std::vector<FirmAttributes> Sample::firms_in_order() const {
    std::vector<FirmAttributes> out;
    out.reserve(network.n_firms());
    for (const auto& id : network.firm_ids()) out.push_back(firm_attrs.at(id));
    return out;
}

std::vector<BankAttributes> Sample::banks_in_order() const {
    std::vector<BankAttributes> out;
    out.reserve(network.n_banks());
    for (const auto& id : network.bank_ids()) out.push_back(bank_attrs.at(id));
    return out;
}

void validate(const Sample& sample) {
    const auto& net = sample.network;
    for (const auto& id : net.firm_ids()) {
        auto it = sample.firm_attrs.find(id);
        if (it == sample.firm_attrs.end()) throw MissingAttribute(id);
        validate(it->second, id);
    }
    for (const auto& id : net.bank_ids()) {
        auto it = sample.bank_attrs.find(id);
        if (it == sample.bank_attrs.end()) throw MissingAttribute(id);
        validate(it->second, id);
    }
    for (const auto& [id, _] : sample.firm_attrs)
        if (net.firm_index(id) == BipartiteNetwork::npos)
            throw InvalidArgument("orphan firm attribute record '" + id + "'");
    for (const auto& [id, _] : sample.bank_attrs)
        if (net.bank_index(id) == BipartiteNetwork::npos)
            throw InvalidArgument("orphan bank attribute record '" + id + "'");
}

}  // namespace credtopo
