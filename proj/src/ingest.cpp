#include "credtopo/ingest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "credtopo/errors.hpp"

namespace credtopo {

namespace {

struct CsvTable {
    std::string name;
    std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line, fields)
};

std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        auto field = line.substr(start, comma == std::string_view::npos ? line.size() - start
                                                                       : comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t'))
            field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t'))
            field.remove_suffix(1);
        out.emplace_back(field);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

CsvTable read_table(const std::string& text, const std::string& name,
                    const std::vector<std::string>& header) {
    CsvTable table{name, {}};
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
            line.erase(0, 3);
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        auto fields = split_fields(line);
        if (!saw_header) {
            if (fields != header) {
                std::string expected;
                for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
                throw MalformedRow(name, lineno, "expected header '" + expected + "'");
            }
            saw_header = true;
            continue;
        }
        if (fields.size() != header.size())
            throw MalformedRow(name, lineno,
                               "expected " + std::to_string(header.size()) + " fields, got " +
                                   std::to_string(fields.size()));
        table.rows.emplace_back(lineno, std::move(fields));
    }
    if (!saw_header) throw MalformedRow(name, 1, "missing header");
    return table;
}

double parse_number(const std::string& field, const std::string& file, std::size_t line) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value))
        throw MalformedRow(file, line, "'" + field + "' is not a finite number");
    return value;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fmt_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

Sample parse_sample_text(const std::string& edges_text, const std::string& firms_text,
                         const std::string& banks_text, std::string label) {
    const auto firms = read_table(firms_text, "firms.csv",
                                  {"firm_id", "s_bal", "total_assets", "leverage", "roa", "tangibility"});
    const auto banks = read_table(banks_text, "banks.csv",
                                  {"bank_id", "t_bal", "total_assets", "leverage", "roa"});
    const auto edges = read_table(edges_text, "edges.csv", {"firm_id", "bank_id", "amount"});

    std::vector<std::string> firm_ids, bank_ids;
    std::map<std::string, FirmAttributes> firm_attrs;
    std::map<std::string, BankAttributes> bank_attrs;

    for (const auto& [line, f] : firms.rows) {
        if (f[0].empty()) throw MalformedRow(firms.name, line, "empty firm_id");
        FirmAttributes a;
        a.balance_strength = parse_number(f[1], firms.name, line);
        a.total_assets = parse_number(f[2], firms.name, line);
        a.leverage = parse_number(f[3], firms.name, line);
        a.roa = parse_number(f[4], firms.name, line);
        a.tangibility = parse_number(f[5], firms.name, line);
        if (!firm_attrs.emplace(f[0], a).second) throw DuplicateAttributeRow(f[0]);
        firm_ids.push_back(f[0]);
    }
    for (const auto& [line, f] : banks.rows) {
        if (f[0].empty()) throw MalformedRow(banks.name, line, "empty bank_id");
        BankAttributes a;
        a.balance_strength = parse_number(f[1], banks.name, line);
        a.total_assets = parse_number(f[2], banks.name, line);
        a.leverage = parse_number(f[3], banks.name, line);
        a.roa = parse_number(f[4], banks.name, line);
        if (!bank_attrs.emplace(f[0], a).second) throw DuplicateAttributeRow(f[0]);
        bank_ids.push_back(f[0]);
    }

    std::map<std::string, std::size_t> firm_pos, bank_pos;
    for (std::size_t k = 0; k < firm_ids.size(); ++k) firm_pos[firm_ids[k]] = k;
    for (std::size_t k = 0; k < bank_ids.size(); ++k) bank_pos[bank_ids[k]] = k;

    Matrix w = Matrix::Zero(static_cast<Eigen::Index>(firm_ids.size()),
                            static_cast<Eigen::Index>(bank_ids.size()));
    for (const auto& [line, f] : edges.rows) {
        if (f[0].empty() || f[1].empty()) throw MalformedRow(edges.name, line, "empty identifier");
        const double amount = parse_number(f[2], edges.name, line);
        if (amount < 0.0) throw NegativeAmount(edges.name, line);
        auto fi = firm_pos.find(f[0]);
        if (fi == firm_pos.end()) throw MissingAttribute(f[0]);
        auto bj = bank_pos.find(f[1]);
        if (bj == bank_pos.end()) throw MissingAttribute(f[1]);
        w(static_cast<Eigen::Index>(fi->second), static_cast<Eigen::Index>(bj->second)) += amount;
    }

    Sample sample{BipartiteNetwork(std::move(firm_ids), std::move(bank_ids), std::move(w)),
                  std::move(firm_attrs), std::move(bank_attrs), std::move(label)};
    validate(sample);
    return sample;
}

Sample parse_sample(const std::filesystem::path& edges_path,
                    const std::filesystem::path& firm_attrs_path,
                    const std::filesystem::path& bank_attrs_path, std::string label) {
    return parse_sample_text(read_file(edges_path), read_file(firm_attrs_path),
                             read_file(bank_attrs_path), std::move(label));
}

std::string edges_csv(const Sample& sample) {
    const auto& net = sample.network;
    std::string out = "firm_id,bank_id,amount\n";
    for (std::size_t i = 0; i < net.n_firms(); ++i)
        for (std::size_t j = 0; j < net.n_banks(); ++j)
            if (net.linked(i, j))
                out += net.firm_ids()[i] + "," + net.bank_ids()[j] + "," +
                       fmt_double(net.weight(i, j)) + "\n";
    return out;
}

std::string firms_csv(const Sample& sample) {
    std::string out = "firm_id,s_bal,total_assets,leverage,roa,tangibility\n";
    for (const auto& id : sample.network.firm_ids()) {
        const auto& a = sample.firm_attrs.at(id);
        out += id + "," + fmt_double(a.balance_strength) + "," + fmt_double(a.total_assets) + "," +
               fmt_double(a.leverage) + "," + fmt_double(a.roa) + "," + fmt_double(a.tangibility) +
               "\n";
    }
    return out;
}

std::string banks_csv(const Sample& sample) {
    std::string out = "bank_id,t_bal,total_assets,leverage,roa\n";
    for (const auto& id : sample.network.bank_ids()) {
        const auto& a = sample.bank_attrs.at(id);
        out += id + "," + fmt_double(a.balance_strength) + "," + fmt_double(a.total_assets) + "," +
               fmt_double(a.leverage) + "," + fmt_double(a.roa) + "\n";
    }
    return out;
}

void write_sample(const Sample& sample, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto dump = [&](const char* name, const std::string& text) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw InvalidArgument("cannot write '" + (dir / name).string() + "'");
        out << text;
    };
    dump("edges.csv", edges_csv(sample));
    dump("firms.csv", firms_csv(sample));
    dump("banks.csv", banks_csv(sample));
}

FilteredSample apply_consistency_filter(const Sample& sample, ConsistencyBand band) {
    const auto& net = sample.network;
    const auto strengths = derived_strengths(net);

    FilterReport report;
    report.band = band;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < net.n_firms(); ++i) {
        const auto& id = net.firm_ids()[i];
        const double s_net = strengths.firm[i];
        const double s_bal = sample.firm_attrs.at(id).balance_strength;
        if (s_bal == 0.0) {
            if (s_net == 0.0)
                keep.push_back(i);
            else
                report.dropped_firms.push_back({id, std::nullopt, "undefined ratio"});
            continue;
        }
        const double ratio = s_net / s_bal;
        if (ratio < band.lower)
            report.dropped_firms.push_back({id, ratio, "incomplete extraction"});
        else if (ratio > band.upper)
            report.dropped_firms.push_back({id, ratio, "inconsistent Nota Integrativa"});
        else
            keep.push_back(i);
    }
    if (keep.empty()) throw InvalidArgument("consistency filter removed every firm");
    report.kept_firms = keep.size();

    std::vector<std::string> firm_ids;
    std::map<std::string, FirmAttributes> firm_attrs;
    Matrix w(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(net.n_banks()));
    for (std::size_t r = 0; r < keep.size(); ++r) {
        const auto& id = net.firm_ids()[keep[r]];
        firm_ids.push_back(id);
        firm_attrs.emplace(id, sample.firm_attrs.at(id));
        w.row(static_cast<Eigen::Index>(r)) = net.weights().row(static_cast<Eigen::Index>(keep[r]));
    }
    for (Eigen::Index j = 0; j < w.cols(); ++j)
        if ((w.col(j).array() > 0.0).count() == 0)
            report.isolated_banks.push_back(net.bank_ids()[static_cast<std::size_t>(j)]);

    Sample out{BipartiteNetwork(std::move(firm_ids), net.bank_ids(), std::move(w)),
               std::move(firm_attrs), sample.bank_attrs, sample.label};
    return {std::move(out), std::move(report)};
}

}  // namespace credtopo
