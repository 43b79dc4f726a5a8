#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace credtopo {

// Base for every failure raised by the library. `kind()` is a stable
// machine-readable tag used in manifests and CLI messages.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class InvalidNetwork : public Error {
public:
    explicit InvalidNetwork(const std::string& what) : Error("InvalidNetwork", what) {}
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error("InvalidArgument", what) {}
};

// ---- ingest -------------------------------------------------------------

class MissingAttribute : public Error {
public:
    explicit MissingAttribute(std::string node_id)
        : Error("MissingAttribute", "no attribute record for node '" + node_id + "'"),
          node_id_(std::move(node_id)) {}
    const std::string& node_id() const noexcept { return node_id_; }

private:
    std::string node_id_;
};

class MalformedRow : public Error {
public:
    MalformedRow(std::string file, std::size_t line, const std::string& why)
        : Error("MalformedRow", file + ":" + std::to_string(line) + ": " + why),
          line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class NegativeAmount : public Error {
public:
    NegativeAmount(std::string file, std::size_t line)
        : Error("NegativeAmount", file + ":" + std::to_string(line) + ": negative loan amount"),
          line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DuplicateAttributeRow : public Error {
public:
    explicit DuplicateAttributeRow(std::string node_id)
        : Error("DuplicateAttributeRow", "duplicate attribute row for '" + node_id + "'"),
          node_id_(std::move(node_id)) {}
    const std::string& node_id() const noexcept { return node_id_; }

private:
    std::string node_id_;
};

// ---- netstats -----------------------------------------------------------

class EmptyInput : public Error {
public:
    explicit EmptyInput(const std::string& what) : Error("EmptyInput", what) {}
};

class ConstantSequence : public Error {
public:
    ConstantSequence() : Error("ConstantSequence", "correlation undefined for a constant sequence") {}
};

class NoValidEntries : public Error {
public:
    NoValidEntries() : Error("NoValidEntries", "every empirical entry is zero") {}
};

class EmptyNetwork : public Error {
public:
    EmptyNetwork() : Error("EmptyNetwork", "network has no links") {}
};

// ---- nullmodel ----------------------------------------------------------

class TargetOutOfRange : public Error {
public:
    explicit TargetOutOfRange(const std::string& what) : Error("TargetOutOfRange", what) {}
};

class NonpositiveFitness : public Error {
public:
    explicit NonpositiveFitness(const std::string& what) : Error("NonpositiveFitness", what) {}
};

class NonGraphicalTargets : public Error {
public:
    explicit NonGraphicalTargets(const std::string& what) : Error("NonGraphicalTargets", what) {}
};

class NoConvergence : public Error {
public:
    NoConvergence(std::size_t iterations, double residual)
        : Error("NoConvergence", "no convergence after " + std::to_string(iterations) +
                                     " iterations (residual " + std::to_string(residual) + ")"),
          iterations_(iterations), residual_(residual) {}
    std::size_t iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    std::size_t iterations_;
    double residual_;
};

// ---- econometrics -------------------------------------------------------

class MissingNullModel : public Error {
public:
    explicit MissingNullModel(const std::string& what) : Error("MissingNullModel", what) {}
};

class AllRowsDropped : public Error {
public:
    AllRowsDropped() : Error("AllRowsDropped", "design has no estimable rows") {}
};

class Separation : public Error {
public:
    explicit Separation(const std::string& what) : Error("Separation", what) {}
};

class SingularInformation : public Error {
public:
    SingularInformation() : Error("SingularInformation", "information matrix is singular") {}
};

class RankDeficient : public Error {
public:
    explicit RankDeficient(std::vector<std::string> columns)
        : Error("RankDeficient", "design is rank deficient in: " + join(columns)),
          columns_(std::move(columns)) {}
    const std::vector<std::string>& columns() const noexcept { return columns_; }

private:
    static std::string join(const std::vector<std::string>& cols) {
        std::string out;
        for (const auto& c : cols) {
            if (!out.empty()) out += ", ";
            out += c;
        }
        return out;
    }
    std::vector<std::string> columns_;
};

class SingletonGroupsOnly : public Error {
public:
    SingletonGroupsOnly() : Error("SingletonGroupsOnly", "every group has a single observation") {}
};

class Absorbed : public Error {
public:
    explicit Absorbed(const std::string& column)
        : Error("Absorbed", "column '" + column + "' is absorbed by the group fixed effects") {}
};

class DegenerateDensity : public Error {
public:
    explicit DegenerateDensity(double density)
        : Error("DegenerateDensity", "generated density " + std::to_string(density) + " is degenerate") {}
};

}  // namespace credtopo
