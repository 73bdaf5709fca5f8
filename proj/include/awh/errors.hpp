#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace awh {

// Error taxonomy. Every throw site uses one of these so the CLI can map
// failures onto its exit codes (2 = inadmissible input, 3 = numerical).
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

// Parameter set rejected; carries the names of the offending products.
struct Inadmissible : Error {
    std::vector<std::string> violations;
    explicit Inadmissible(const std::string& msg,
                          std::vector<std::string> viol = {})
        : Error(msg), violations(std::move(viol)) {}
};

struct Singular : Error {
    explicit Singular(const std::string& msg) : Error(msg) {}
};

struct NonConvergent : Error {
    explicit NonConvergent(const std::string& msg) : Error(msg) {}
};

struct EmptyDomain : Error {
    explicit EmptyDomain(const std::string& msg) : Error(msg) {}
};

struct UnsupportedPoint : Error {
    explicit UnsupportedPoint(const std::string& msg) : Error(msg) {}
};

struct HypothesisViolated : Error {
    explicit HypothesisViolated(const std::string& msg) : Error(msg) {}
};

struct InsufficientPaths : Error {
    explicit InsufficientPaths(const std::string& msg) : Error(msg) {}
};

}  // namespace awh
