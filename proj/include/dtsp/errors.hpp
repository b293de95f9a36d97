#pragma once

#include <stdexcept>
#include <string>

namespace dtsp {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Parameter combination the closed forms do not cover.
class UnsupportedError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Search space has no finite bound (zero per-item or per-time cost).
class UnboundedSearchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or invalid run configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dtsp
