#pragma once

#include <stdexcept>
#include <string>

namespace entrofin {

/// Base class for all library errors.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Input file could not be parsed (wrong header, bad row, malformed number).
class format_error : public error {
public:
    using error::error;
};

/// Input parsed but the data violates an invariant (non-positive price, duplicate date).
class data_error : public error {
public:
    using error::error;
};

/// Too few observations for the requested computation.
class insufficient_data_error : public error {
public:
    using error::error;
};

/// Two series that must share dates do not.
class alignment_error : public error {
public:
    using error::error;
};

/// Argument outside the mathematical domain of the operation.
class domain_error : public error {
public:
    using error::error;
};

/// Degenerate input distribution (zero variance, zero-width support).
class degenerate_error : public error {
public:
    using error::error;
};

/// Invalid run configuration (missing benchmark, bad generator parameters).
class config_error : public error {
public:
    using error::error;
};

/// Internal consistency check failed; indicates a bug, not bad input.
class internal_error : public error {
public:
    using error::error;
};

} // namespace entrofin
