#pragma once

#include <stdexcept>
#include <string>

namespace kcm {

/// Base class for all errors thrown by this library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A domain value violates a type invariant (duplicate card, rank out of range, ...).
/// Messages name the offending index where one exists.
class validation_error : public error {
public:
    using error::error;
};

/// A configuration is unusable (k > n, unknown strategy id, strategy used
/// outside its defined parameter range, ...).
class config_error : public error {
public:
    using error::error;
};

/// A computation was requested beyond its feasibility guard.
class size_error : public error {
public:
    using error::error;
};

/// A runtime contract was broken (e.g. a strategy returned a card that was
/// not among its offered draws).
class contract_violation : public error {
public:
    using error::error;
};

} // namespace kcm
