#pragma once

#include <stdexcept>
#include <string>

namespace bayescrr {

/// Input that violates a documented precondition (bad data, bad config).
class validation_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation that cannot produce a finite, meaningful result.
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Calibration window without at least one up and one down move.
class degenerate_window_error : public validation_error {
public:
    explicit degenerate_window_error(const std::string& what)
        : validation_error("degenerate window: " + what) {}
};

namespace detail {

inline void require(bool condition, const char* message) {
    if (!condition) throw validation_error(message);
}

}  // namespace detail
}  // namespace bayescrr
