#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace facf {

/// Caller passed something that violates an operation precondition.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A run configuration value or file is invalid.
class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// Requested item (feature kind, frame, file) does not exist.
class NotFound : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input file is structurally malformed.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The target patch fell completely outside the image.
class TrackingDegenerate : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An internal invariant was broken (negative fitness, corrupted state).
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

namespace detail {

template <typename E>
inline void require(bool cond, std::string_view what)
{
    if (!cond)
        throw E(std::string(what));
}

} // namespace detail

} // namespace facf
