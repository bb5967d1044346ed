#pragma once

#include <stdexcept>
#include <string>

namespace nstori {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid forcing description or command configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Start state lies on the switching plane with (numerically) zero velocity.
class DegenerateStart : public Error {
public:
    using Error::Error;
};

/// A crossing of x = 0 with |y| below the transversality threshold.
class DegenerateCrossing : public Error {
public:
    using Error::Error;
};

/// The forcing fails the zero-average gate required by the torus construction.
class NonZeroAverage : public Error {
public:
    using Error::Error;
};

class UnboundedRepresentation : public Error {
public:
    using Error::Error;
};

} // namespace nstori
