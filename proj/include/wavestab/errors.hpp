#pragma once

#include <stdexcept>
#include <string>

namespace wavestab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidField : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Tail or spectral-decay tolerance violated.
class ResolutionError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double last_residual)
        : Error(what), last_residual(last_residual) {}
    double last_residual;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class NotDifferentiable : public Error {
public:
    using Error::Error;
};

class NearSingular : public Error {
public:
    using Error::Error;
};

class AssemblyError : public Error {
public:
    using Error::Error;
};

class TrackingError : public Error {
public:
    using Error::Error;
};

class BracketingError : public Error {
public:
    using Error::Error;
};

} // namespace wavestab
