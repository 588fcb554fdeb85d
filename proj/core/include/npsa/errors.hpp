#pragma once

#include <stdexcept>
#include <string>

namespace npsa {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid experiment setup or out-of-domain argument.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Basis construction failure (bad family/interval pair, ill-conditioned orthogonalization).
class BasisError : public Error {
public:
    BasisError(const std::string& what, double condition_estimate = 0.0)
        : Error(what), condition_estimate_(condition_estimate) {}
    double condition_estimate() const noexcept { return condition_estimate_; }

private:
    double condition_estimate_;
};

class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double error_estimate)
        : Error(what), error_estimate_(error_estimate) {}
    double error_estimate() const noexcept { return error_estimate_; }

private:
    double error_estimate_;
};

/// Degenerate spherical geometry: radius mismatch, antipodal or parallel inputs,
/// or an affine plane the sphere cannot reach.
class GeometryError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent configuration file.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace npsa
