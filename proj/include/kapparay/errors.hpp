#pragma once

#include <stdexcept>
#include <string>

namespace kapparay {

/// Query outside the declared domain of a field or bathymetry.
class DomainError : public std::out_of_range {
public:
    DomainError(const std::string& what, std::string coordinate, double value)
        : std::out_of_range(what), coordinate_(std::move(coordinate)), value_(value) {}

    const std::string& coordinate() const noexcept { return coordinate_; }
    double value() const noexcept { return value_; }

private:
    std::string coordinate_;
    double value_;
};

/// |p| >= n: the ray has turned vertical and the range parametrization fails.
class SteepRayError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Ray is not moving into the boundary it is reflected from.
class GeometryError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Vertical incident/reflected ray or tangential hit; the jump matrix is singular there.
class SingularReflectionError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Perturbed rays of a finite-difference stencil took a different bounce sequence.
class PerturbationTooLarge : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace kapparay
