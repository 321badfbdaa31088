#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace spiralflow {

/// Argument outside the domain of a closed-form relation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Requested radial flow does not exist on the subsonic branch.
class RegimeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two routes that must agree (ODE vs algebra, root vs bracket) disagreed.
class ConsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MeshQualityError : public std::runtime_error {
public:
    MeshQualityError(const std::string& what, long triangle)
        : std::runtime_error(what), triangle_(triangle) {}

    long triangle() const { return triangle_; }

private:
    long triangle_;
};

class AssemblyError : public std::runtime_error {
public:
    AssemblyError(const std::string& what, long triangle)
        : std::runtime_error(what), triangle_(triangle) {}

    long triangle() const { return triangle_; }

private:
    long triangle_;
};

/// Newton iteration hit its budget. Carries the last nodal iterate.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, std::vector<double> iterate)
        : std::runtime_error(what), iterate_(std::move(iterate)) {}

    const std::vector<double>& iterate() const { return iterate_; }

private:
    std::vector<double> iterate_;
};

/// The removability predicate switched back on along an initial grid.
class MonotonicityError : public std::runtime_error {
public:
    MonotonicityError(const std::string& what, double a, double b, double c)
        : std::runtime_error(what), triple_{a, b, c} {}

    const double* triple() const { return triple_; }

private:
    double triple_[3];
};

} // namespace spiralflow
