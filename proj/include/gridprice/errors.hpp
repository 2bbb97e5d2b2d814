#pragma once

#include <stdexcept>
#include <string>

namespace gridprice {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Case data failed validation or could not be parsed.
class InvalidCase : public Error {
public:
    using Error::Error;
};

/// Reduced susceptance matrix is singular to working precision.
class IllConditionedNetwork : public Error {
public:
    IllConditionedNetwork() : Error("ill-conditioned network") {}
};

/// The dispatch LP has no feasible point for the requested demand.
///
/// `infeasibility()` is the optimal phase-1 objective (sum of artificial
/// variables), a positive number certifying that no dispatch exists.
class UnservableDemand : public Error {
public:
    explicit UnservableDemand(double infeasibility)
        : Error("demand unservable (phase-1 infeasibility " + std::to_string(infeasibility) + ")"),
          infeasibility_(infeasibility) {}

    double infeasibility() const noexcept { return infeasibility_; }

private:
    double infeasibility_;
};

/// Caller violated a documented precondition (dimension mismatch, wrong status, ...).
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Invariant broken inside the library. Should never escape in practice.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace gridprice
