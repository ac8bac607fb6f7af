#ifndef LEVYDENS_ERRORS_HPP
#define LEVYDENS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace levydens {

// Base for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Argument outside the mathematical domain of an operation (x < 0, t <= 0, ...).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

// Derivative requested at a point where it does not exist (cusp at the origin).
class SingularityError : public Error {
public:
    explicit SingularityError(const std::string& msg) : Error(msg) {}
};

// Complex recursion left the principal-branch half-plane; result would be garbage.
class BranchError : public Error {
public:
    explicit BranchError(const std::string& msg) : Error(msg) {}
};

// Period summation hit its block limit.  Carries the partial answer so callers
// can decide whether it is still usable.
class NoConvergenceError : public Error {
public:
    NoConvergenceError(const std::string& msg, double partial, double err_est, long k_used)
        : Error(msg), partial(partial), err_est(err_est), k_used(k_used) {}
    double partial;
    double err_est;
    long k_used;
};

// Tail integral failed to contract across panel doublings.
class DivergenceError : public Error {
public:
    explicit DivergenceError(const std::string& msg) : Error(msg) {}
};

// Adaptive quadrature could not meet its tolerance.
class ToleranceNotMetError : public Error {
public:
    explicit ToleranceNotMetError(const std::string& msg) : Error(msg) {}
};

// Operation requires a real (symmetric) symbol.
class NotSymmetricError : public Error {
public:
    explicit NotSymmetricError(const std::string& msg) : Error(msg) {}
};

// A regime had too few samples for a meaningful fit.
class InsufficientCoverageError : public Error {
public:
    explicit InsufficientCoverageError(const std::string& msg) : Error(msg) {}
};

// Convolution grid cannot support the requested tolerance.
class GridTooCoarseError : public Error {
public:
    explicit GridTooCoarseError(const std::string& msg) : Error(msg) {}
};

// Mass accounting needs fitted envelope constants that are not available.
class EnvelopeConstantsMissingError : public Error {
public:
    explicit EnvelopeConstantsMissingError(const std::string& msg) : Error(msg) {}
};

// Bad CLI usage (maps to exit code 2).
class UsageError : public Error {
public:
    explicit UsageError(const std::string& msg) : Error(msg) {}
};

} // namespace levydens

#endif
