#ifndef GSOV_ERRORS_HPP
#define GSOV_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gsov {

/// Argument outside the domain of a function (z = 0, u = 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Invalid parameters (|q| >= 1, inadmissible weights, mismatched sizes).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Evaluation hit (or came within tolerance of) a pole.
class PoleError : public DomainError {
public:
    using DomainError::DomainError;
};

/// A linear solve, fit or root search lost too much accuracy to be trusted.
class NumericalBreakdown : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gsov

#endif
