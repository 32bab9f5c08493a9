#pragma once

#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bregproj {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Machine epsilon used by every rank / zero-eigenvalue threshold.
inline constexpr double kRankEpsilon = 2.2e-16;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A point lies outside the (interior of the) domain an operation requires.
class DomainError : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// An iterative inner solve did not reach its tolerance.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// The 1-D dual root could not be bracketed inside dom(phi*).
class BracketError : public ConvergenceError {
public:
    using ConvergenceError::ConvergenceError;
};

} // namespace bregproj
