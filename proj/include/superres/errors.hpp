#pragma once

#include <stdexcept>
#include <string>

namespace superres {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument or a type invariant was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// The feasible domain is malformed (negative radius, shape mismatch).
class InfeasibleDomain : public Error {
public:
    using Error::Error;
};

/// No set of K frequencies with the requested wrap-around separation exists.
class InfeasibleSeparation : public Error {
public:
    using Error::Error;
};

/// An iterative method stopped before reaching its tolerance.
class NonConvergence : public Error {
public:
    using Error::Error;
};

/// Vandermonde decomposition requested for a full-rank Toeplitz matrix.
class FullRank : public Error {
public:
    using Error::Error;
};

/// The recovered atoms do not reproduce the input Toeplitz matrix.
class ReconstructionFailure : public Error {
public:
    using Error::Error;
};

/// a(f)^H W a(f) vanishes, so the Capon weight is undefined at f.
class DegenerateWeight : public Error {
public:
    using Error::Error;
};

}  // namespace superres
