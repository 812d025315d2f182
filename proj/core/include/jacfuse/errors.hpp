#pragma once

#include <stdexcept>
#include <string>

namespace jacfuse {

// Base class for every error this library throws.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operand shapes do not conform (matmul mismatch, K != 2 where required, ...).
struct DimensionError : Error {
  using Error::Error;
};

// A scalar argument is outside its admissible range (gamma >= 1, negative
// probabilities, label out of range, ...).
struct DomainError : Error {
  using Error::Error;
};

// Pivot fell below the relative tolerance during LU/Gauss elimination.
struct SingularMatrix : Error {
  using Error::Error;
};

// Jacobi eigensolver failed to reduce the off-diagonal norm within the
// sweep cap.
struct NoConvergence : Error {
  using Error::Error;
};

// An eigenvalue sum lambda_i + mu_j of the Sylvester operands fell below the
// uniqueness floor: the two operand spectra effectively share an eigenvalue.
struct DegenerateSpectrum : Error {
  using Error::Error;
};

// Linear normalization received a vector with (numerically) zero total mass.
struct ZeroMass : Error {
  using Error::Error;
};

// Frequency estimation with smoothing 0 saw a class with zero occurrences.
struct EmptyClass : Error {
  using Error::Error;
};

// Config file / CLI argument parsing failure; message carries line context.
struct ParseError : Error {
  using Error::Error;
};

// File could not be opened / read / written.
struct IoError : Error {
  using Error::Error;
};

}  // namespace jacfuse
