#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace groupcos {

/// Base class for every error this library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two vectors (or a vector and a group/basis) have different dimensions.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// An operation that needs a direction was given the zero vector.
class ZeroVector : public Error {
 public:
  using Error::Error;
};

/// The Gram matrix A*A^T is numerically singular; callers should fall back
/// to the orthonormal-basis projection path.
class SingularGram : public Error {
 public:
  using Error::Error;
};

/// A file could not be opened or read at the OS level.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_ = 0;
};

/// An embedding file yielded no usable entries.
class EmptyTable : public Error {
 public:
  using Error::Error;
};

/// No token of a sentence was found in the embedding table.
class EmptySentenceGroup : public Error {
 public:
  using Error::Error;
};

/// A class label outside {-1, 0, 1}.
class InvalidClass : public Error {
 public:
  explicit InvalidClass(const std::string& what) : Error(what) {}
  InvalidClass(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_ = 0;
};

/// Not enough records to split into train and test parts.
class TooFewRecords : public Error {
 public:
  using Error::Error;
};

/// Threshold training cannot proceed (a required gold class is absent).
class DegenerateTraining : public Error {
 public:
  using Error::Error;
};

/// A proximity value lies outside [0, 1].
class InvalidProximity : public Error {
 public:
  using Error::Error;
};

/// Gold and predicted label sequences differ in length.
class LengthMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace groupcos
