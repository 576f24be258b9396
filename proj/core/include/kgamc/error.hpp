#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kgamc {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes that do not line up. The message names both shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A binary container (AMCD dataset, KGMC checkpoint) that cannot be decoded.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset);
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Malformed triple file line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Inconsistent configuration: bad hyperparameters, missing anchors, class mismatch.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Triple set that violates the relation signatures of the ontology.
class OntologyError : public Error {
 public:
  using Error::Error;
};

// Checkpoint that does not match the model it is loaded into.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

// Model state that lacks something an operation needs (e.g. frozen anchors).
class StateError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace kgamc
