#pragma once

#include <stdexcept>
#include <string>

namespace scte {

struct NonFiniteInput : std::runtime_error {
  explicit NonFiniteInput(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidDimension : std::runtime_error {
  explicit InvalidDimension(const std::string& what) : std::runtime_error(what) {}
};

// Smoothing threshold exceeded the whole spectrum; the design degenerates
// and the caller decides whether to abort or retain the top direction.
struct EmptySpectrum : std::runtime_error {
  explicit EmptySpectrum(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroLeverage : std::runtime_error {
  explicit ZeroLeverage(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroMatrix : std::runtime_error {
  explicit ZeroMatrix(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroCovariates : std::runtime_error {
  explicit ZeroCovariates(const std::string& what) : std::runtime_error(what) {}
};

// A unit's second potential outcome was requested within one design run.
struct OracleViolation : std::logic_error {
  explicit OracleViolation(const std::string& what) : std::logic_error(what) {}
};

struct DegeneratePartition : std::runtime_error {
  explicit DegeneratePartition(const std::string& what) : std::runtime_error(what) {}
};

struct CholeskyFailure : std::runtime_error {
  explicit CholeskyFailure(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyInput : std::runtime_error {
  explicit EmptyInput(const std::string& what) : std::runtime_error(what) {}
};

struct MissingGroundTruth : std::runtime_error {
  explicit MissingGroundTruth(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace scte
