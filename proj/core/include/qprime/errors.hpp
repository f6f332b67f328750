#pragma once

#include <stdexcept>
#include <string>

namespace qprime {

// Error taxonomy mirrored by the CLI exit codes (see exit_code()).
//
//   ParseError    -- malformed input files, unknown fields, Hermitian
//                    symmetry violations.
//   GeometryError -- the domain itself is unusable: boundary point not
//                    found, Levi form not positive, degenerate gradient.
//   NumericError  -- tolerance or convergence failures inside an
//                    otherwise well-posed computation.

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

class GeometryError : public std::runtime_error {
 public:
  explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitParse = 2;
inline constexpr int kExitGeometry = 3;
inline constexpr int kExitNumeric = 4;

}  // namespace qprime
