// SPDX-License-Identifier: MIT
#pragma once

#include <stdexcept>
#include <string>

namespace alfeld {

/// Argument outside the admissible range of an operation.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Degenerate or malformed geometry.
struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Mesh cells do not meet face-to-face.
struct ConformityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A rank, dimension or unisolvence certificate failed.
struct CertificationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A solve or factorization failed or left a residual above tolerance.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace alfeld
