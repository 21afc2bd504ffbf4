#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "affine/numeric.hpp"

namespace affine {

/// Samples of a random vector (m = 1) or random n x m matrix, stored as flat
/// column-stacked rows of length n*m.
struct SampleCloud {
  MatrixShape shape;
  Vec data;
  std::uint64_t seed = 0;
  std::string provenance;

  int dim() const { return shape.flat_dim(); }
  std::size_t size() const { return dim() ? data.size() / static_cast<std::size_t>(dim()) : 0; }
  std::span<const double> point(std::size_t i) const {
    return {data.data() + i * static_cast<std::size_t>(dim()), static_cast<std::size_t>(dim())};
  }
  std::span<double> point(std::size_t i) {
    return {data.data() + i * static_cast<std::size_t>(dim()), static_cast<std::size_t>(dim())};
  }

  /// Rows [begin, end) as a cloud with the same shape and provenance.
  SampleCloud slice(std::size_t begin, std::size_t end) const;
  /// Applies x -> A x (A acting on every column for matrix samples).
  SampleCloud transformed(const Matrix& a) const;
};

}  // namespace affine
