#include "affine/cloud.hpp"

namespace affine {

SampleCloud SampleCloud::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > size()) throw std::out_of_range("SampleCloud::slice: bad range");
  SampleCloud out;
  out.shape = shape;
  out.seed = seed;
  out.provenance = provenance;
  const auto d = static_cast<std::size_t>(dim());
  out.data.assign(data.begin() + static_cast<std::ptrdiff_t>(begin * d),
                  data.begin() + static_cast<std::ptrdiff_t>(end * d));
  return out;
}

SampleCloud SampleCloud::transformed(const Matrix& a) const {
  if (a.rows() != shape.n || a.cols() != shape.n) throw std::invalid_argument("SampleCloud::transformed: A must be n x n");
  SampleCloud out = *this;
  for (std::size_t i = 0; i < size(); ++i) shape.left_multiply(a, point(i), out.point(i));
  return out;
}

}  // namespace affine
