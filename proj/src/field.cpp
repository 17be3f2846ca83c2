#include "helmscale/field.hpp"

#include <algorithm>
#include <cmath>

#include "helmscale/error.hpp"

namespace helmscale {

Field::Field(int nx, int ny, int ns, int s_halo, WallRule rule)
    : nx_(nx), ny_(ny), ns_(ns), hs_(s_halo), rule_(rule) {
  if (nx < 0 || ny < 0 || ns < 0 || s_halo < 0 || s_halo > 1)
    throw ShapeError("invalid field shape");
  sy_ = static_cast<std::size_t>(nx + 2);
  sk_ = sy_ * static_cast<std::size_t>(ny + 2);
  data_.assign(sk_ * static_cast<std::size_t>(ns + 2 * s_halo), 0.0);
}

void Field::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Field::interior_finite() const noexcept {
  for (int k = 0; k < ns_; ++k)
    for (int j = 0; j < ny_; ++j)
      for (int i = 0; i < nx_; ++i)
        if (!std::isfinite((*this)(i, j, k))) return false;
  return true;
}

void Field::copy_interior(const Field& from) {
  if (!same_interior(from)) throw ShapeError("copy_interior: interior shapes differ");
  for (int k = 0; k < ns_; ++k)
    for (int j = 0; j < ny_; ++j)
      for (int i = 0; i < nx_; ++i) (*this)(i, j, k) = from(i, j, k);
}

std::vector<double> Field::interior() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(nx_) * ny_ * ns_);
  for (int k = 0; k < ns_; ++k)
    for (int j = 0; j < ny_; ++j)
      for (int i = 0; i < nx_; ++i) out.push_back((*this)(i, j, k));
  return out;
}

}  // namespace helmscale
