#pragma once

#include <cstddef>
#include <vector>

namespace mln {

/* Uniform periodic cube [-L/2, L/2)^3 with n samples per axis.
 * Site (ix,iy,iz) lives at x = (i - n/2)*h, h = L/n, and linear index
 * ix + n*(iy + n*iz)  (x fastest).  Wavenumbers follow the usual DFT
 * layout k_m = 2*pi*mt/L with mt = m for m <= n/2 and m - n otherwise. */
struct Grid3 {
  int n = 0;
  double box_len = 0.0;
  double spacing = 0.0;

  static Grid3 create(int n, double box_len);

  std::size_t size() const { return std::size_t(n) * n * n; }
  double cell_volume() const { return spacing * spacing * spacing; }

  std::size_t index(int ix, int iy, int iz) const {
    return std::size_t(ix) + std::size_t(n) * (std::size_t(iy) + std::size_t(n) * iz);
  }
  double coord(int i) const { return (i - n / 2) * spacing; }

  /* signed mode number mt for axis index m */
  int mode(int m) const { return (m <= n / 2) ? m : m - n; }
  /* angular wavenumber for axis index m */
  double wavenumber(int m) const;
  /* |k|^2 table per axis index, k2[m] = wavenumber(m)^2 */
  const std::vector<double>& axis_k2() const;

  bool operator==(const Grid3& o) const { return n == o.n && box_len == o.box_len; }
  bool operator!=(const Grid3& o) const { return !(*this == o); }

 private:
  mutable std::vector<double> k2_;  // lazily built axis table
};

}  // namespace mln
