#include "mln/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mln {

static bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

Grid3 Grid3::create(int n, double box_len) {
  if (!power_of_two(n) || n < 8)
    throw std::invalid_argument("grid: n must be a power of two >= 8, got " + std::to_string(n));
  if (!(box_len > 0.0) || !std::isfinite(box_len))
    throw std::invalid_argument("grid: box length must be positive and finite");
  Grid3 g;
  g.n = n;
  g.box_len = box_len;
  g.spacing = box_len / n;
  return g;
}

double Grid3::wavenumber(int m) const { return 2.0 * M_PI * mode(m) / box_len; }

const std::vector<double>& Grid3::axis_k2() const {
  if (k2_.empty()) {
    k2_.resize(n);
    for (int m = 0; m < n; ++m) {
      const double k = wavenumber(m);
      k2_[m] = k * k;
    }
  }
  return k2_;
}

}  // namespace mln
