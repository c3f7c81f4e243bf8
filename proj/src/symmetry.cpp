#include "mln/symmetry.hpp"

#include <algorithm>
#include <cmath>

#include "mln/threads.hpp"

namespace mln {
namespace {

constexpr int kPerms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};

/* element g = perm * sign-flip; source index for output site m:
 * s[axis] = flip(m[perm[axis]])  with flip(i) = (n - i) mod n */
void transform_into(const Field& f, int g, Field& out) {
  const int n = f.grid.n;
  const int* perm = kPerms[g / 8];
  const int signs = g % 8;
  parallel_for(std::size_t(n) * n, [&](std::size_t yz) {
    const int iz = int(yz / n), iy = int(yz % n);
    int m[3];
    m[2] = iz;
    m[1] = iy;
    for (int ix = 0; ix < n; ++ix) {
      m[0] = ix;
      int s[3];
      for (int a = 0; a < 3; ++a) {
        int c = m[perm[a]];
        if (signs & (1 << a)) c = (n - c) % n;
        s[a] = c;
      }
      out.v[f.grid.index(ix, iy, iz)] = f.v[f.grid.index(s[0], s[1], s[2])];
    }
  });
}

}  // namespace

Field cubic_transform(const Field& f, int g) {
  Field out(f.grid);
  transform_into(f, g, out);
  return out;
}

Field symmetrize_radial(const Field& f) {
  Field acc(f.grid);
  Field tmp(f.grid);
  for (int g = 0; g < kCubicGroupOrder; ++g) {
    transform_into(f, g, tmp);
    for (std::size_t i = 0; i < acc.size(); ++i) acc.v[i] += tmp.v[i];
  }
  const double w = 1.0 / kCubicGroupOrder;
  parallel_for(acc.size(), [&](std::size_t i) { acc.v[i] *= w; });
  return acc;
}

double cubic_asymmetry(const Field& f) {
  Field tmp(f.grid);
  double worst = 0.0;
  for (int g = 1; g < kCubicGroupOrder; ++g) {
    transform_into(f, g, tmp);
    double d = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) d = std::max(d, std::fabs(tmp.v[i] - f.v[i]));
    worst = std::max(worst, d);
  }
  return worst;
}

}  // namespace mln
