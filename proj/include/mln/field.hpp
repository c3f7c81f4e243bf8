#pragma once

#include <complex>
#include <vector>

#include "mln/grid.hpp"

namespace mln {

/* Real scalar field sampled on a Grid3, x-fastest storage. */
struct Field {
  Grid3 grid;
  std::vector<double> v;

  Field() = default;
  explicit Field(const Grid3& g) : grid(g), v(g.size(), 0.0) {}
  Field(const Grid3& g, std::vector<double> values);

  std::size_t size() const { return v.size(); }
  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }
};

/* Complex Fourier coefficients of a real field, same x-fastest layout over
 * mode indices.  Normalized so that sum |coeff|^2 = h^3 sum f^2 exactly
 * (discrete Plancherel); see fft.hpp. */
struct SpectralField {
  Grid3 grid;
  std::vector<std::complex<double>> c;

  SpectralField() = default;
  explicit SpectralField(const Grid3& g) : grid(g), c(g.size(), {0.0, 0.0}) {}

  std::size_t size() const { return c.size(); }
};

/* elementwise helpers (all require matching grids) */
void require_same_grid(const Grid3& a, const Grid3& b, const char* where);
void require_finite(const Field& f, const char* where);

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(double s, const Field& a);
Field& operator+=(Field& a, const Field& b);
Field& operator-=(Field& a, const Field& b);
Field& operator*=(Field& a, double s);

/* a + s*b */
Field axpy(const Field& a, double s, const Field& b);
/* pointwise product */
Field hadamard(const Field& a, const Field& b);

double min_value(const Field& f);
double max_abs(const Field& f);
/* plain arithmetic mean of samples */
double mean_value(const Field& f);

}  // namespace mln
