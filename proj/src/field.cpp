#include "mln/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mln/threads.hpp"

namespace mln {

Field::Field(const Grid3& g, std::vector<double> values) : grid(g), v(std::move(values)) {
  if (v.size() != g.size())
    throw std::invalid_argument("field: value count " + std::to_string(v.size()) +
                                " does not match grid size " + std::to_string(g.size()));
}

void require_same_grid(const Grid3& a, const Grid3& b, const char* where) {
  if (a != b) throw std::invalid_argument(std::string(where) + ": fields live on different grids");
}

void require_finite(const Field& f, const char* where) {
  for (std::size_t i = 0; i < f.v.size(); ++i)
    if (!std::isfinite(f.v[i]))
      throw std::invalid_argument(std::string(where) + ": non-finite sample at linear index " +
                                  std::to_string(i));
}

Field operator+(const Field& a, const Field& b) {
  require_same_grid(a.grid, b.grid, "field add");
  Field r(a.grid);
  parallel_for(r.size(), [&](std::size_t i) { r.v[i] = a.v[i] + b.v[i]; });
  return r;
}

Field operator-(const Field& a, const Field& b) {
  require_same_grid(a.grid, b.grid, "field sub");
  Field r(a.grid);
  parallel_for(r.size(), [&](std::size_t i) { r.v[i] = a.v[i] - b.v[i]; });
  return r;
}

Field operator*(double s, const Field& a) {
  Field r(a.grid);
  parallel_for(r.size(), [&](std::size_t i) { r.v[i] = s * a.v[i]; });
  return r;
}

Field& operator+=(Field& a, const Field& b) {
  require_same_grid(a.grid, b.grid, "field add");
  parallel_for(a.size(), [&](std::size_t i) { a.v[i] += b.v[i]; });
  return a;
}

Field& operator-=(Field& a, const Field& b) {
  require_same_grid(a.grid, b.grid, "field sub");
  parallel_for(a.size(), [&](std::size_t i) { a.v[i] -= b.v[i]; });
  return a;
}

Field& operator*=(Field& a, double s) {
  parallel_for(a.size(), [&](std::size_t i) { a.v[i] *= s; });
  return a;
}

Field axpy(const Field& a, double s, const Field& b) {
  require_same_grid(a.grid, b.grid, "axpy");
  Field r(a.grid);
  parallel_for(r.size(), [&](std::size_t i) { r.v[i] = a.v[i] + s * b.v[i]; });
  return r;
}

Field hadamard(const Field& a, const Field& b) {
  require_same_grid(a.grid, b.grid, "hadamard");
  Field r(a.grid);
  parallel_for(r.size(), [&](std::size_t i) { r.v[i] = a.v[i] * b.v[i]; });
  return r;
}

double min_value(const Field& f) {
  double m = f.v.empty() ? 0.0 : f.v[0];
  for (double x : f.v) m = std::min(m, x);
  return m;
}

double max_abs(const Field& f) {
  double m = 0.0;
  for (double x : f.v) m = std::max(m, std::fabs(x));
  return m;
}

double mean_value(const Field& f) {
  double acc = 0.0;
  for (double x : f.v) acc += x;
  return acc / double(f.v.size());
}

}  // namespace mln
