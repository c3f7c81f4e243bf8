#include "mln/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

#include "mln/threads.hpp"

namespace mln {
namespace {

/* One forward + one backward c2c plan per grid size.  Plans are created with
 * FFTW_ESTIMATE (deterministic results regardless of wisdom) and
 * FFTW_UNALIGNED so they can run on any caller buffer via the new-array
 * interface.  Creation is serialized; execution is thread-safe. */
struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

PlanPair& plans_for(int n) {
  static std::map<int, PlanPair> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  std::vector<std::complex<double>> a(std::size_t(n) * n * n), b(a.size());
  PlanPair p;
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  p.fwd = fftw_plan_dft_3d(n, n, n, reinterpret_cast<fftw_complex*>(a.data()),
                           reinterpret_cast<fftw_complex*>(b.data()), FFTW_FORWARD, flags);
  p.bwd = fftw_plan_dft_3d(n, n, n, reinterpret_cast<fftw_complex*>(a.data()),
                           reinterpret_cast<fftw_complex*>(b.data()), FFTW_BACKWARD, flags);
  if (!p.fwd || !p.bwd) throw std::runtime_error("fft: plan creation failed");
  return cache.emplace(n, p).first->second;
}

}  // namespace

SpectralField to_spectral(const Field& f) {
  require_finite(f, "to_spectral");
  const Grid3& g = f.grid;
  SpectralField F(g);
  std::vector<std::complex<double>> in(f.size());
  parallel_for(f.size(), [&](std::size_t i) { in[i] = f.v[i]; });
  fftw_execute_dft(plans_for(g.n).fwd, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(F.c.data()));
  const double scale = std::pow(g.box_len, 1.5) / double(g.size());
  parallel_for(F.size(), [&](std::size_t i) { F.c[i] *= scale; });
  return F;
}

Field from_spectral(const SpectralField& F) {
  const Grid3& g = F.grid;
  std::vector<std::complex<double>> out(F.size());
  // fftw_execute_dft with FFTW_BACKWARD leaves the sum unnormalized
  std::vector<std::complex<double>> in(F.c);
  fftw_execute_dft(plans_for(g.n).bwd, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  Field f(g);
  const double scale = 1.0 / std::pow(g.box_len, 1.5);
  parallel_for(f.size(), [&](std::size_t i) { f.v[i] = out[i].real() * scale; });
  return f;
}

}  // namespace mln
