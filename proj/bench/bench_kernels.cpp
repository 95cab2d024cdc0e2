// Timing harness comparing the serial reference kernels against the
// OpenMP-parallel production paths on identical inputs. Prints a small table;
// abs-diff columns double as a sanity check that both routes agree.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>

#include "mccm/cascade.hpp"
#include "mccm/spectrum.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using clock_type = std::chrono::steady_clock;

double time_of(const std::function<void()>& fn) {
  const auto t0 = clock_type::now();
  fn();
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  int depth = 18;
  int reps = 4;
  if (argc > 1) depth = std::atoi(argv[1]);
  if (argc > 2) reps = std::atoi(argv[2]);

  const mccm::ModelSpec spec{mccm::WeightModel::log_normal(0.6), 2};
#ifdef _OPENMP
  std::printf("threads=%d  b=%d  depth=%d  reps=%d\n", omp_get_max_threads(), spec.b, depth, reps);
#else
  std::printf("serial build  b=%d  depth=%d  reps=%d\n", spec.b, depth, reps);
#endif
  std::printf("%-28s %10s %10s %8s %12s\n", "kernel", "serial[s]", "omp[s]", "speedup", "max|diff|");

  // field generation
  mccm::CascadeField f_serial, f_par;
  double ts = 0, tp = 0;
  for (int r = 0; r < reps; ++r) {
    ts += time_of([&] { f_serial = mccm::sample_field_serial(spec, depth, 42 + r); });
    tp += time_of([&] { f_par = mccm::sample_field(spec, depth, 42 + r); });
  }
  double dmax = 0;
  for (std::size_t k = 0; k < f_serial.masses.size(); ++k)
    dmax = std::max(dmax, std::fabs(f_serial.masses[k] - f_par.masses[k]));
  std::printf("%-28s %10.3f %10.3f %8.2f %12.3e\n", "sample_field", ts, tp, ts / tp, dmax);

  // direct coefficient evaluation
  const mccm::FrequencyProbe probe(spec.b, depth);
  std::complex<double> z_serial{}, z_par{};
  ts = tp = 0;
  for (int r = 0; r < reps; ++r) {
    const std::uint64_t s = 37 + 101 * r;
    ts += time_of([&] { z_serial = mccm::fourier_at(f_par, s); });
    tp += time_of([&] { z_par = probe.eval(f_par, s); });
  }
  std::printf("%-28s %10.3f %10.3f %8.2f %12.3e\n", "coefficient eval", ts, tp, ts / tp,
              std::abs(z_serial - z_par));

  // spectrum: full FFT path vs per-frequency direct sums
  const int fft_depth = std::min(depth, 14);
  const mccm::CascadeField f_small =
      fft_depth == depth ? f_par : mccm::sample_field(spec, fft_depth, 42);
  mccm::Spectrum sp;
  const double t_fft = time_of([&] { sp = mccm::fourier_all(f_small); });
  double worst = 0;
  const double t_dir = time_of([&] {
    for (std::uint64_t s = 1; s <= 64; ++s)
      worst = std::max(worst, std::abs(mccm::fourier_at(f_small, s) - sp.coeffs[s]));
  });
  std::printf("%-28s %10.3f %10.3f %8s %12.3e\n", "fft vs direct (64 coeffs)", t_dir, t_fft, "-",
              worst);
  return 0;
}
