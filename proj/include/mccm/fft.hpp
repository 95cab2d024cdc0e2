#ifndef MCCM_FFT_HPP
#define MCCM_FFT_HPP

#include <complex>
#include <vector>

namespace mccm {

// Forward DFT (e^{-2 pi i jk/N} convention) of a length-radix^n vector.
// Out-of-place recursive Cooley-Tukey specialized to pure powers of a small
// radix; exact-table twiddles, no bit reversal. Deterministic and serial.
std::vector<std::complex<double>> fft_pow_radix(const std::vector<std::complex<double>>& input,
                                                int radix);

}  // namespace mccm

#endif
