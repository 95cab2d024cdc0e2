#include "mccm/fft.hpp"

#include <cmath>

#include "mccm/errors.hpp"

namespace mccm {

namespace {

using cplx = std::complex<double>;

// dst[0..n) = DFT of src[0], src[stride], ..., src[(n-1) stride].
// aux is scratch of the same length; sibling segments never alias.
void fft_rec(const cplx* src, std::size_t stride, cplx* dst, cplx* aux, std::size_t n, int radix,
             const cplx* roots, std::size_t root_step, std::size_t n_top) {
  if (n == 1) {
    dst[0] = src[0];
    return;
  }
  const std::size_t m = n / radix;
  for (int r = 0; r < radix; ++r)
    fft_rec(src + static_cast<std::size_t>(r) * stride, stride * radix, aux + r * m, dst + r * m,
            m, radix, roots, root_step * radix, n_top);
  for (std::size_t q = 0; q < m; ++q) {
    for (int s = 0; s < radix; ++s) {
      const std::size_t k = q + static_cast<std::size_t>(s) * m;
      cplx acc = 0.0;
      for (int r = 0; r < radix; ++r) {
        const std::size_t idx = (static_cast<std::size_t>(r) * k) % n * root_step % n_top;
        acc += aux[r * m + q] * roots[idx];
      }
      dst[k] = acc;
    }
  }
}

}  // namespace

std::vector<std::complex<double>> fft_pow_radix(const std::vector<std::complex<double>>& input,
                                                int radix) {
  const std::size_t n = input.size();
  if (radix < 2) throw Error(ErrorCode::BadConfig, "radix must be >= 2");
  std::size_t check = n;
  while (check > 1) {
    if (check % static_cast<std::size_t>(radix) != 0)
      throw Error(ErrorCode::BadConfig, "length is not a power of the radix");
    check /= static_cast<std::size_t>(radix);
  }
  if (n <= 1) return input;

  std::vector<cplx> roots(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double ang = -2.0 * 3.14159265358979323846 * static_cast<double>(j) / static_cast<double>(n);
    roots[j] = {std::cos(ang), std::sin(ang)};
  }
  std::vector<cplx> out(n), aux(n);
  fft_rec(input.data(), 1, out.data(), aux.data(), n, radix, roots.data(), 1, n);
  return out;
}

}  // namespace mccm
